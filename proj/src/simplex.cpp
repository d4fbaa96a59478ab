#include "robsched/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robsched/errors.hpp"

namespace robsched {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;  // pivots smaller than this are refused
constexpr double kDualTol = 1e-9;
constexpr double kFeasTol = 1e-8;
constexpr int kRefactorEvery = 120;
constexpr int kStallLimit = 60;    // degenerate pivots before switching to Bland's rule
constexpr int kBlandSpan = 400;    // iterations to stay in Bland mode

double sparse_dot(const SparseCol& col, const std::vector<double>& v) {
  double s = 0.0;
  for (size_t k = 0; k < col.idx.size(); ++k) s += col.val[k] * v[col.idx[k]];
  return s;
}
}  // namespace

BoundedSimplex::BoundedSimplex(int rows, std::vector<SparseCol> cols, std::vector<double> cost,
                               std::vector<double> lower, std::vector<double> upper,
                               std::vector<double> b)
    : nrows_(rows),
      ncols_(static_cast<int>(cols.size())),
      cols_(std::move(cols)),
      cost_(std::move(cost)),
      lo_(std::move(lower)),
      hi_(std::move(upper)),
      b_(std::move(b)) {
  if (static_cast<int>(cost_.size()) != ncols_ || static_cast<int>(lo_.size()) != ncols_ ||
      static_cast<int>(hi_.size()) != ncols_ || static_cast<int>(b_.size()) != nrows_)
    throw InvalidInputError("simplex: inconsistent dimensions");
  status_.assign(ncols_, ColStatus::AtLower);
  basic_.assign(nrows_, -1);
  basic_row_.assign(ncols_, -1);
  x_.assign(ncols_, 0.0);
  set_slack_basis();
}

void BoundedSimplex::set_bounds(int col, double lo, double hi) {
  lo_[col] = lo;
  hi_[col] = hi;
  if (status_[col] != ColStatus::Basic) {
    if (status_[col] == ColStatus::AtLower && !std::isfinite(lo))
      status_[col] = std::isfinite(hi) ? ColStatus::AtUpper : ColStatus::Free;
    else if (status_[col] == ColStatus::AtUpper && !std::isfinite(hi))
      status_[col] = std::isfinite(lo) ? ColStatus::AtLower : ColStatus::Free;
    else if (status_[col] == ColStatus::Free && std::isfinite(lo))
      status_[col] = ColStatus::AtLower;
    else if (status_[col] == ColStatus::Free && std::isfinite(hi))
      status_[col] = ColStatus::AtUpper;
  }
  x_dirty_ = true;
}

void BoundedSimplex::set_slack_basis() {
  etas_.clear();
  basic_row_.assign(ncols_, -1);
  int slack_base = ncols_ - nrows_;
  for (int j = 0; j < ncols_; ++j) {
    if (j >= slack_base) continue;
    if (std::isfinite(lo_[j]))
      status_[j] = ColStatus::AtLower;
    else if (std::isfinite(hi_[j]))
      status_[j] = ColStatus::AtUpper;
    else
      status_[j] = ColStatus::Free;
  }
  for (int r = 0; r < nrows_; ++r) {
    basic_[r] = slack_base + r;
    basic_row_[slack_base + r] = r;
    status_[slack_base + r] = ColStatus::Basic;
  }
  x_dirty_ = true;
}

void BoundedSimplex::ftran(std::vector<double>& v) const {
  for (const Eta& e : etas_) {
    double t = v[e.row];
    if (t == 0.0) continue;
    t /= e.pivot;
    v[e.row] = t;
    for (const auto& [i, w] : e.entries) v[i] -= w * t;
  }
}

void BoundedSimplex::btran(std::vector<double>& v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->row];
    for (const auto& [i, w] : it->entries) s -= w * v[i];
    v[it->row] = s / it->pivot;
  }
}

void BoundedSimplex::push_eta(int row, const std::vector<double>& w) {
  Eta e;
  e.row = row;
  e.pivot = w[row];
  for (int i = 0; i < nrows_; ++i)
    if (i != row && w[i] != 0.0) e.entries.push_back({i, w[i]});
  etas_.push_back(std::move(e));
}

bool BoundedSimplex::refactor() {
  std::vector<int> old_basics(basic_);
  etas_.clear();
  std::vector<bool> claimed(nrows_, false);
  std::vector<int> structural;
  int slack_base = ncols_ - nrows_;
  for (int c : old_basics) {
    if (c >= slack_base) {
      int hr = c - slack_base;
      claimed[hr] = true;
      basic_[hr] = c;
      basic_row_[c] = hr;
    } else {
      structural.push_back(c);
    }
  }
  std::sort(structural.begin(), structural.end(), [&](int a, int b) {
    size_t na = cols_[a].idx.size(), nb = cols_[b].idx.size();
    if (na != nb) return na < nb;
    return a < b;
  });
  std::vector<double> w(nrows_);
  for (int c : structural) {
    std::fill(w.begin(), w.end(), 0.0);
    for (size_t k = 0; k < cols_[c].idx.size(); ++k) w[cols_[c].idx[k]] = cols_[c].val[k];
    ftran(w);
    int best = -1;
    double best_abs = 1e-9;
    for (int r = 0; r < nrows_; ++r) {
      if (claimed[r]) continue;
      double a = std::fabs(w[r]);
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (best < 0) {
      // singular basis: fall back to the all-slack basis and let the caller re-solve
      for (int j = 0; j < ncols_; ++j) basic_row_[j] = -1;
      set_slack_basis();
      return false;
    }
    push_eta(best, w);
    claimed[best] = true;
    basic_[best] = c;
    basic_row_[c] = best;
  }
  x_dirty_ = true;
  return true;
}

double BoundedSimplex::nonbasic_value(int j) const {
  switch (status_[j]) {
    case ColStatus::AtLower: return lo_[j];
    case ColStatus::AtUpper: return hi_[j];
    case ColStatus::Free: return 0.0;
    case ColStatus::Basic: break;
  }
  return x_[j];
}

void BoundedSimplex::recompute_x() {
  std::vector<double> r(b_);
  for (int j = 0; j < ncols_; ++j) {
    if (status_[j] == ColStatus::Basic) continue;
    double v = nonbasic_value(j);
    x_[j] = v;
    if (v != 0.0)
      for (size_t k = 0; k < cols_[j].idx.size(); ++k) r[cols_[j].idx[k]] -= cols_[j].val[k] * v;
  }
  ftran(r);
  for (int row = 0; row < nrows_; ++row) x_[basic_[row]] = r[row];
  x_dirty_ = false;
}

double BoundedSimplex::objective() const {
  double s = 0.0;
  for (int j = 0; j < ncols_; ++j)
    if (cost_[j] != 0.0) s += cost_[j] * x_[j];
  return s;
}

std::vector<double> BoundedSimplex::duals() {
  std::vector<double> y(nrows_);
  for (int r = 0; r < nrows_; ++r) y[r] = cost_[basic_[r]];
  btran(y);
  return y;
}

double BoundedSimplex::duality_gap() {
  std::vector<double> y = duals();
  double g = 0.0;
  for (int r = 0; r < nrows_; ++r) g += y[r] * b_[r];
  for (int j = 0; j < ncols_; ++j) {
    double d = cost_[j] - sparse_dot(cols_[j], y);
    if (std::fabs(d) <= 1e-7) continue;
    double term = d > 0 ? d * lo_[j] : d * hi_[j];
    if (!std::isfinite(term)) return kInf;
    g += term;
  }
  return std::fabs(objective() - g);
}

void BoundedSimplex::load_basis(const SimplexBasis& basis) {
  if (static_cast<int>(basis.status.size()) != ncols_ ||
      static_cast<int>(basis.basic.size()) != nrows_)
    throw InvalidInputError("simplex: basis dimension mismatch");
  status_ = basis.status;
  basic_ = basis.basic;
  basic_row_.assign(ncols_, -1);
  for (int r = 0; r < nrows_; ++r) basic_row_[basic_[r]] = r;
  refactor();
  x_dirty_ = true;
}

void BoundedSimplex::price(const std::vector<double>& y, bool phase1, bool bland, int& q,
                           int& dir) const {
  q = -1;
  dir = 0;
  double best = 0.0;
  for (int j = 0; j < ncols_; ++j) {
    ColStatus st = status_[j];
    if (st == ColStatus::Basic) continue;
    if (hi_[j] - lo_[j] <= 1e-15) continue;  // fixed columns never enter
    double d = phase1 ? sparse_dot(cols_[j], y) : cost_[j] - sparse_dot(cols_[j], y);
    int candidate_dir = 0;
    if ((st == ColStatus::AtLower || st == ColStatus::Free) && d < -kDualTol)
      candidate_dir = +1;
    else if ((st == ColStatus::AtUpper || st == ColStatus::Free) && d > kDualTol)
      candidate_dir = -1;
    if (candidate_dir == 0) continue;
    if (bland) {
      q = j;
      dir = candidate_dir;
      return;
    }
    double score = std::fabs(d);
    if (score > best + 1e-15) {
      best = score;
      q = j;
      dir = candidate_dir;
    }
  }
}

SimplexResult BoundedSimplex::solve_primal(long iter_limit) {
  if (x_dirty_) recompute_x();
  std::vector<double> y(nrows_), w(nrows_);
  long start = iters_;
  int bland_until = 0;
  stall_ = 0;
  while (true) {
    if (iters_ - start > iter_limit) return SimplexResult::iteration_limit;
    if (static_cast<int>(etas_.size()) > kRefactorEvery) {
      if (!refactor()) return SimplexResult::numerical;
      recompute_x();
    }
    // classify basic feasibility
    bool any_infeasible = false;
    std::fill(y.begin(), y.end(), 0.0);
    for (int r = 0; r < nrows_; ++r) {
      int c = basic_[r];
      if (x_[c] < lo_[c] - kFeasTol) {
        y[r] = 1.0;
        any_infeasible = true;
      } else if (x_[c] > hi_[c] + kFeasTol) {
        y[r] = -1.0;
        any_infeasible = true;
      }
    }
    bool phase1 = any_infeasible;
    if (phase1) {
      btran(y);
    } else {
      for (int r = 0; r < nrows_; ++r) y[r] = cost_[basic_[r]];
      btran(y);
    }
    bool bland = iters_ < bland_until;
    int q, dir;
    price(y, phase1, bland, q, dir);
    if (q < 0) return phase1 ? SimplexResult::infeasible : SimplexResult::optimal;

    // ratio test
    std::fill(w.begin(), w.end(), 0.0);
    for (size_t k = 0; k < cols_[q].idx.size(); ++k) w[cols_[q].idx[k]] = cols_[q].val[k];
    ftran(w);
    double sigma = dir;
    double t_best = kInf;
    int block_row = -1;     // -1: none, -2: entering bound flip
    bool block_upper = false;
    double block_abs = 0.0;
    // entering variable's own span
    if (status_[q] != ColStatus::Free) {
      double span = hi_[q] - lo_[q];
      if (std::isfinite(span)) {
        t_best = span;
        block_row = -2;
      }
    }
    for (int r = 0; r < nrows_; ++r) {
      if (w[r] == 0.0) continue;
      double rate = -sigma * w[r];
      int c = basic_[r];
      double xr = x_[c];
      double t_hit = kInf;
      bool to_upper = false;
      if (phase1 && xr < lo_[c] - kFeasTol) {
        if (rate > 0) {
          t_hit = (lo_[c] - xr) / rate;
          to_upper = false;
        }
      } else if (phase1 && xr > hi_[c] + kFeasTol) {
        if (rate < 0) {
          t_hit = (xr - hi_[c]) / (-rate);
          to_upper = true;
        }
      } else {
        if (rate < 0 && std::isfinite(lo_[c])) {
          t_hit = (xr - lo_[c]) / (-rate);
          to_upper = false;
        } else if (rate > 0 && std::isfinite(hi_[c])) {
          t_hit = (hi_[c] - xr) / rate;
          to_upper = true;
        }
      }
      if (t_hit == kInf) continue;
      if (t_hit < 0) t_hit = 0;
      double a = std::fabs(w[r]);
      if (a <= kPivotTol) continue;  // refuse unstable pivots
      if (t_hit < t_best - 1e-12 || (t_hit < t_best + 1e-12 && a > block_abs)) {
        t_best = t_hit;
        block_row = r;
        block_upper = to_upper;
        block_abs = a;
      }
    }
    if (block_row == -1) {
      if (phase1) return SimplexResult::numerical;  // cannot happen for consistent data
      return SimplexResult::unbounded;
    }
    ++iters_;
    if (t_best <= 1e-12) {
      if (++stall_ > kStallLimit && !bland) bland_until = static_cast<int>(iters_) + kBlandSpan;
    } else {
      stall_ = 0;
    }
    // apply step
    double xq = nonbasic_value(q);
    if (t_best != 0.0) {
      for (int r = 0; r < nrows_; ++r)
        if (w[r] != 0.0) x_[basic_[r]] -= sigma * t_best * w[r];
    }
    if (block_row == -2) {
      status_[q] = sigma > 0 ? ColStatus::AtUpper : ColStatus::AtLower;
      x_[q] = sigma > 0 ? hi_[q] : lo_[q];
    } else {
      int lv = basic_[block_row];
      x_[lv] = block_upper ? hi_[lv] : lo_[lv];
      status_[lv] = block_upper ? ColStatus::AtUpper : ColStatus::AtLower;
      basic_row_[lv] = -1;
      x_[q] = xq + sigma * t_best;
      status_[q] = ColStatus::Basic;
      basic_[block_row] = q;
      basic_row_[q] = block_row;
      push_eta(block_row, w);
    }
  }
}

SimplexResult BoundedSimplex::solve_dual(long iter_limit) {
  if (x_dirty_) recompute_x();
  std::vector<double> y(nrows_), rho(nrows_), w(nrows_);
  long start = iters_;
  int bland_until = 0;
  stall_ = 0;
  // normalize dual feasibility by flipping nonbasic columns where possible
  {
    y = duals();
    bool flipped = false;
    for (int j = 0; j < ncols_; ++j) {
      if (status_[j] == ColStatus::Basic || hi_[j] - lo_[j] <= 1e-15) continue;
      double d = cost_[j] - sparse_dot(cols_[j], y);
      if (status_[j] == ColStatus::AtLower && d < -kDualTol) {
        if (!std::isfinite(hi_[j])) return SimplexResult::numerical;
        status_[j] = ColStatus::AtUpper;
        flipped = true;
      } else if (status_[j] == ColStatus::AtUpper && d > kDualTol) {
        if (!std::isfinite(lo_[j])) return SimplexResult::numerical;
        status_[j] = ColStatus::AtLower;
        flipped = true;
      } else if (status_[j] == ColStatus::Free && std::fabs(d) > kDualTol) {
        return SimplexResult::numerical;
      }
    }
    if (flipped) recompute_x();
  }
  while (true) {
    if (iters_ - start > iter_limit) return SimplexResult::iteration_limit;
    if (static_cast<int>(etas_.size()) > kRefactorEvery) {
      if (!refactor()) return SimplexResult::numerical;
      recompute_x();
    }
    // leaving variable: most infeasible basic
    int r_star = -1;
    double worst = kFeasTol;
    bool below = false;
    for (int r = 0; r < nrows_; ++r) {
      int c = basic_[r];
      double v1 = lo_[c] - x_[c], v2 = x_[c] - hi_[c];
      double v = std::max(v1, v2);
      if (v > worst) {
        worst = v;
        r_star = r;
        below = v1 >= v2;
      }
    }
    if (r_star < 0) return SimplexResult::optimal;

    std::fill(rho.begin(), rho.end(), 0.0);
    rho[r_star] = 1.0;
    btran(rho);
    y = duals();

    bool bland = iters_ < bland_until;
    int q = -1;
    double best_theta = kInf, best_alpha = 0.0;
    for (int j = 0; j < ncols_; ++j) {
      ColStatus st = status_[j];
      if (st == ColStatus::Basic || hi_[j] - lo_[j] <= 1e-15) continue;
      double alpha = sparse_dot(cols_[j], rho);
      if (std::fabs(alpha) <= kPivotTol) continue;
      bool ok;
      if (below)
        ok = (st == ColStatus::AtLower && alpha < 0) || (st == ColStatus::AtUpper && alpha > 0) ||
             st == ColStatus::Free;
      else
        ok = (st == ColStatus::AtLower && alpha > 0) || (st == ColStatus::AtUpper && alpha < 0) ||
             st == ColStatus::Free;
      if (!ok) continue;
      double d = cost_[j] - sparse_dot(cols_[j], y);
      double theta = std::fabs(d) / std::fabs(alpha);
      if (bland) {
        if (q < 0) {
          q = j;
          best_alpha = alpha;
        }
        continue;
      }
      if (theta < best_theta - 1e-12 ||
          (theta < best_theta + 1e-12 && std::fabs(alpha) > std::fabs(best_alpha))) {
        best_theta = theta;
        q = j;
        best_alpha = alpha;
      }
    }
    if (q < 0) return SimplexResult::infeasible;

    std::fill(w.begin(), w.end(), 0.0);
    for (size_t k = 0; k < cols_[q].idx.size(); ++k) w[cols_[q].idx[k]] = cols_[q].val[k];
    ftran(w);
    if (std::fabs(w[r_star]) <= kPivotTol) {
      // pricing alpha disagreed with ftran; refuse and refactor
      if (!refactor()) return SimplexResult::numerical;
      recompute_x();
      if (++stall_ > kStallLimit) return SimplexResult::numerical;
      continue;
    }
    ++iters_;
    int lv = basic_[r_star];
    double target = below ? lo_[lv] : hi_[lv];
    double step = (x_[lv] - target) / w[r_star];
    for (int r = 0; r < nrows_; ++r)
      if (w[r] != 0.0) x_[basic_[r]] -= step * w[r];
    x_[q] = nonbasic_value(q) + step;
    x_[lv] = target;
    status_[lv] = below ? ColStatus::AtLower : ColStatus::AtUpper;
    basic_row_[lv] = -1;
    status_[q] = ColStatus::Basic;
    basic_[r_star] = q;
    basic_row_[q] = r_star;
    push_eta(r_star, w);
    if (std::fabs(step) <= 1e-12) {
      if (++stall_ > kStallLimit && !bland) bland_until = static_cast<int>(iters_) + kBlandSpan;
    } else {
      stall_ = 0;
    }
  }
}

}  // namespace robsched
