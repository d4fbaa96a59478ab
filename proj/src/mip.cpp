#include "robsched/mip.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <queue>

#include "robsched/errors.hpp"
#include "robsched/simplex.hpp"

namespace robsched {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int MixedIntegerProgram::add_var(const std::string& name, double lb, double ub, double obj,
                                 bool integer) {
  if (lb > ub + 1e-12) throw InvalidInputError("add_var: empty domain for " + name);
  objective.push_back(obj);
  lower.push_back(lb);
  upper.push_back(ub);
  is_integer.push_back(integer ? 1 : 0);
  var_names.push_back(name);
  return num_vars() - 1;
}

void MixedIntegerProgram::add_row(std::vector<std::pair<int, double>> terms, Relation rel,
                                  double rhs, const std::string& name) {
  for (const auto& [col, coef] : terms) {
    (void)coef;
    if (col < 0 || col >= num_vars()) throw InvalidInputError("add_row: column out of range");
  }
  rows.push_back({std::move(terms), rel, rhs, name});
}

void MixedIntegerProgram::validate() const {
  if (lower.size() != objective.size() || upper.size() != objective.size() ||
      is_integer.size() != objective.size() || var_names.size() != objective.size())
    throw InvalidInputError("program: inconsistent variable arrays");
  for (const auto& row : rows)
    for (const auto& [col, coef] : row.terms) {
      (void)coef;
      if (col < 0 || col >= num_vars()) throw InvalidInputError("program: column out of range");
    }
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::limit: return "limit";
    case SolveStatus::error: return "error";
  }
  return "?";
}

namespace {

// Converts to computational min-form with one slack column per row.
struct Standardized {
  std::unique_ptr<BoundedSimplex> simplex;
  int nvars = 0;
  int nrows = 0;
  double sense = 1.0;  // +1 if the user problem is a minimization, -1 if maximization
};

Standardized standardize(const MixedIntegerProgram& prog) {
  prog.validate();
  int nv = prog.num_vars();
  int nr = static_cast<int>(prog.rows.size());
  std::vector<SparseCol> cols(nv + nr);
  std::vector<double> b(nr);
  for (int i = 0; i < nr; ++i) {
    const auto& row = prog.rows[i];
    std::map<int, double> merged;
    for (const auto& [col, coef] : row.terms)
      if (coef != 0.0) merged[col] += coef;
    for (const auto& [col, coef] : merged) {
      if (coef == 0.0) continue;
      cols[col].idx.push_back(i);
      cols[col].val.push_back(coef);
    }
    b[i] = row.rhs;
    cols[nv + i].idx.push_back(i);
    cols[nv + i].val.push_back(1.0);
  }
  double sense = prog.maximize ? -1.0 : 1.0;
  std::vector<double> cost(nv + nr, 0.0), lo(nv + nr), hi(nv + nr);
  for (int j = 0; j < nv; ++j) {
    cost[j] = sense * prog.objective[j];
    lo[j] = prog.lower[j];
    hi[j] = prog.upper[j];
  }
  for (int i = 0; i < nr; ++i) {
    switch (prog.rows[i].rel) {
      case Relation::le:
        lo[nv + i] = 0.0;
        hi[nv + i] = kInf;
        break;
      case Relation::ge:
        lo[nv + i] = -kInf;
        hi[nv + i] = 0.0;
        break;
      case Relation::eq:
        lo[nv + i] = 0.0;
        hi[nv + i] = 0.0;
        break;
    }
  }
  Standardized out;
  out.simplex = std::make_unique<BoundedSimplex>(nr, std::move(cols), std::move(cost),
                                                 std::move(lo), std::move(hi), std::move(b));
  out.nvars = nv;
  out.nrows = nr;
  out.sense = sense;
  return out;
}

SolveStatus map_result(SimplexResult r) {
  switch (r) {
    case SimplexResult::optimal: return SolveStatus::optimal;
    case SimplexResult::infeasible: return SolveStatus::infeasible;
    case SimplexResult::unbounded: return SolveStatus::unbounded;
    case SimplexResult::iteration_limit: return SolveStatus::limit;
    case SimplexResult::numerical: return SolveStatus::error;
  }
  return SolveStatus::error;
}

}  // namespace

LpSolution solve_lp(const MixedIntegerProgram& prog) {
  auto std_form = standardize(prog);
  BoundedSimplex& spx = *std_form.simplex;
  SimplexResult r = spx.solve_primal(2000000);
  LpSolution sol;
  sol.status = map_result(r);
  sol.iterations = spx.iterations();
  if (r != SimplexResult::optimal) return sol;
  double gap = spx.duality_gap();
  double obj = spx.objective();
  if (gap > 1e-6 * std::max(1.0, std::fabs(obj))) {
    // one retry from scratch with fresh factorization before reporting failure
    spx.set_slack_basis();
    r = spx.solve_primal(2000000);
    sol.iterations = spx.iterations();
    if (r != SimplexResult::optimal) {
      sol.status = map_result(r);
      return sol;
    }
    gap = spx.duality_gap();
    obj = spx.objective();
    if (gap > 1e-6 * std::max(1.0, std::fabs(obj))) {
      sol.status = SolveStatus::error;
      return sol;
    }
  }
  sol.duality_gap = gap;
  sol.objective = std_form.sense * obj;  // sense is its own inverse
  sol.x.assign(spx.x().begin(), spx.x().begin() + std_form.nvars);
  auto y = spx.duals();
  sol.row_duals.resize(std_form.nrows);
  for (int i = 0; i < std_form.nrows; ++i) sol.row_duals[i] = std_form.sense * y[i];
  return sol;
}

namespace {

struct BnbNode {
  double bound;                                       // min-form LP bound
  long id;
  std::vector<std::pair<int, std::pair<double, double>>> path;  // (col, (lo, hi)) from root
  SimplexBasis basis;
};

struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;                                // FIFO among equal bounds
  }
};

}  // namespace

MipSolution solve_mip(const MixedIntegerProgram& prog, const SolveOptions& opts) {
  auto std_form = standardize(prog);
  BoundedSimplex& spx = *std_form.simplex;
  const int nv = std_form.nvars;
  MipSolution out;

  // integral bound tightening on integer columns
  std::vector<int> int_cols;
  for (int j = 0; j < nv; ++j)
    if (prog.is_integer[j]) {
      int_cols.push_back(j);
      double lo = spx.lower_bound(j), hi = spx.upper_bound(j);
      double nlo = std::isfinite(lo) ? std::ceil(lo - opts.integrality_tol) : lo;
      double nhi = std::isfinite(hi) ? std::floor(hi + opts.integrality_tol) : hi;
      if (nlo > nhi + 0.5) {
        out.status = SolveStatus::infeasible;
        return out;
      }
      spx.set_bounds(j, nlo, nhi);
    }

  double incumbent = kInf;  // min-form
  std::vector<double> best_x;
  // min-form early-stop threshold; -inf means "never stop early"
  double stop_at = -kInf;
  if (!std::isnan(opts.early_stop_incumbent))
    stop_at = std_form.sense * opts.early_stop_incumbent;
  // min-form pruning level from a known-feasible objective; the margin keeps nodes
  // that merely tie it, so the attaining point itself is still found
  double prune_level = kInf;
  if (!std::isnan(opts.warm_bound)) prune_level = std_form.sense * opts.warm_bound + 1e-6;

  if (!opts.start_point.empty()) {
    if (static_cast<int>(opts.start_point.size()) != nv)
      throw InvalidInputError("start_point has " + std::to_string(opts.start_point.size()) +
                              " entries for " + std::to_string(nv) + " variables");
    std::vector<double> x0 = opts.start_point;
    for (int j : int_cols) {
      double r = std::nearbyint(x0[j]);
      if (std::fabs(x0[j] - r) > 1e-6)
        throw InvalidInputError("start_point is fractional at integer variable " +
                                prog.var_names[j]);
      x0[j] = r;
    }
    for (int j = 0; j < nv; ++j)
      if (x0[j] < prog.lower[j] - 1e-7 || x0[j] > prog.upper[j] + 1e-7)
        throw InvalidInputError("start_point violates bounds of " + prog.var_names[j]);
    for (const MipRow& row : prog.rows) {
      double act = 0.0;
      for (const auto& [col, coef] : row.terms) act += coef * x0[col];
      double viol = 0.0;
      if (row.rel == Relation::le) viol = act - row.rhs;
      else if (row.rel == Relation::ge) viol = row.rhs - act;
      else viol = std::fabs(act - row.rhs);
      if (viol > 1e-6)
        throw InvalidInputError("start_point violates row " + row.name + " by " +
                                std::to_string(viol));
    }
    double obj0 = 0.0;
    for (int j = 0; j < nv; ++j) obj0 += prog.objective[j] * x0[j];
    incumbent = std_form.sense * obj0;
    best_x = std::move(x0);
    if (incumbent <= stop_at) {
      out.status = SolveStatus::limit;
      out.objective = std_form.sense * incumbent;
      out.best_bound = out.objective;
      out.x = best_x;
      return out;
    }
  }

  std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> open;
  long next_id = 0;
  bool hit_node_limit = false, hit_early_stop = false, numerical_trouble = false;

  // root bounds snapshot for path replay
  std::vector<double> root_lo(nv), root_hi(nv);
  for (int j = 0; j < nv; ++j) {
    root_lo[j] = spx.lower_bound(j);
    root_hi[j] = spx.upper_bound(j);
  }

  auto lp_value_guard = [&](double obj) {
    double gap = spx.duality_gap();
    out.max_duality_gap = std::max(out.max_duality_gap, gap);
    (void)obj;
  };

  // returns: 0 solved-optimal, 1 infeasible, 2 unbounded, 3 trouble
  auto solve_node_lp = [&](bool cold) -> int {
    SimplexResult r;
    if (cold) {
      spx.set_slack_basis();
      r = spx.solve_primal(opts.iteration_limit);
    } else {
      r = spx.solve_dual(opts.iteration_limit);
      if (r == SimplexResult::numerical) {
        spx.set_slack_basis();
        r = spx.solve_primal(opts.iteration_limit);
      }
    }
    out.lp_iterations = spx.iterations();
    switch (r) {
      case SimplexResult::optimal: lp_value_guard(spx.objective()); return 0;
      case SimplexResult::infeasible: return 1;
      case SimplexResult::unbounded: return 2;
      default: return 3;
    }
  };

  // Process loop: the current node lives implicitly in the simplex state; branching
  // plunges into one child and queues the sibling with a warm-start basis.
  std::vector<std::pair<int, std::pair<double, double>>> cur_path;
  bool have_current = true;
  bool cold = true;

  double global_lb = -kInf;

  while (true) {
    if (out.nodes >= opts.node_limit) {
      hit_node_limit = true;
      break;
    }
    if (!have_current) {
      if (open.empty()) break;
      BnbNode node = open.top();
      open.pop();
      if (node.bound >= std::min(incumbent, prune_level) - opts.absolute_gap) {
        // bound-dominated; with a best-bound queue all remaining nodes are too
        global_lb = std::max(global_lb, node.bound);
        break;
      }
      // restore bounds
      for (int j = 0; j < nv; ++j) spx.set_bounds(j, root_lo[j], root_hi[j]);
      for (const auto& [col, bounds] : node.path) spx.set_bounds(col, bounds.first, bounds.second);
      spx.load_basis(node.basis);
      cur_path = node.path;
      have_current = true;
      cold = false;
      continue;
    }

    ++out.nodes;
    int lp = solve_node_lp(cold);
    cold = false;
    if (lp == 3) {
      numerical_trouble = true;
      break;
    }
    if (lp == 2) {
      // relaxation unbounded: without an incumbent the problem is unbounded
      out.status = SolveStatus::unbounded;
      return out;
    }
    if (lp == 1) {
      have_current = false;
      continue;
    }
    double bound = spx.objective();
    if (bound >= std::min(incumbent, prune_level) - opts.absolute_gap) {
      have_current = false;
      continue;
    }
    // branching variable: highest priority class, then most fractional, ties by
    // lowest index
    int branch = -1;
    int best_prio = std::numeric_limits<int>::min();
    double best_score = -1.0;
    for (int j : int_cols) {
      double v = spx.x()[j];
      double frac = v - std::floor(v);
      if (frac < opts.integrality_tol || frac > 1.0 - opts.integrality_tol) continue;
      int prio = j < static_cast<int>(opts.branch_priority.size()) ? opts.branch_priority[j] : 0;
      double score = 0.5 - std::fabs(frac - 0.5);
      if (prio > best_prio || (prio == best_prio && score > best_score + 1e-12)) {
        best_prio = prio;
        best_score = score;
        branch = j;
      }
    }
    double branch_value = branch >= 0 ? spx.x()[branch] : 0.0;
    if (branch < 0) {
      // integral within tolerance: fix the integers at their rounded values and
      // re-solve, so the incumbent is an exact point and big-M rows cannot leak
      // the integrality tolerance into the objective
      std::vector<double> pre_x(spx.x().begin(), spx.x().begin() + nv);
      std::vector<std::pair<double, double>> saved(int_cols.size());
      for (size_t k = 0; k < int_cols.size(); ++k) {
        int j = int_cols[k];
        saved[k] = {spx.lower_bound(j), spx.upper_bound(j)};
        double r = std::nearbyint(pre_x[j]);
        spx.set_bounds(j, r, r);
      }
      // re-solve from scratch: a warm re-solve can leave a fixed integer basic
      // within the feasibility tolerance of its bounds, and rounding it would
      // breach a big-M row
      int rep = solve_node_lp(true);
      bool clean = false;
      if (rep == 0) {
        // accept the point only if it satisfies every row almost exactly
        std::vector<double> cand(spx.x().begin(), spx.x().begin() + nv);
        for (int j : int_cols) cand[j] = std::nearbyint(cand[j]);
        clean = true;
        for (const MipRow& row : prog.rows) {
          double act = 0.0;
          for (const auto& [col, coef] : row.terms) act += coef * cand[col];
          double viol = 0.0;
          if (row.rel == Relation::le) viol = act - row.rhs;
          else if (row.rel == Relation::ge) viol = row.rhs - act;
          else viol = std::fabs(act - row.rhs);
          if (viol > 1e-9) {
            clean = false;
            break;
          }
        }
        if (clean) {
          double val = spx.objective();
          if (val < incumbent) {
            incumbent = val;
            best_x = std::move(cand);
            if (incumbent <= stop_at) {
              hit_early_stop = true;
              break;
            }
          }
          have_current = false;
          continue;
        }
      }
      if (rep != 0 && rep != 1) {
        numerical_trouble = true;
        break;
      }
      // rounding was infeasible or left a real residual: restore and branch exactly
      // on the integer that moved furthest when rounded
      for (size_t k = 0; k < int_cols.size(); ++k)
        spx.set_bounds(int_cols[k], saved[k].first, saved[k].second);
      double worst = -1.0;
      for (int j : int_cols) {
        double dev = std::fabs(pre_x[j] - std::nearbyint(pre_x[j]));
        if (dev > worst && spx.upper_bound(j) - spx.lower_bound(j) > 0.5) {
          worst = dev;
          branch = j;
        }
      }
      if (branch < 0) {
        numerical_trouble = true;
        break;
      }
      branch_value = pre_x[branch];
    }
    double v = branch_value;
    double fl = std::floor(v);
    double frac = v - fl;
    double cur_lo = spx.lower_bound(branch), cur_hi = spx.upper_bound(branch);
    // children: (branch <= fl) and (branch >= fl+1); dive toward the nearer side
    bool down_first = frac <= 0.5;
    auto make_path = [&](double lo, double hi) {
      auto p = cur_path;
      p.push_back({branch, {lo, hi}});
      return p;
    };
    BnbNode other;
    other.bound = bound;
    other.id = next_id++;
    other.basis = spx.save_basis();
    if (down_first) {
      other.path = make_path(fl + 1.0, cur_hi);
      spx.set_bounds(branch, cur_lo, fl);
      cur_path = make_path(cur_lo, fl);
    } else {
      other.path = make_path(cur_lo, fl);
      spx.set_bounds(branch, fl + 1.0, cur_hi);
      cur_path = make_path(fl + 1.0, cur_hi);
    }
    open.push(std::move(other));
  }

  // final status assembly (convert back to user orientation)
  bool have_incumbent = std::isfinite(incumbent);
  if (have_incumbent) {
    out.objective = std_form.sense * incumbent;
    out.x = best_x;
  }
  if (numerical_trouble) {
    out.status = SolveStatus::error;
    return out;
  }
  if (hit_early_stop || hit_node_limit) {
    out.status = SolveStatus::limit;
    double lb = global_lb;
    if (!open.empty()) lb = std::min(lb == -kInf ? kInf : lb, open.top().bound);
    if (lb == -kInf || lb == kInf) lb = have_incumbent ? incumbent : -kInf;
    out.best_bound = std_form.sense * std::min(lb, incumbent);
    return out;
  }
  if (!have_incumbent) {
    if (std::isfinite(prune_level)) {
      // everything was pruned against warm_bound without constructing the warm
      // point itself; the optimum is the warm value within the pruning margin
      out.status = SolveStatus::limit;
      double lb = global_lb == -kInf ? prune_level : global_lb;
      out.best_bound = std_form.sense * lb;
      return out;
    }
    out.status = SolveStatus::infeasible;
    return out;
  }
  out.status = SolveStatus::optimal;
  out.best_bound = out.objective;
  return out;
}

}  // namespace robsched
