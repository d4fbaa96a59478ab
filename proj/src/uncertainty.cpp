#include "robsched/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robsched/errors.hpp"
#include "robsched/mip.hpp"

namespace robsched {

namespace {
constexpr double kTol = 1e-9;
}

std::string set_kind_name(SetKind k) {
  switch (k) {
    case SetKind::box: return "box";
    case SetKind::budgeted: return "budgeted";
    case SetKind::discrete: return "discrete";
  }
  return "?";
}

SetKind set_kind_from_name(const std::string& name) {
  if (name == "box") return SetKind::box;
  if (name == "budgeted") return SetKind::budgeted;
  if (name == "discrete") return SetKind::discrete;
  throw InvalidInputError("unknown uncertainty set kind: " + name);
}

UncertaintySet UncertaintySet::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.size() != upper.size() || lower.empty())
    throw InvalidInputError("box set: bound vectors must be nonempty and equal-sized");
  for (size_t i = 0; i < lower.size(); ++i)
    if (lower[i] > upper[i] + kTol)
      throw InvalidInputError("box set: lower bound exceeds upper bound");
  UncertaintySet s;
  s.kind_ = SetKind::box;
  s.n_ = static_cast<int>(lower.size());
  s.box_ = {std::move(lower), std::move(upper)};
  return s;
}

UncertaintySet UncertaintySet::budgeted(std::vector<double> nominal,
                                        std::vector<double> deviation, double budget) {
  if (nominal.size() != deviation.size() || nominal.empty())
    throw InvalidInputError("budgeted set: nominal/deviation must be nonempty and equal-sized");
  for (double dv : deviation)
    if (dv < 0) throw InvalidInputError("budgeted set: negative deviation");
  if (budget < 0) throw InvalidInputError("budgeted set: negative budget");
  UncertaintySet s;
  s.kind_ = SetKind::budgeted;
  s.n_ = static_cast<int>(nominal.size());
  s.budgeted_ = {std::move(nominal), std::move(deviation), budget};
  return s;
}

UncertaintySet UncertaintySet::discrete(std::vector<DurationVec> scenarios) {
  if (scenarios.empty()) throw InvalidInputError("discrete set: no scenarios");
  size_t n = scenarios[0].size();
  if (n == 0) throw InvalidInputError("discrete set: zero-dimensional scenario");
  for (const auto& s : scenarios)
    if (s.size() != n) throw InvalidInputError("discrete set: ragged scenarios");
  UncertaintySet s;
  s.kind_ = SetKind::discrete;
  s.n_ = static_cast<int>(n);
  s.discrete_ = {std::move(scenarios)};
  return s;
}

const BoxData& UncertaintySet::box_data() const {
  if (kind_ != SetKind::box) throw UnsupportedSetError("not a box set");
  return box_;
}
const BudgetedData& UncertaintySet::budgeted_data() const {
  if (kind_ != SetKind::budgeted) throw UnsupportedSetError("not a budgeted set");
  return budgeted_;
}
const DiscreteData& UncertaintySet::discrete_data() const {
  if (kind_ != SetKind::discrete) throw UnsupportedSetError("not a discrete set");
  return discrete_;
}

UncertaintySet UncertaintySet::with_conditioning(Conditioning c) const {
  for (const auto& [task, dur] : c.fixed) {
    (void)dur;
    if (task < 0 || task >= n_) throw InvalidInputError("conditioning: task out of range");
  }
  for (const auto& [task, dur] : c.floors) {
    (void)dur;
    if (task < 0 || task >= n_) throw InvalidInputError("conditioning: task out of range");
  }
  UncertaintySet s = *this;
  s.cond_ = std::move(c);
  return s;
}

UncertaintySet condition(const UncertaintySet& set, const State& state) {
  if (state.n != set.dimension())
    throw InvalidInputError("condition: state and set dimensions disagree");
  Conditioning c = set.conditioning();
  for (size_t k = 0; k < state.finished_order.size(); ++k) {
    int task = state.finished_order[k];
    c.fixed[task] = state.finished_durations[k];
    c.floors.erase(task);
  }
  for (const auto& r : state.running) {
    if (c.fixed.count(r.task)) continue;
    auto it = c.floors.find(r.task);
    if (it == c.floors.end() || it->second < r.elapsed) c.floors[r.task] = r.elapsed;
  }
  return set.with_conditioning(std::move(c));
}

bool UncertaintySet::contains(const DurationVec& d, double tol) const {
  if (static_cast<int>(d.size()) != n_) return false;
  for (const auto& [task, dur] : cond_.fixed)
    if (!approx_equal(d[task].value(), dur.value(), tol)) return false;
  for (const auto& [task, dur] : cond_.floors)
    if (d[task].value() < dur.value() - tol) return false;
  switch (kind_) {
    case SetKind::box: {
      for (int i = 0; i < n_; ++i) {
        double v = d[i].value();
        if (v < box_.lower[i] - tol || v > box_.upper[i] + tol) return false;
      }
      return true;
    }
    case SetKind::budgeted: {
      double total = 0.0;
      for (int i = 0; i < n_; ++i) {
        double dv = budgeted_.deviation[i];
        double diff = d[i].value() - budgeted_.nominal[i];
        if (dv <= kTol) {
          if (!approx_equal(diff, 0.0, tol)) return false;
          continue;
        }
        double u = diff / dv;
        if (u < -tol || u > 1.0 + tol) return false;
        total += std::max(0.0, u);
      }
      return total <= budgeted_.budget + tol;
    }
    case SetKind::discrete: {
      for (const auto& scen : discrete_.scenarios) {
        bool match = true;
        for (int i = 0; i < n_ && match; ++i)
          if (!approx_equal(scen[i].value(), d[i].value(), tol)) match = false;
        if (match) return true;
      }
      return false;
    }
  }
  return false;
}

std::vector<int> UncertaintySet::consistent_scenarios() const {
  if (kind_ != SetKind::discrete)
    throw UnsupportedSetError("consistent_scenarios requires a discrete set");
  std::vector<int> out;
  for (size_t s = 0; s < discrete_.scenarios.size(); ++s) {
    const auto& scen = discrete_.scenarios[s];
    bool ok = true;
    for (const auto& [task, dur] : cond_.fixed)
      if (!(scen[task] == dur)) {
        ok = false;
        break;
      }
    if (ok)
      for (const auto& [task, dur] : cond_.floors)
        if (scen[task] < dur) {
          ok = false;
          break;
        }
    if (ok) out.push_back(static_cast<int>(s));
  }
  return out;
}

BudgetBox UncertaintySet::budget_box() const {
  if (kind_ != SetKind::budgeted) throw UnsupportedSetError("budget_box requires a budgeted set");
  BudgetBox bb;
  bb.lo.assign(n_, 0.0);
  bb.hi.assign(n_, 1.0);
  bb.budget = budgeted_.budget;
  auto u_of = [&](int i, double d_val, bool& ok) {
    double dv = budgeted_.deviation[i];
    if (dv <= kTol) {
      ok = approx_equal(d_val, budgeted_.nominal[i], 1e-7) || d_val <= budgeted_.nominal[i] + 1e-7;
      return 0.0;
    }
    ok = true;
    return (d_val - budgeted_.nominal[i]) / dv;
  };
  for (const auto& [task, dur] : cond_.fixed) {
    bool ok = true;
    double u = u_of(task, dur.value(), ok);
    if (!ok || u < -1e-7 || u > 1.0 + 1e-7) {
      bb.feasible = false;
      continue;
    }
    u = std::clamp(u, 0.0, 1.0);
    bb.lo[task] = bb.hi[task] = u;
  }
  for (const auto& [task, dur] : cond_.floors) {
    if (cond_.fixed.count(task)) continue;
    double dv = budgeted_.deviation[task];
    if (dv <= kTol) {
      if (dur.value() > budgeted_.nominal[task] + 1e-7) bb.feasible = false;
      continue;
    }
    double u = (dur.value() - budgeted_.nominal[task]) / dv;
    if (u > 1.0 + 1e-7) {
      bb.feasible = false;
      continue;
    }
    bb.lo[task] = std::clamp(u, 0.0, 1.0);
  }
  double base = std::accumulate(bb.lo.begin(), bb.lo.end(), 0.0);
  if (base > bb.budget + 1e-7) bb.feasible = false;
  return bb;
}

bool UncertaintySet::is_empty() const {
  switch (kind_) {
    case SetKind::box: {
      for (const auto& [task, dur] : cond_.fixed) {
        double v = dur.value();
        if (v < box_.lower[task] - kTol || v > box_.upper[task] + kTol) return true;
      }
      for (const auto& [task, dur] : cond_.floors)
        if (dur.value() > box_.upper[task] + kTol) return true;
      return false;
    }
    case SetKind::budgeted:
      return !budget_box().feasible;
    case SetKind::discrete:
      return consistent_scenarios().empty();
  }
  return true;
}

void UncertaintySet::coordinate_range(int i, double& lo, double& hi) const {
  auto fixed = cond_.fixed.find(i);
  if (fixed != cond_.fixed.end()) {
    lo = hi = fixed->second.value();
    return;
  }
  switch (kind_) {
    case SetKind::box:
      lo = box_.lower[i];
      hi = box_.upper[i];
      break;
    case SetKind::budgeted:
      lo = budgeted_.nominal[i];
      hi = budgeted_.nominal[i] + budgeted_.deviation[i];
      break;
    case SetKind::discrete: {
      auto alive = consistent_scenarios();
      if (alive.empty()) throw EmptySetError("coordinate_range on empty discrete set");
      lo = hi = discrete_.scenarios[alive[0]][i].value();
      for (int s : alive) {
        double v = discrete_.scenarios[s][i].value();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      break;
    }
  }
  auto floor = cond_.floors.find(i);
  if (floor != cond_.floors.end()) lo = std::max(lo, floor->second.value());
}

namespace {

MaxLinearResult max_linear_lp(const UncertaintySet& set, const std::vector<double>& c,
                              const std::vector<LinearConstraint>& extra) {
  int n = set.dimension();
  MixedIntegerProgram prog;
  prog.maximize = true;
  if (set.kind() == SetKind::box) {
    for (int i = 0; i < n; ++i) {
      double lo, hi;
      set.coordinate_range(i, lo, hi);
      prog.add_var("d_" + std::to_string(i), lo, hi, c[i], false);
    }
    for (const auto& con : extra) {
      std::vector<std::pair<int, double>> terms;
      for (int i = 0; i < n; ++i)
        if (con.coeffs[i] != 0.0) terms.push_back({i, con.coeffs[i]});
      prog.add_row(terms, Relation::le, con.rhs, "extra");
    }
  } else {
    auto bb = set.budget_box();
    if (!bb.feasible) throw EmptySetError("max_linear: conditioned budgeted set is empty");
    const auto& bd = set.budgeted_data();
    double base = 0.0;
    for (int i = 0; i < n; ++i) {
      base += c[i] * bd.nominal[i];
      prog.add_var("u_" + std::to_string(i), bb.lo[i], bb.hi[i], c[i] * bd.deviation[i], false);
    }
    std::vector<std::pair<int, double>> budget_terms;
    for (int i = 0; i < n; ++i) budget_terms.push_back({i, 1.0});
    prog.add_row(budget_terms, Relation::le, bb.budget, "budget");
    for (const auto& con : extra) {
      std::vector<std::pair<int, double>> terms;
      double rhs = con.rhs;
      for (int i = 0; i < n; ++i) {
        rhs -= con.coeffs[i] * bd.nominal[i];
        if (con.coeffs[i] * bd.deviation[i] != 0.0)
          terms.push_back({i, con.coeffs[i] * bd.deviation[i]});
      }
      prog.add_row(terms, Relation::le, rhs, "extra");
    }
    auto lp = solve_lp(prog);
    if (lp.status == SolveStatus::infeasible)
      throw EmptySetError("max_linear: no point satisfies the extra constraints");
    if (lp.status != SolveStatus::optimal) throw NumericalError("max_linear: LP did not solve");
    MaxLinearResult res;
    res.value = lp.objective + base;
    res.argmax.resize(n);
    for (int i = 0; i < n; ++i) res.argmax[i] = bd.nominal[i] + bd.deviation[i] * lp.x[i];
    return res;
  }
  auto lp = solve_lp(prog);
  if (lp.status == SolveStatus::infeasible)
    throw EmptySetError("max_linear: no point satisfies the extra constraints");
  if (lp.status != SolveStatus::optimal) throw NumericalError("max_linear: LP did not solve");
  MaxLinearResult res;
  res.value = lp.objective;
  res.argmax.assign(lp.x.begin(), lp.x.begin() + n);
  return res;
}

}  // namespace

MaxLinearResult max_linear(const UncertaintySet& set, const std::vector<double>& c,
                           const std::vector<LinearConstraint>& extra) {
  int n = set.dimension();
  if (static_cast<int>(c.size()) != n)
    throw InvalidInputError("max_linear: objective dimension mismatch");
  for (const auto& con : extra)
    if (static_cast<int>(con.coeffs.size()) != n)
      throw InvalidInputError("max_linear: constraint dimension mismatch");

  if (set.kind() == SetKind::discrete) {
    auto alive = set.consistent_scenarios();
    const auto& scen = set.discrete_data().scenarios;
    MaxLinearResult best;
    bool found = false;
    for (int s : alive) {
      bool ok = true;
      for (const auto& con : extra) {
        double lhs = 0.0;
        for (int i = 0; i < n; ++i) lhs += con.coeffs[i] * scen[s][i].value();
        if (lhs > con.rhs + 1e-9) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += c[i] * scen[s][i].value();
      if (!found || v > best.value + 1e-12) {
        best.value = v;
        best.argmax = to_doubles(scen[s]);
        found = true;
      }
    }
    if (!found) throw EmptySetError("max_linear: no consistent scenario");
    return best;
  }

  if (set.is_empty()) throw EmptySetError("max_linear: conditioned set is empty");
  if (!extra.empty()) return max_linear_lp(set, c, extra);

  if (set.kind() == SetKind::box) {
    MaxLinearResult res;
    res.argmax.resize(n);
    res.value = 0.0;
    for (int i = 0; i < n; ++i) {
      double lo, hi;
      set.coordinate_range(i, lo, hi);
      res.argmax[i] = c[i] >= 0 ? hi : lo;
      res.value += c[i] * res.argmax[i];
    }
    return res;
  }

  // budgeted: fractional-knapsack greedy in u-space over the conditioned bounds
  auto bb = set.budget_box();
  const auto& bd = set.budgeted_data();
  std::vector<double> u = bb.lo;
  double budget_left = bb.budget;
  for (double v : u) budget_left -= v;
  std::vector<int> idx;
  for (int i = 0; i < n; ++i)
    if (bb.hi[i] > bb.lo[i] + 1e-15 && c[i] * bd.deviation[i] > 0) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    double ga = c[a] * bd.deviation[a], gb = c[b] * bd.deviation[b];
    if (ga != gb) return ga > gb;
    return a < b;
  });
  for (int i : idx) {
    if (budget_left <= 1e-15) break;
    double raise = std::min(bb.hi[i] - bb.lo[i], budget_left);
    u[i] += raise;
    budget_left -= raise;
  }
  MaxLinearResult res;
  res.argmax.resize(n);
  res.value = 0.0;
  for (int i = 0; i < n; ++i) {
    res.argmax[i] = bd.nominal[i] + bd.deviation[i] * u[i];
    res.value += c[i] * res.argmax[i];
  }
  return res;
}

}  // namespace robsched
