#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "robsched/errors.hpp"
#include "robsched/mip.hpp"
#include "robsched/policies.hpp"

namespace robsched {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-9;

// ---------------------------------------------------------------------------
// Budgeted branch evaluation by column-and-constraint generation.
//
// Branch event: task `a` (on machine 1, started e_a ago) completes no later than
// task `b` (started e_b ago); only d_a is revealed before the remaining tasks R
// are split between the machines. The master maximizes the makespan over one
// duration vector per known allocation, all sharing the revealed coordinate; the
// subproblem best-responds to the revealed value with the inner worst case
// dualized, which stays linear because the deviation coefficients are linear in
// the allocation binaries.
// ---------------------------------------------------------------------------

struct BudInfo {
  std::vector<double> nom, dev, lo, hi;  // u-space bounds, conditioning applied
  double budget = 0.0;
};

BudInfo bud_info(const UncertaintySet& set) {
  const auto& bd = set.budgeted_data();
  BudgetBox bb = set.budget_box();
  if (!bb.feasible) throw EmptySetError("budgeted set has no scenario left");
  return {bd.nominal, bd.deviation, bb.lo, bb.hi, bb.budget};
}

struct BranchOutcome {
  double value = -kInf;  // relative to the decision clock; -inf if the event is empty
  bool converged = true;
};

struct MasterOut {
  bool feasible = false;
  double value = 0.0;
  double revealed = 0.0;  // worst revealed duration of `a`
};

MasterOut solve_branch_master(const BudInfo& u, int a, int b, const std::vector<int>& R,
                              double e_a, double e_b,
                              const std::vector<std::vector<char>>& columns) {
  MixedIntegerProgram prog;
  prog.maximize = true;
  int t = prog.add_var("t", 0.0, kInf, 1.0, false);
  int ua = prog.add_var("u_rev", u.lo[a], u.hi[a], 0.0, false);

  double fixed_floor = 0.0;  // coordinates out of play sit at their floors
  std::vector<char> in_play(u.nom.size(), 0);
  in_play[a] = in_play[b] = 1;
  for (int c : R) in_play[c] = 1;
  for (size_t c = 0; c < u.nom.size(); ++c)
    if (!in_play[c]) fixed_floor += u.lo[c];
  double budget_eff = u.budget - fixed_floor;

  double big_m = e_a + e_b + 1.0;
  for (size_t c = 0; c < u.nom.size(); ++c)
    if (in_play[c]) big_m += u.nom[c] + u.dev[c] * u.hi[c];

  for (size_t k = 0; k < columns.size(); ++k) {
    const std::vector<char>& x = columns[k];
    std::string tag = "_k" + std::to_string(k);
    int tk = prog.add_var("t" + tag, 0.0, kInf, 0.0, false);
    int bk = prog.add_var("b" + tag, 0.0, 1.0, 0.0, true);
    std::vector<int> uc(u.nom.size(), -1);
    std::vector<std::pair<int, double>> budget_row{{ua, 1.0}};
    for (size_t c = 0; c < u.nom.size(); ++c) {
      if (!in_play[c] || static_cast<int>(c) == a) continue;
      uc[c] = prog.add_var("u" + std::to_string(c) + tag, u.lo[c], u.hi[c], 0.0, false);
      budget_row.emplace_back(uc[c], 1.0);
    }
    prog.add_row(std::move(budget_row), Relation::le, budget_eff, "budget" + tag);
    // event: nom_a + dev_a*u_a - e_a <= nom_b + dev_b*u_b - e_b
    prog.add_row({{ua, u.dev[a]}, {uc[b], -u.dev[b]}}, Relation::le,
                 u.nom[b] - u.nom[a] + e_a - e_b, "event" + tag);
    prog.add_row({{t, 1.0}, {tk, -1.0}}, Relation::le, 0.0, "link" + tag);

    // side 1 (freed machine): t_k <= sum_{x_c=1}(nom_c + dev_c u_c) + d_a - e_a + M(1-b_k)
    std::vector<std::pair<int, double>> s1{{tk, 1.0}, {ua, -u.dev[a]}, {bk, big_m}};
    double rhs1 = u.nom[a] - e_a + big_m;
    // side 2 (machine still running b): t_k <= sum_{x_c=0}(...) + d_b - e_b + M b_k
    std::vector<std::pair<int, double>> s2{{tk, 1.0}, {uc[b], -u.dev[b]}, {bk, -big_m}};
    double rhs2 = u.nom[b] - e_b;
    for (size_t idx = 0; idx < R.size(); ++idx) {
      int c = R[idx];
      if (x[idx]) {
        s1.emplace_back(uc[c], -u.dev[c]);
        rhs1 += u.nom[c];
      } else {
        s2.emplace_back(uc[c], -u.dev[c]);
        rhs2 += u.nom[c];
      }
    }
    prog.add_row(std::move(s1), Relation::le, rhs1, "side1" + tag);
    prog.add_row(std::move(s2), Relation::le, rhs2, "side2" + tag);
  }

  MipSolution sol = solve_mip(prog);
  MasterOut out;
  if (sol.status == SolveStatus::infeasible) return out;
  if (sol.status != SolveStatus::optimal)
    throw NumericalError("branch master failed: " + status_name(sol.status));
  out.feasible = true;
  out.value = sol.objective;
  out.revealed = u.nom[a] + u.dev[a] * sol.x[ua];
  return out;
}

struct SubOut {
  double value = 0.0;
  std::vector<char> x;
};

SubOut solve_branch_sub(const BudInfo& u, int a, int b, const std::vector<int>& R, double e_a,
                        double e_b, double revealed) {
  double ua = u.dev[a] > 0.0 ? (revealed - u.nom[a]) / u.dev[a] : u.lo[a];
  ua = std::clamp(ua, u.lo[a], u.hi[a]);
  std::vector<double> lo2 = u.lo;
  if (u.dev[b] > 0.0) {
    double need = ((revealed - e_a + e_b) - u.nom[b]) / u.dev[b];
    lo2[b] = std::clamp(std::max(lo2[b], need), u.lo[b], u.hi[b]);
  }
  double slack = u.budget - ua;
  for (size_t c = 0; c < u.nom.size(); ++c)
    if (static_cast<int>(c) != a) slack -= lo2[c];
  slack = std::max(slack, 0.0);
  auto floor_val = [&](int c) { return u.nom[c] + u.dev[c] * lo2[c]; };
  auto cap = [&](int c) { return u.hi[c] - lo2[c]; };

  MixedIntegerProgram prog;
  prog.maximize = false;
  int v = prog.add_var("v", 0.0, kInf, 1.0, false);
  std::vector<int> x(R.size());
  for (size_t idx = 0; idx < R.size(); ++idx)
    x[idx] = prog.add_var("x_" + std::to_string(R[idx]), 0.0, 1.0, 0.0, true);

  // Dual of max { sum dev_c w_c : 0 <= w_c <= cap_c, sum w <= slack } per side.
  auto add_side = [&](const std::string& tag, bool side1) {
    int theta = prog.add_var("theta" + tag, 0.0, kInf, 0.0, false);
    std::vector<std::pair<int, double>> row{{v, 1.0}, {theta, -slack}};
    double rhs = side1 ? revealed - e_a : floor_val(b) - e_b;
    for (size_t idx = 0; idx < R.size(); ++idx) {
      int c = R[idx];
      if (!side1) rhs += floor_val(c);
      row.emplace_back(x[idx], side1 ? -floor_val(c) : floor_val(c));
      if (u.dev[c] > 0.0 && cap(c) > 0.0) {
        int pi = prog.add_var("pi" + tag + "_" + std::to_string(c), 0.0, kInf, 0.0, false);
        row.emplace_back(pi, -cap(c));
        if (side1)
          prog.add_row({{theta, 1.0}, {pi, 1.0}, {x[idx], -u.dev[c]}}, Relation::ge, 0.0,
                       "dual" + tag + "_" + std::to_string(c));
        else
          prog.add_row({{theta, 1.0}, {pi, 1.0}, {x[idx], u.dev[c]}}, Relation::ge, u.dev[c],
                       "dual" + tag + "_" + std::to_string(c));
      }
    }
    if (!side1 && u.dev[b] > 0.0 && cap(b) > 0.0) {
      int pi = prog.add_var("pi" + tag + "_b", 0.0, kInf, 0.0, false);
      row.emplace_back(pi, -cap(b));
      prog.add_row({{theta, 1.0}, {pi, 1.0}}, Relation::ge, u.dev[b], "dual" + tag + "_b");
    }
    prog.add_row(std::move(row), Relation::ge, rhs, "side" + tag);
  };
  add_side("1", true);
  add_side("2", false);

  MipSolution sol = solve_mip(prog);
  if (sol.status != SolveStatus::optimal)
    throw NumericalError("branch subproblem failed: " + status_name(sol.status));
  SubOut out;
  out.value = sol.objective;
  out.x.resize(R.size());
  for (size_t idx = 0; idx < R.size(); ++idx) out.x[idx] = sol.x[x[idx]] > 0.5 ? 1 : 0;
  return out;
}

BranchOutcome branch_value_budgeted(const BudInfo& u, int a, int b, const std::vector<int>& R,
                                    double e_a, double e_b, const TwoStageOptions& opts) {
  // seed allocation: heavier floors first onto the lighter side
  std::vector<char> seed(R.size(), 0);
  {
    std::vector<size_t> order(R.size());
    std::iota(order.begin(), order.end(), size_t{0});
    auto fv = [&](int c) { return u.nom[c] + u.dev[c] * u.lo[c]; };
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t p, size_t q) { return fv(R[p]) > fv(R[q]); });
    double side_a = fv(a) - e_a, side_b = fv(b) - e_b;
    for (size_t idx : order) {
      if (side_a <= side_b) {
        seed[idx] = 1;
        side_a += fv(R[idx]);
      } else {
        side_b += fv(R[idx]);
      }
    }
  }
  std::vector<std::vector<char>> columns{seed};

  BranchOutcome out;
  for (int iter = 0;; ++iter) {
    MasterOut master = solve_branch_master(u, a, b, R, e_a, e_b, columns);
    if (!master.feasible) return out;  // event cannot happen
    out.value = master.value;
    SubOut sub = solve_branch_sub(u, a, b, R, e_a, e_b, master.revealed);
    if (sub.value >= master.value - opts.tolerance) return out;
    if (std::find(columns.begin(), columns.end(), sub.x) != columns.end()) return out;
    if (static_cast<int>(columns.size()) >= opts.max_columns) {
      out.converged = false;
      return out;
    }
    columns.push_back(std::move(sub.x));
  }
}

// ---------------------------------------------------------------------------
// Discrete branch evaluation: the revealed duration ranges over finitely many
// values, so each candidate is handled by enumerating allocations directly.
// Exact in hundredths; the a-first event is strict on the hundredth grid when
// `strict` is set (ties belong to the complementary branch).
// ---------------------------------------------------------------------------

struct DiscInfo {
  std::vector<std::vector<int64_t>> sc;  // consistent scenarios, hundredths
};

BranchOutcome branch_value_discrete(const DiscInfo& info, int a, int b,
                                    const std::vector<int>& R, int64_t e_a, int64_t e_b,
                                    bool strict) {
  if (R.size() > 16) throw CapacityError("two-stage search supports at most 16 open tasks");
  std::vector<int> branchable;
  for (size_t s = 0; s < info.sc.size(); ++s) {
    int64_t gap = (info.sc[s][b] - e_b) - (info.sc[s][a] - e_a);
    if (gap > 0 || (!strict && gap == 0)) branchable.push_back(static_cast<int>(s));
  }
  BranchOutcome out;
  if (branchable.empty()) return out;

  std::vector<int64_t> candidates;
  for (int s : branchable) candidates.push_back(info.sc[s][a]);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  int64_t best_over_revealed = std::numeric_limits<int64_t>::min();
  for (int64_t revealed : candidates) {
    std::vector<int> group;
    for (int s : branchable)
      if (info.sc[s][a] == revealed) group.push_back(s);
    int64_t best_alloc = std::numeric_limits<int64_t>::max();
    for (uint32_t mask = 0; mask < (1u << R.size()); ++mask) {
      int64_t side1 = 0, side2 = std::numeric_limits<int64_t>::min();
      for (int s : group) {
        int64_t load1 = 0, load2 = 0;
        for (size_t idx = 0; idx < R.size(); ++idx) {
          if (mask & (1u << idx))
            load1 += info.sc[s][R[idx]];
          else
            load2 += info.sc[s][R[idx]];
        }
        side1 = std::max(side1, load1);
        side2 = std::max(side2, load2 + info.sc[s][b]);
      }
      int64_t val = std::max(side1 + revealed - e_a, side2 - e_b);
      best_alloc = std::min(best_alloc, val);
    }
    best_over_revealed = std::max(best_over_revealed, best_alloc);
  }
  out.value = static_cast<double>(best_over_revealed) / 100.0;
  return out;
}

// ---------------------------------------------------------------------------
// Pair scanning shared by the fresh solve and the rolling companion.
// ---------------------------------------------------------------------------

struct PairEval {
  BranchOutcome first_branch, second_branch;
  double value() const { return std::max(first_branch.value, second_branch.value); }
  bool converged() const { return first_branch.converged && second_branch.converged; }
};

class TwoStageCore {
 public:
  TwoStageCore(const UncertaintySet& set, const TwoStageOptions& opts) : opts_(opts) {
    if (set.is_empty()) throw EmptySetError("uncertainty set has no scenario left");
    switch (set.kind()) {
      case SetKind::box: {
        const auto& bd = set.box_data();
        std::vector<double> dev(bd.lower.size());
        for (size_t i = 0; i < dev.size(); ++i) dev[i] = bd.upper[i] - bd.lower[i];
        UncertaintySet emb =
            UncertaintySet::budgeted(bd.lower, dev, static_cast<double>(dev.size()))
                .with_conditioning(set.conditioning());
        bud_ = bud_info(emb);
        discrete_ = false;
        break;
      }
      case SetKind::budgeted:
        bud_ = bud_info(set);
        discrete_ = false;
        break;
      case SetKind::discrete: {
        const auto& sc = set.discrete_data().scenarios;
        for (int s : set.consistent_scenarios()) {
          std::vector<int64_t> row(sc[s].size());
          for (size_t i = 0; i < row.size(); ++i) row[i] = sc[s][i].hundredths();
          disc_.sc.push_back(std::move(row));
        }
        discrete_ = true;
        break;
      }
    }
  }

  // `a` completes first and is revealed; strict event iff `strict`.
  BranchOutcome branch(int a, int b, const std::vector<int>& R, double e_a, double e_b,
                       bool strict) const {
    if (discrete_)
      return branch_value_discrete(disc_, a, b, R, std::llround(e_a * 100.0),
                                   std::llround(e_b * 100.0), strict);
    return branch_value_budgeted(bud_, a, b, R, e_a, e_b, opts_);
  }

  PairEval evaluate_pair(int i, int j, const std::vector<int>& remaining, double e_i,
                         double e_j) const {
    PairEval pe;
    pe.first_branch = branch(i, j, remaining, e_i, e_j, /*strict=*/true);
    pe.second_branch = branch(j, i, remaining, e_j, e_i, /*strict=*/false);
    return pe;
  }

 private:
  TwoStageOptions opts_;
  bool discrete_ = false;
  BudInfo bud_;
  DiscInfo disc_;
};

std::vector<int> without(const std::vector<int>& tasks, int i, int j) {
  std::vector<int> rest;
  for (int t : tasks)
    if (t != i && t != j) rest.push_back(t);
  return rest;
}

TwoStagePlan scan_pairs(const TwoStageCore& core, const std::vector<int>& tasks,
                        int pinned_first, double pinned_elapsed) {
  TwoStagePlan best;
  best.promised = kInf;
  bool found = false;
  auto consider = [&](int i, int j, const PairEval& pe) {
    double v = pe.value();
    if (!found || v < best.promised - kTieTol) {
      found = true;
      best.first = i;
      best.second = j;
      best.first_branch = pe.first_branch.value;
      best.second_branch = pe.second_branch.value;
      best.promised = v;
      best.converged = pe.converged();
    }
  };
  if (pinned_first >= 0) {
    for (int j : tasks) {
      if (j == pinned_first) continue;
      PairEval pe = core.evaluate_pair(pinned_first, j, without(tasks, pinned_first, j),
                                       pinned_elapsed, 0.0);
      consider(pinned_first, j, pe);
    }
  } else {
    for (size_t p = 0; p < tasks.size(); ++p) {
      for (size_t q = p + 1; q < tasks.size(); ++q) {
        int i = tasks[p], j = tasks[q];
        PairEval pe = core.evaluate_pair(i, j, without(tasks, i, j), 0.0, 0.0);
        consider(i, j, pe);
      }
    }
  }
  if (!found) throw InvalidInputError("two-stage plan needs at least two open tasks");
  return best;
}

double worst_single(const UncertaintySet& set, int task) {
  std::vector<double> c(set.dimension(), 0.0);
  c[task] = 1.0;
  return max_linear(set, c).value;
}

}  // namespace

TwoStagePlan solve_2ssa(const UncertaintySet& set, const TwoStageOptions& opts) {
  const int n = set.dimension();
  if (n < 2) throw InvalidInputError("two-stage plan needs at least two tasks");
  TwoStageCore core(set, opts);
  std::vector<int> tasks(n);
  std::iota(tasks.begin(), tasks.end(), 0);
  return scan_pairs(core, tasks, -1, 0.0);
}

PolicyDecision solve_2ssa_next(const UncertaintySet& set, const State& state,
                               const TwoStageOptions& opts) {
  state.validate();
  if (state.m != 2) throw InvalidInputError("the rolling two-stage companion needs two machines");
  if (set.dimension() != state.n)
    throw InvalidInputError("set dimension does not match the state's task count");
  UncertaintySet cond = condition(set, state);
  if (cond.is_empty()) throw EmptySetError("no scenario is consistent with the history");
  const double clock = state.clock.value();
  std::vector<int> unstarted = state.unstarted_tasks();

  PolicyDecision out;
  if (state.running.empty()) {
    if (unstarted.empty()) return {{}, clock};
    if (unstarted.size() == 1) {
      out.batch = unstarted;
      out.promised = clock + worst_single(cond, unstarted[0]);
      return out;
    }
    TwoStageCore core(cond, opts);
    TwoStagePlan plan = scan_pairs(core, unstarted, -1, 0.0);
    out.batch = {std::min(plan.first, plan.second), std::max(plan.first, plan.second)};
    out.promised = clock + plan.promised;
    return out;
  }
  if (state.running.size() == 2 || unstarted.empty()) {
    // Nothing to start: the worst case is each running task finishing as late as
    // the conditioned set allows (machines are independent here).
    double worst = clock;
    for (const RunningTask& r : state.running)
      worst = std::max(worst, clock - r.elapsed.value() + worst_single(cond, r.task));
    if (!unstarted.empty())
      throw InvalidInputError("no idle machine to schedule the remaining tasks");
    return {{}, worst};
  }
  const RunningTask& r = state.running[0];
  TwoStageCore core(cond, opts);
  TwoStagePlan plan = scan_pairs(core, unstarted, r.task, r.elapsed.value());
  // scan_pairs pins `first`; tasks other than `second` stay for the next stage
  out.batch = {plan.second};
  out.promised = clock + plan.promised;
  return out;
}

}  // namespace robsched
