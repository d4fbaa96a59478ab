#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "robsched/adversary_milo.hpp"
#include "robsched/errors.hpp"
#include "robsched/policies.hpp"
#include "robsched/tree.hpp"

namespace robsched {
namespace {

constexpr double kTieTol = 1e-9;

bool scenarios_exact(const UncertaintySet& set) {
  if (set.kind() != SetKind::discrete) return false;
  for (const auto& sc : set.discrete_data().scenarios)
    for (const auto& d : sc)
      if (!d.exact()) return false;
  return true;
}

// Values over exact-hundredth scenarios are hundredth multiples up to accumulated
// floating noise; snapping keeps the two adaptive routes bit-identical.
double snap_hundredths(double v) {
  double snapped = static_cast<double>(std::llround(v * 100.0)) / 100.0;
  if (std::abs(snapped - v) > 1e-6)
    throw NumericalError("value strayed from the hundredth grid");
  return snapped;
}

}  // namespace

PolicyDecision solve_ar_milo(const UncertaintySet& set, const State& state,
                             const ArOptions& opts) {
  state.validate();
  if (set.dimension() != state.n)
    throw InvalidInputError("set dimension does not match the state's task count");
  if (state.is_terminal()) return {{}, state.clock.value()};
  UncertaintySet cond = condition(set, state);
  if (cond.is_empty()) throw EmptySetError("no scenario is consistent with the history");

  ScenarioTree tree = ScenarioTree::build(state, opts.tree_node_limit);
  const bool snap = scenarios_exact(cond);
  const double clock = state.clock.value();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Solves one subtree to optimality, or stops early once its incumbent proves the
  // subtree cannot beat `best_so_far` (reported via `not_better`).
  auto solve_subtree = [&](int sub, double best_so_far, bool& not_better) -> double {
    AdversaryMilo milo = build_adversary_milo(tree, cond, sub);
    SolveOptions so;
    so.node_limit = opts.mip_node_limit;
    so.branch_priority = milo.branch_priority;
    so.start_point = milo.warm_start;
    if (std::isfinite(best_so_far)) so.early_stop_incumbent = best_so_far - kTieTol;
    MipSolution sol = solve_mip(milo.prog, so);
    if (sol.status == SolveStatus::optimal) {
      not_better = false;
      return sol.objective;
    }
    if (sol.status == SolveStatus::limit && std::isfinite(best_so_far) &&
        sol.objective >= best_so_far - kTieTol) {
      not_better = true;
      return sol.objective;
    }
    if (sol.status == SolveStatus::limit)
      throw CapacityError("adaptive solve hit the search limit");
    throw NumericalError("adaptive solve failed: " + status_name(sol.status));
  };

  PolicyDecision out;
  const TreeNode& root = tree.node(0);
  double best = kInf;
  if (root.kind == NodeKind::scheduler) {
    for (int child : root.children) {
      // A cheap fixed-scenario bound often certifies the child cannot improve.
      auto [witness, lower] = best_fixed_scenario(tree, cond, child);
      if (std::isfinite(best) && lower >= best - kTieTol) continue;
      bool not_better = false;
      double v = solve_subtree(child, best, not_better);
      if (not_better) continue;
      if (v < best - kTieTol) {
        best = v;
        out.batch = tree.batch_into(child);
      }
    }
  } else {
    bool not_better = false;
    best = solve_subtree(0, kInf, not_better);
    out.batch = tree.batch_into(0);
  }
  double promised = clock + best;
  out.promised = snap ? snap_hundredths(promised) : promised;
  return out;
}

namespace {

struct RunEntry {
  int task;
  int64_t start;  // absolute hundredths
};

// Backward induction over completion events with exact hundredth arithmetic. States
// carry the scenarios still indistinguishable from the history; at a simultaneous
// completion every argmin finisher is offered to the adversary, so a tie scenario
// supports several observation branches, matching the weak-order route.
class EventDp {
 public:
  EventDp(int m, std::vector<std::vector<int64_t>> scenarios)
      : m_(m), sc_(std::move(scenarios)) {}

  int64_t value(const std::vector<RunEntry>& running, uint32_t unstarted, uint64_t scen,
                int64_t time) {
    if (running.empty() && unstarted == 0) return time;
    std::string key = pack(running, unstarted, scen, time);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    int64_t v;
    int idle = m_ - static_cast<int>(running.size());
    if (idle > 0 && unstarted != 0)
      v = scheduler_move(running, unstarted, scen, time, nullptr);
    else
      v = adversary_move(running, unstarted, scen, time);
    memo_.emplace(std::move(key), v);
    return v;
  }

  // Minimizing move: start min(idle, remaining) tasks; subsets are scanned in
  // ascending lexicographic order and the first strict minimum wins.
  int64_t scheduler_move(const std::vector<RunEntry>& running, uint32_t unstarted,
                         uint64_t scen, int64_t time, std::vector<int>* best_batch) {
    int idle = m_ - static_cast<int>(running.size());
    std::vector<int> pool;
    for (int t = 0; t < 32; ++t)
      if (unstarted & (1u << t)) pool.push_back(t);
    int k = std::min<int>(idle, static_cast<int>(pool.size()));
    int64_t best = std::numeric_limits<int64_t>::max();
    std::vector<int> pick(k);
    auto rec = [&](auto&& self, int pos, int from) -> void {
      if (pos == k) {
        std::vector<RunEntry> next = running;
        uint32_t rest = unstarted;
        for (int idx : pick) {
          next.push_back({pool[idx], time});
          rest &= ~(1u << pool[idx]);
        }
        std::sort(next.begin(), next.end(),
                  [](const RunEntry& a, const RunEntry& b) { return a.task < b.task; });
        int64_t v = value(next, rest, scen, time);
        if (v < best) {
          best = v;
          if (best_batch) {
            best_batch->clear();
            for (int idx : pick) best_batch->push_back(pool[idx]);
          }
        }
        return;
      }
      for (int i = from; i <= static_cast<int>(pool.size()) - (k - pos); ++i) {
        pick[pos] = i;
        self(self, pos + 1, i + 1);
      }
    };
    rec(rec, 0, 0);
    return best;
  }

 private:
  // Maximizing move: group scenarios by (observed finisher, completion time); a
  // scenario joins one group per argmin finisher it admits.
  int64_t adversary_move(const std::vector<RunEntry>& running, uint32_t unstarted,
                         uint64_t scen, int64_t time) {
    (void)time;  // each group's completion time becomes the next clock
    std::map<std::pair<int, int64_t>, uint64_t> groups;  // (running index, tau) -> mask
    for (int s = 0; s < 64; ++s) {
      if (!(scen & (1ull << s))) continue;
      int64_t tau = std::numeric_limits<int64_t>::max();
      for (const RunEntry& r : running)
        tau = std::min(tau, r.start + sc_[s][r.task]);
      for (size_t i = 0; i < running.size(); ++i) {
        if (running[i].start + sc_[s][running[i].task] == tau)
          groups[{static_cast<int>(i), tau}] |= 1ull << s;
      }
    }
    if (groups.empty()) throw NumericalError("no scenario left at an observation");
    int64_t best = std::numeric_limits<int64_t>::min();
    for (const auto& [edge, mask] : groups) {
      std::vector<RunEntry> next = running;
      next.erase(next.begin() + edge.first);
      best = std::max(best, value(next, unstarted, mask, edge.second));
    }
    return best;
  }

  static std::string pack(const std::vector<RunEntry>& running, uint32_t unstarted,
                          uint64_t scen, int64_t time) {
    std::string key;
    key.reserve(16 + running.size() * 12);
    auto put = [&key](const void* p, size_t len) {
      key.append(static_cast<const char*>(p), len);
    };
    put(&unstarted, sizeof unstarted);
    put(&scen, sizeof scen);
    put(&time, sizeof time);
    for (const RunEntry& r : running) {
      put(&r.task, sizeof r.task);
      put(&r.start, sizeof r.start);
    }
    return key;
  }

  int m_;
  std::vector<std::vector<int64_t>> sc_;
  std::map<std::string, int64_t> memo_;
};

}  // namespace

PolicyDecision solve_ar_dp(const UncertaintySet& set, const State& state) {
  state.validate();
  if (set.dimension() != state.n)
    throw InvalidInputError("set dimension does not match the state's task count");
  if (set.kind() != SetKind::discrete)
    throw UnsupportedSetError("event induction needs a discrete set");
  if (state.n > 31) throw CapacityError("event induction supports at most 31 tasks");
  if (state.is_terminal()) return {{}, state.clock.value()};

  UncertaintySet cond = condition(set, state);
  std::vector<int> consistent = cond.consistent_scenarios();
  if (consistent.empty()) throw EmptySetError("no scenario is consistent with the history");
  if (consistent.size() > 64)
    throw CapacityError("event induction supports at most 64 live scenarios");
  const auto& all = cond.discrete_data().scenarios;
  std::vector<std::vector<int64_t>> sc;
  sc.reserve(consistent.size());
  for (int s : consistent) {
    std::vector<int64_t> row(state.n);
    for (int i = 0; i < state.n; ++i) row[i] = all[s][i].hundredths();
    sc.push_back(std::move(row));
  }

  int64_t clock = state.clock.hundredths();
  std::vector<RunEntry> running;
  for (const RunningTask& r : state.running)
    running.push_back({r.task, clock - r.elapsed.hundredths()});
  uint32_t unstarted = 0;
  for (int t : state.unstarted_tasks()) unstarted |= 1u << t;
  uint64_t scen = consistent.size() == 64 ? ~0ull : (1ull << consistent.size()) - 1;

  EventDp dp(state.m, std::move(sc));
  PolicyDecision out;
  int64_t best;
  if (state.idle_machines() > 0 && unstarted != 0)
    best = dp.scheduler_move(running, unstarted, scen, clock, &out.batch);
  else
    best = dp.value(running, unstarted, scen, clock);
  out.promised = static_cast<double>(best) / 100.0;
  return out;
}

}  // namespace robsched
