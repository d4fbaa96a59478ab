#pragma once
#include <vector>

#include "robsched/model.hpp"
#include "robsched/uncertainty.hpp"

namespace robsched {

// A policy's move at a decision state: the tasks to start now (ascending ids) and the
// worst-case absolute makespan guaranteed given the history behind the state.
struct PolicyDecision {
  std::vector<int> batch;
  double promised = 0.0;
};

// Pins a task to a machine before the allocation is chosen (a task already running
// there, or a prior commitment); its duration coordinate still varies with the set.
struct ForcedAssignment {
  int task = 0;
  int machine = 0;
};

struct SaResult {
  Partition partition;  // machines aligned with `offsets`; tasks ascending within each
  double value = 0.0;   // worst case over the set of the longest machine completion
};

// Minimizes, over assignments of `tasks` onto m machines, the worst case of
// max_j (offsets[j] + sum of d over machine j's tasks, pinned tasks included).
// `offsets` defaults to all-zero, `tasks` to every coordinate of `set` not pinned.
// Two-machine problems up to 20 tasks (and up-to-5-machine problems up to 10 tasks)
// are scanned with machine-symmetry and incumbent pruning, keeping the first argmin
// task by task: ties prefer assignments that put earlier tasks on earlier machines.
// Larger problems go through an assignment program with the inner maximum dualized,
// which returns a deterministic optimum without the tie ordering.
SaResult solve_sa(const UncertaintySet& set, int m, std::vector<double> offsets = {},
                  std::vector<int> tasks = {}, std::vector<ForcedAssignment> forced = {});

struct SlResult {
  Permutation order;   // over the unstarted tasks of the state
  double value = 0.0;  // worst-case absolute makespan over consistent scenarios
};

// Enumerates priority lists over the unstarted tasks of `state`, replays each against
// every scenario consistent with the state's history, and returns the
// lexicographically first list minimizing the worst case. Discrete sets only
// (continuous sets would need an adversary optimization per list); at most 8
// unstarted tasks.
SlResult solve_sl(const UncertaintySet& set, const State& state);

struct PhResult {
  Partition partition;
  double makespan = 0.0;
};

// Exact minimum makespan for fully known durations: branch-and-bound over assignments
// with the same earlier-tasks-on-earlier-machines tie rule. n <= 24 for two machines,
// n <= 10 otherwise.
PhResult solve_ph(const std::vector<double>& d, int m);

struct ArOptions {
  long tree_node_limit = 10000000;
  long mip_node_limit = 1000000;
};

// Exact adaptive value via per-opening adversary programs: conditions `set` on
// `state`, builds the decision/observation tree, and solves one maximization per
// opening batch, seeding each with its best fixed scenario and stopping early once a
// batch is provably no better than the incumbent. Returns the first optimal batch in
// lexicographic order and the worst-case remaining makespan.
PolicyDecision solve_ar_milo(const UncertaintySet& set, const State& state,
                             const ArOptions& opts = {});

// Same value by backward induction over completion events, exact in hundredths.
// Discrete sets with at most 64 scenarios only. At a simultaneous completion the
// adversary chooses which task is observed to finish first, matching the weak
// order constraints of the observation-tree route.
PolicyDecision solve_ar_dp(const UncertaintySet& set, const State& state);

struct TwoStagePlan {
  int first = -1;              // started on machine 1 (or already running)
  int second = -1;             // started on machine 2
  double first_branch = 0.0;   // worst case when `first` is observed to complete first
  double second_branch = 0.0;  // worst case when `second` is; -inf for an empty event
  double promised = 0.0;       // max of the branch values
  bool converged = true;       // false when a branch hit the column cap
};

struct TwoStageOptions {
  int max_columns = 100;
  double tolerance = 1e-6;
};

// Two machines only. Picks the pair started first; once either completes, the
// remaining tasks receive a static allocation that may depend on the observed
// duration. Each pair and completion-order branch is solved by column-and-constraint
// generation: the master maximizes the makespan over one duration vector per known
// allocation (coupled through the revealed coordinate), the subproblem searches for a
// better allocation with the inner worst case dualized (budgeted) or enumerated
// (discrete). Pairs are scanned lexicographically; box sets are embedded as budgeted
// sets with a full budget.
TwoStagePlan solve_2ssa(const UncertaintySet& set, const TwoStageOptions& opts = {});

// Rolling-horizon companion: with one task running, chooses the task to start now by
// re-solving the two-stage plan with the running task pinned as `first` (its elapsed
// time shortens the first branch event); with an empty machine pair it reduces to
// solve_2ssa. Returns the single-task batch and the plan value.
PolicyDecision solve_2ssa_next(const UncertaintySet& set, const State& state,
                               const TwoStageOptions& opts = {});

}  // namespace robsched
