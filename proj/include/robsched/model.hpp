#pragma once
#include <iosfwd>
#include <vector>

#include "robsched/duration.hpp"

namespace robsched {

// Ordered partition of task ids onto machines; machines[j] lists the tasks machine j
// processes, in processing order.
struct Partition {
  std::vector<std::vector<int>> machines;
};

// Priority order over tasks: whenever a machine is idle, the earliest unstarted task
// in `order` begins on it.
struct Permutation {
  std::vector<int> order;
};

struct RunningTask {
  int task;
  Duration elapsed;  // processing time already spent on this task
};

// Execution state of a schedule in progress. Tracks the start order, the finish order
// with realized durations, the currently running tasks with their elapsed processing
// times, and the wall clock. Together these determine what any policy may still decide
// and what the adversary may still choose.
struct State {
  int n = 0;
  int m = 0;
  std::vector<int> started_order;    // tasks in the order they started
  std::vector<int> finished_order;   // tasks in the order they finished
  DurationVec finished_durations;    // realized durations, aligned with finished_order
  std::vector<RunningTask> running;  // sorted by task id
  Duration clock;

  static State initial(int n, int m);

  bool is_started(int task) const;
  bool is_finished(int task) const;
  bool is_running(int task) const;
  bool is_terminal() const { return static_cast<int>(finished_order.size()) == n; }
  int idle_machines() const { return m - static_cast<int>(running.size()); }
  std::vector<int> unstarted_tasks() const;  // ascending
  const RunningTask& running_entry(int task) const;

  void validate() const;  // throws InvalidInputError on inconsistency
};

std::ostream& operator<<(std::ostream& os, const State& s);

// Advances the clock to `completion_time` and records that `finished_task` (which must
// be running) completed then. Elapsed times of other running tasks grow by the step.
State advance_state(const State& s, int finished_task, Duration completion_time);

// Starts the given unstarted tasks now (they must fit on idle machines). Tasks are
// appended to the start order in ascending id order.
State start_tasks(const State& s, const std::vector<int>& tasks);

// Worst task id ordering issues aside, machine labels carry no meaning; this relabels
// machines by first appearance over task ids 0..n-1 and sorts tasks within machines,
// yielding the lexicographically minimal representative. Empty machines go last.
Partition canonicalize(const Partition& p, int n);

// max over machines of (offset_j + sum of d over machine j's tasks); offsets default 0.
Duration evaluate_partition(const Partition& p, const DurationVec& d,
                            const DurationVec& offsets = {});

struct ListSimResult {
  Duration makespan;
  Partition assignment;
};

// Runs the priority-list schedule on m machines under realized durations d.
// Simultaneous completions are resolved lowest-task-id-first.
ListSimResult simulate_list(const Permutation& pi, const DurationVec& d, int m);

// Continues a list schedule from a mid-execution state: running tasks keep their
// machines (slots ordered by task id, idle slots after them), `order` ranks the
// unstarted tasks. Returns the absolute makespan and the remaining-work assignment.
ListSimResult simulate_list_from_state(const State& s, const std::vector<int>& order,
                                       const DurationVec& d);

}  // namespace robsched
