#include "robsched/model.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "robsched/errors.hpp"

namespace robsched {

State State::initial(int n, int m) {
  if (m < 2 || n <= m)
    throw InvalidInputError("need 2 <= m < n, got n=" + std::to_string(n) +
                            " m=" + std::to_string(m));
  State s;
  s.n = n;
  s.m = m;
  return s;
}

bool State::is_started(int task) const {
  return std::find(started_order.begin(), started_order.end(), task) != started_order.end();
}

bool State::is_finished(int task) const {
  return std::find(finished_order.begin(), finished_order.end(), task) != finished_order.end();
}

bool State::is_running(int task) const {
  for (const auto& r : running)
    if (r.task == task) return true;
  return false;
}

std::vector<int> State::unstarted_tasks() const {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!is_started(i)) out.push_back(i);
  return out;
}

const RunningTask& State::running_entry(int task) const {
  for (const auto& r : running)
    if (r.task == task) return r;
  throw InvalidInputError("task " + std::to_string(task) + " is not running");
}

void State::validate() const {
  if (m < 2 || n <= m) throw InvalidInputError("state: need 2 <= m < n");
  if (finished_order.size() != finished_durations.size())
    throw InvalidInputError("state: finish order and durations disagree");
  if (static_cast<int>(running.size()) > m) throw InvalidInputError("state: too many running tasks");
  std::set<int> started(started_order.begin(), started_order.end());
  if (started.size() != started_order.size()) throw InvalidInputError("state: duplicate start");
  std::set<int> done(finished_order.begin(), finished_order.end());
  if (done.size() != finished_order.size()) throw InvalidInputError("state: duplicate finish");
  std::set<int> run;
  for (const auto& r : running) {
    run.insert(r.task);
    if (r.elapsed > clock) throw InvalidInputError("state: elapsed exceeds clock");
    if (Duration::zero() > r.elapsed) throw InvalidInputError("state: negative elapsed");
  }
  if (run.size() != running.size()) throw InvalidInputError("state: duplicate running task");
  for (int t : started_order) {
    if (t < 0 || t >= n) throw InvalidInputError("state: task id out of range");
    if (!done.count(t) && !run.count(t))
      throw InvalidInputError("state: started task neither running nor finished");
  }
  for (int t : finished_order)
    if (!started.count(t)) throw InvalidInputError("state: finished task never started");
  for (const auto& r : running)
    if (!started.count(r.task)) throw InvalidInputError("state: running task never started");
  if (done.size() + run.size() != started.size())
    throw InvalidInputError("state: start/finish/run bookkeeping broken");
  for (size_t i = 1; i < running.size(); ++i)
    if (running[i - 1].task >= running[i].task)
      throw InvalidInputError("state: running tasks not sorted");
}

std::ostream& operator<<(std::ostream& os, const State& s) {
  os << "S=[";
  for (size_t i = 0; i < s.started_order.size(); ++i)
    os << (i ? "," : "") << s.started_order[i] + 1;
  os << "] F=[";
  for (size_t i = 0; i < s.finished_order.size(); ++i)
    os << (i ? "," : "") << s.finished_order[i] + 1;
  os << "] D=[";
  for (size_t i = 0; i < s.finished_durations.size(); ++i)
    os << (i ? "," : "") << s.finished_durations[i].str();
  os << "] I=[";
  for (size_t i = 0; i < s.running.size(); ++i)
    os << (i ? "," : "") << s.running[i].task + 1 << "@" << s.running[i].elapsed.str();
  os << "] t=" << s.clock.str();
  return os;
}

State advance_state(const State& s, int finished_task, Duration completion_time) {
  if (completion_time < s.clock)
    throw InvalidInputError("advance_state: completion before current clock");
  if (!s.is_running(finished_task))
    throw InvalidInputError("advance_state: task not running");
  Duration step = completion_time - s.clock;
  State out = s;
  out.running.clear();
  for (const auto& r : s.running) {
    if (r.task == finished_task) {
      out.finished_order.push_back(r.task);
      out.finished_durations.push_back(r.elapsed + step);
    } else {
      out.running.push_back({r.task, r.elapsed + step});
    }
  }
  out.clock = completion_time;
  return out;
}

State start_tasks(const State& s, const std::vector<int>& tasks) {
  if (static_cast<int>(tasks.size()) > s.idle_machines())
    throw InvalidInputError("start_tasks: not enough idle machines");
  std::vector<int> batch = tasks;
  std::sort(batch.begin(), batch.end());
  State out = s;
  for (int t : batch) {
    if (t < 0 || t >= s.n || s.is_started(t))
      throw InvalidInputError("start_tasks: task unavailable");
    out.started_order.push_back(t);
    out.running.push_back({t, Duration::zero()});
  }
  std::sort(out.running.begin(), out.running.end(),
            [](const RunningTask& a, const RunningTask& b) { return a.task < b.task; });
  return out;
}

Partition canonicalize(const Partition& p, int n) {
  int m = static_cast<int>(p.machines.size());
  std::vector<int> label_of(n, -1);
  for (int j = 0; j < m; ++j)
    for (int t : p.machines[j]) {
      if (t < 0 || t >= n || label_of[t] != -1)
        throw InvalidInputError("canonicalize: bad partition");
      label_of[t] = j;
    }
  std::vector<int> relabel(m, -1);
  int next = 0;
  for (int t = 0; t < n; ++t) {
    if (label_of[t] >= 0 && relabel[label_of[t]] == -1) relabel[label_of[t]] = next++;
  }
  for (int j = 0; j < m; ++j)
    if (relabel[j] == -1) relabel[j] = next++;
  Partition out;
  out.machines.assign(m, {});
  for (int t = 0; t < n; ++t)
    if (label_of[t] >= 0) out.machines[relabel[label_of[t]]].push_back(t);
  for (auto& mach : out.machines) std::sort(mach.begin(), mach.end());
  return out;
}

Duration evaluate_partition(const Partition& p, const DurationVec& d,
                            const DurationVec& offsets) {
  if (!offsets.empty() && offsets.size() != p.machines.size())
    throw InvalidInputError("evaluate_partition: offsets size mismatch");
  Duration best = Duration::zero();
  bool first = true;
  for (size_t j = 0; j < p.machines.size(); ++j) {
    Duration load = offsets.empty() ? Duration::zero() : offsets[j];
    for (int t : p.machines[j]) {
      if (t < 0 || t >= static_cast<int>(d.size()))
        throw InvalidInputError("evaluate_partition: task id out of range");
      load += d[t];
    }
    if (first || best < load) best = load;
    first = false;
  }
  return best;
}

namespace {

struct Slot {
  Duration free_at;
  int current = -1;  // running task, -1 if idle
};

// Shared event loop: slots seeded with (possibly) running tasks, `order` feeds idle slots.
ListSimResult run_list(std::vector<Slot> slots, const std::vector<int>& order,
                       const DurationVec& d, Duration now,
                       std::vector<std::vector<int>> assignment) {
  size_t next = 0;
  // fill idle slots immediately
  for (size_t j = 0; j < slots.size(); ++j) {
    if (slots[j].current == -1 && next < order.size()) {
      slots[j].current = order[next++];
      slots[j].free_at = now + d[slots[j].current];
      assignment[j].push_back(slots[j].current);
    }
  }
  Duration makespan = now;
  while (true) {
    int arg = -1;
    for (size_t j = 0; j < slots.size(); ++j) {
      if (slots[j].current == -1) continue;
      if (arg == -1 || slots[j].free_at < slots[arg].free_at ||
          (slots[j].free_at == slots[arg].free_at &&
           slots[j].current < slots[arg].current))
        arg = static_cast<int>(j);
    }
    if (arg == -1) break;
    Duration t = slots[arg].free_at;
    if (makespan < t) makespan = t;
    if (next < order.size()) {
      slots[arg].current = order[next++];
      slots[arg].free_at = t + d[slots[arg].current];
      assignment[arg].push_back(slots[arg].current);
    } else {
      slots[arg].current = -1;
    }
  }
  Partition out;
  out.machines = std::move(assignment);
  return {makespan, out};
}

}  // namespace

ListSimResult simulate_list(const Permutation& pi, const DurationVec& d, int m) {
  if (m < 1) throw InvalidInputError("simulate_list: need at least one machine");
  std::vector<bool> seen(d.size(), false);
  for (int t : pi.order) {
    if (t < 0 || t >= static_cast<int>(d.size()) || seen[t])
      throw InvalidInputError("simulate_list: order is not a permutation");
    seen[t] = true;
  }
  if (pi.order.size() != d.size())
    throw InvalidInputError("simulate_list: order and durations disagree");
  std::vector<Slot> slots(m);
  return run_list(std::move(slots), pi.order, d, Duration::zero(),
                  std::vector<std::vector<int>>(m));
}

ListSimResult simulate_list_from_state(const State& s, const std::vector<int>& order,
                                       const DurationVec& d) {
  if (static_cast<int>(d.size()) != s.n)
    throw InvalidInputError("simulate_list_from_state: duration size mismatch");
  auto unstarted = s.unstarted_tasks();
  if (order.size() != unstarted.size())
    throw InvalidInputError("simulate_list_from_state: order must rank unstarted tasks");
  for (int t : order)
    if (s.is_started(t)) throw InvalidInputError("simulate_list_from_state: task already started");
  std::vector<Slot> slots;
  std::vector<std::vector<int>> assignment;
  for (const auto& r : s.running) {
    Duration remaining = d[r.task] - r.elapsed;
    if (remaining < Duration::zero())
      throw InvalidInputError("simulate_list_from_state: realized duration below elapsed");
    slots.push_back({s.clock + remaining, r.task});
    assignment.push_back({r.task});
  }
  while (static_cast<int>(slots.size()) < s.m) {
    slots.push_back({s.clock, -1});
    assignment.push_back({});
  }
  auto res = run_list(std::move(slots), order, d, s.clock, std::move(assignment));
  if (res.makespan < s.clock) res.makespan = s.clock;
  return res;
}

}  // namespace robsched
