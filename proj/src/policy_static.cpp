#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "robsched/errors.hpp"
#include "robsched/mip.hpp"
#include "robsched/policies.hpp"

namespace robsched {
namespace {

constexpr double kTieTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Worst case over the set of one machine's assigned-duration sum, maintained
// incrementally as the scan adds and removes tasks. Machines are independent:
// max over the set of a max over machines equals the max of per-machine maxima,
// so each machine may use its own worst scenario.
class WorstLoad {
 public:
  WorstLoad(const UncertaintySet& set, int machines) : set_(&set), m_(machines) {
    const int n = set.dimension();
    switch (set.kind()) {
      case SetKind::box: {
        hi_.resize(n);
        for (int i = 0; i < n; ++i) {
          double lo = 0.0;
          set.coordinate_range(i, lo, hi_[i]);
        }
        box_sum_.assign(m_, 0.0);
        break;
      }
      case SetKind::budgeted: {
        const auto& bd = set.budgeted_data();
        bb_ = set.budget_box();
        if (!bb_.feasible) throw EmptySetError("budgeted set has no scenario left");
        slack_ = bb_.budget - std::accumulate(bb_.lo.begin(), bb_.lo.end(), 0.0);
        slack_ = std::max(slack_, 0.0);
        floor_val_.resize(n);
        gain_cap_.resize(n);
        for (int i = 0; i < n; ++i) {
          floor_val_[i] = bd.nominal[i] + bd.deviation[i] * bb_.lo[i];
          gain_cap_[i] = bb_.hi[i] - bb_.lo[i];
        }
        dev_order_.resize(n);
        std::iota(dev_order_.begin(), dev_order_.end(), 0);
        std::stable_sort(dev_order_.begin(), dev_order_.end(),
                         [&](int a, int b) { return bd.deviation[a] > bd.deviation[b]; });
        member_.assign(m_, std::vector<char>(n, 0));
        floor_sum_.assign(m_, 0.0);
        break;
      }
      case SetKind::discrete: {
        const auto& sc = set.discrete_data().scenarios;
        for (int s : set.consistent_scenarios()) scen_.push_back(to_doubles(sc[s]));
        if (scen_.empty()) throw EmptySetError("discrete set has no scenario left");
        scen_sum_.assign(m_, std::vector<double>(scen_.size(), 0.0));
        break;
      }
    }
  }

  void add(int task, int machine) { bump(task, machine, +1.0); }
  void remove(int task, int machine) { bump(task, machine, -1.0); }

  double value(int machine) const {
    switch (set_->kind()) {
      case SetKind::box:
        return box_sum_[machine];
      case SetKind::budgeted: {
        // Raise u above its floor greedily by descending deviation; coordinates off
        // this machine stay at their floors, so only the global slack is shared.
        double v = floor_sum_[machine];
        double left = slack_;
        const auto& dev = set_->budgeted_data().deviation;
        for (int i : dev_order_) {
          if (left <= 0.0) break;
          if (!member_[machine][i]) continue;
          double step = std::min(left, gain_cap_[i]);
          v += dev[i] * step;
          left -= step;
        }
        return v;
      }
      case SetKind::discrete: {
        const auto& sums = scen_sum_[machine];
        return *std::max_element(sums.begin(), sums.end());
      }
    }
    return 0.0;
  }

 private:
  void bump(int task, int machine, double sign) {
    switch (set_->kind()) {
      case SetKind::box:
        box_sum_[machine] += sign * hi_[task];
        break;
      case SetKind::budgeted:
        floor_sum_[machine] += sign * floor_val_[task];
        member_[machine][task] = sign > 0.0 ? 1 : 0;
        break;
      case SetKind::discrete:
        for (size_t s = 0; s < scen_.size(); ++s)
          scen_sum_[machine][s] += sign * scen_[s][task];
        break;
    }
  }

  const UncertaintySet* set_;
  int m_;
  std::vector<double> hi_, box_sum_;
  BudgetBox bb_;
  double slack_ = 0.0;
  std::vector<double> floor_val_, gain_cap_, floor_sum_;
  std::vector<int> dev_order_;
  std::vector<std::vector<char>> member_;
  std::vector<std::vector<double>> scen_;
  std::vector<std::vector<double>> scen_sum_;
};

// Canonical machine labeling of an assignment for tie comparison: when machines are
// interchangeable, labels are renumbered by first appearance over ascending task id.
std::vector<int> tie_key(const std::vector<int>& tasks, const std::vector<int>& assign_of,
                         bool relabel) {
  std::vector<int> key;
  key.reserve(tasks.size());
  if (!relabel) {
    for (int t : tasks) key.push_back(assign_of[t]);
    return key;
  }
  std::vector<int> label(assign_of.size(), -1);
  int next = 0;
  for (int t : tasks) {
    int j = assign_of[t];
    if (label[j] < 0) label[j] = next++;
    key.push_back(label[j]);
  }
  return key;
}

struct ScanResult {
  std::vector<int> assign_of;  // task id -> machine
  double value = kInf;
  long leaves = 0;
};

// Depth-first scan over machine assignments of `order` (a task visit order chosen for
// pruning power). Keeps the first argmin under the task-by-task tie rule; prunes
// subtrees that are already strictly worse than the incumbent (partial worst-case
// loads only grow, so ties survive pruning and the tie rule stays exact).
ScanResult scan_assignments(const std::vector<int>& tasks, const std::vector<int>& order,
                            int m, const std::vector<double>& offsets, bool interchangeable,
                            WorstLoad& eval, double seed_value) {
  const int k = static_cast<int>(order.size());
  int max_task = 0;
  for (int t : tasks) max_task = std::max(max_task, t);
  std::vector<int> assign_of(max_task + 1, -1);

  ScanResult best;
  best.value = seed_value;
  std::vector<int> best_key;

  std::vector<double> machine_val(m);
  for (int j = 0; j < m; ++j) machine_val[j] = offsets[j] + eval.value(j);
  double root_max = *std::max_element(machine_val.begin(), machine_val.end());

  auto consider_leaf = [&](double value) {
    ++best.leaves;
    if (value < best.value - kTieTol) {
      best.value = value;
      best.assign_of = assign_of;
      best_key = tie_key(tasks, assign_of, interchangeable);
      return;
    }
    if (value >= best.value + kTieTol) return;
    std::vector<int> key = tie_key(tasks, assign_of, interchangeable);
    if (best.assign_of.empty() || key < best_key) {
      best.value = std::min(best.value, value);
      best.assign_of = assign_of;
      best_key = std::move(key);
    }
  };

  // used = machines already holding a scanned task; under interchangeability a new
  // task may open at most one fresh machine, which removes label symmetry.
  auto dfs = [&](auto&& self, int pos, int used, double cur_max) -> void {
    if (pos == k) {
      consider_leaf(cur_max);
      return;
    }
    int t = order[pos];
    int limit = interchangeable ? std::min(m - 1, used) : m - 1;
    for (int j = 0; j <= limit; ++j) {
      eval.add(t, j);
      double vj = offsets[j] + eval.value(j);
      double next_max = std::max(cur_max, vj);
      if (next_max < best.value + kTieTol) {
        assign_of[t] = j;
        self(self, pos + 1, std::max(used, j + 1), next_max);
        assign_of[t] = -1;
      }
      eval.remove(t, j);
    }
  };
  dfs(dfs, 0, 0, root_max);
  if (best.assign_of.empty() && std::isfinite(best.value))
    throw NumericalError("assignment scan lost its incumbent");
  return best;
}

// Greedy seed: place each task on the machine whose worst case grows least. The value
// is a valid incumbent; the scan still owns the argmin so tie ordering is preserved.
double greedy_seed(const std::vector<int>& order, int m, const std::vector<double>& offsets,
                   WorstLoad& eval) {
  std::vector<double> machine_val(m);
  for (int j = 0; j < m; ++j) machine_val[j] = offsets[j] + eval.value(j);
  std::vector<std::pair<int, int>> placed;
  for (int t : order) {
    int arg = 0;
    double best_v = kInf;
    for (int j = 0; j < m; ++j) {
      eval.add(t, j);
      double vj = offsets[j] + eval.value(j);
      eval.remove(t, j);
      if (vj < best_v - kTieTol) {
        best_v = vj;
        arg = j;
      }
    }
    eval.add(t, arg);
    machine_val[arg] = best_v;
    placed.emplace_back(t, arg);
  }
  double value = *std::max_element(machine_val.begin(), machine_val.end());
  for (auto& [t, j] : placed) eval.remove(t, j);
  return value;
}

void validate_offsets(const std::vector<double>& offsets) {
  for (double o : offsets) {
    if (!std::isfinite(o) || o < 0.0)
      throw InvalidInputError("machine offsets must be finite and nonnegative");
  }
}

Partition partition_from_assign(const std::vector<int>& tasks,
                                const std::vector<ForcedAssignment>& forced,
                                const std::vector<int>& assign_of, int m, bool relabel) {
  Partition p;
  p.machines.assign(m, {});
  for (const auto& f : forced) p.machines[f.machine].push_back(f.task);
  for (int t : tasks) p.machines[assign_of[t]].push_back(t);
  for (auto& mach : p.machines) std::sort(mach.begin(), mach.end());
  if (relabel) {
    std::stable_sort(p.machines.begin(), p.machines.end(),
                     [](const std::vector<int>& a, const std::vector<int>& b) {
                       if (a.empty() || b.empty()) return b.empty() && !a.empty();
                       return a[0] < b[0];
                     });
  }
  return p;
}

// Assignment program with the per-machine inner maximum made explicit: box sets use
// upper bounds directly, discrete sets one row per (machine, scenario), budgeted sets
// the dual of the budget-constrained deviation maximum, which stays linear because
// the deviation coefficients are linear in the assignment binaries.
SaResult solve_sa_program(const UncertaintySet& set, int m, const std::vector<double>& offsets,
                          const std::vector<int>& tasks,
                          const std::vector<ForcedAssignment>& forced, bool relabel) {
  MixedIntegerProgram prog;
  prog.maximize = false;
  const int k = static_cast<int>(tasks.size());
  std::vector<std::vector<int>> x(k, std::vector<int>(m));
  for (int a = 0; a < k; ++a)
    for (int j = 0; j < m; ++j) {
      // with interchangeable machines, task a may open at most machine a (first-
      // appearance labeling), which removes the label symmetry from the search
      double ub = relabel && j > a ? 0.0 : 1.0;
      x[a][j] = prog.add_var("x_" + std::to_string(tasks[a]) + "_" + std::to_string(j), 0.0, ub,
                             0.0, true);
    }
  int T = prog.add_var("T", 0.0, kInf, 1.0, false);
  for (int a = 0; a < k; ++a) {
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < m; ++j) row.emplace_back(x[a][j], 1.0);
    prog.add_row(std::move(row), Relation::eq, 1.0, "assign_" + std::to_string(tasks[a]));
  }
  std::vector<std::vector<int>> forced_on(m);
  for (const auto& f : forced) forced_on[f.machine].push_back(f.task);

  switch (set.kind()) {
    case SetKind::box: {
      std::vector<double> hi(set.dimension());
      for (int i = 0; i < set.dimension(); ++i) {
        double lo = 0.0;
        set.coordinate_range(i, lo, hi[i]);
      }
      for (int j = 0; j < m; ++j) {
        double base = offsets[j];
        for (int f : forced_on[j]) base += hi[f];
        std::vector<std::pair<int, double>> row;
        for (int a = 0; a < k; ++a) row.emplace_back(x[a][j], hi[tasks[a]]);
        row.emplace_back(T, -1.0);
        prog.add_row(std::move(row), Relation::le, -base, "load_" + std::to_string(j));
      }
      break;
    }
    case SetKind::discrete: {
      const auto& sc = set.discrete_data().scenarios;
      auto consistent = set.consistent_scenarios();
      for (int j = 0; j < m; ++j) {
        for (int s : consistent) {
          double base = offsets[j];
          for (int f : forced_on[j]) base += sc[s][f].value();
          std::vector<std::pair<int, double>> row;
          for (int a = 0; a < k; ++a) row.emplace_back(x[a][j], sc[s][tasks[a]].value());
          row.emplace_back(T, -1.0);
          prog.add_row(std::move(row), Relation::le, -base,
                       "load_" + std::to_string(j) + "_s" + std::to_string(s));
        }
      }
      break;
    }
    case SetKind::budgeted: {
      const auto& bd = set.budgeted_data();
      BudgetBox bb = set.budget_box();
      double slack = bb.budget - std::accumulate(bb.lo.begin(), bb.lo.end(), 0.0);
      slack = std::max(slack, 0.0);
      auto floor_val = [&](int i) { return bd.nominal[i] + bd.deviation[i] * bb.lo[i]; };
      auto gain_cap = [&](int i) { return bb.hi[i] - bb.lo[i]; };
      for (int j = 0; j < m; ++j) {
        // Dual of max { sum dev_i w_i over machine j's tasks : 0 <= w_i <= cap_i,
        // sum w <= slack }: min slack*theta + sum cap_i*pi_i with theta + pi_i >= c_i.
        int theta = prog.add_var("theta_" + std::to_string(j), 0.0, kInf, 0.0, false);
        double base = offsets[j];
        std::vector<std::pair<int, double>> load;
        load.emplace_back(theta, slack);
        for (int f : forced_on[j]) {
          base += floor_val(f);
          if (gain_cap(f) > 0.0 && bd.deviation[f] > 0.0) {
            int pi = prog.add_var("pi_" + std::to_string(f) + "_" + std::to_string(j), 0.0, kInf,
                                  0.0, false);
            load.emplace_back(pi, gain_cap(f));
            prog.add_row({{theta, 1.0}, {pi, 1.0}}, Relation::ge, bd.deviation[f],
                         "dual_f" + std::to_string(f) + "_" + std::to_string(j));
          }
        }
        for (int a = 0; a < k; ++a) {
          int t = tasks[a];
          load.emplace_back(x[a][j], floor_val(t));
          if (gain_cap(t) > 0.0 && bd.deviation[t] > 0.0) {
            int pi = prog.add_var("pi_" + std::to_string(t) + "_" + std::to_string(j), 0.0, kInf,
                                  0.0, false);
            load.emplace_back(pi, gain_cap(t));
            prog.add_row({{theta, 1.0}, {pi, 1.0}, {x[a][j], -bd.deviation[t]}}, Relation::ge,
                         0.0, "dual_" + std::to_string(t) + "_" + std::to_string(j));
          }
        }
        load.emplace_back(T, -1.0);
        prog.add_row(std::move(load), Relation::le, -base, "load_" + std::to_string(j));
      }
      break;
    }
  }

  SolveOptions opts;
  opts.branch_priority.assign(prog.num_vars(), 0);
  for (int a = 0; a < k; ++a)
    for (int j = 0; j < m; ++j) opts.branch_priority[x[a][j]] = k - a;
  MipSolution sol = solve_mip(prog, opts);
  if (sol.status == SolveStatus::limit)
    throw CapacityError("static allocation program hit the search limit");
  if (sol.status != SolveStatus::optimal)
    throw NumericalError("static allocation program failed: " + status_name(sol.status));

  std::vector<int> assign_of(set.dimension(), -1);
  for (int a = 0; a < k; ++a) {
    for (int j = 0; j < m; ++j)
      if (sol.x[x[a][j]] > 0.5) assign_of[tasks[a]] = j;
  }
  SaResult res;
  res.partition = partition_from_assign(tasks, forced, assign_of, m, relabel);
  res.value = sol.objective;
  return res;
}

}  // namespace

SaResult solve_sa(const UncertaintySet& set, int m, std::vector<double> offsets,
                  std::vector<int> tasks, std::vector<ForcedAssignment> forced) {
  const int n = set.dimension();
  if (n <= 0) throw InvalidInputError("uncertainty set has no coordinates");
  if (m < 1) throw InvalidInputError("need at least one machine");
  if (offsets.empty()) offsets.assign(m, 0.0);
  if (static_cast<int>(offsets.size()) != m)
    throw InvalidInputError("offsets must have one entry per machine");
  validate_offsets(offsets);

  std::vector<char> pinned(n, 0);
  for (const auto& f : forced) {
    if (f.task < 0 || f.task >= n) throw InvalidInputError("pinned task out of range");
    if (f.machine < 0 || f.machine >= m) throw InvalidInputError("pinned machine out of range");
    if (pinned[f.task]) throw InvalidInputError("task pinned twice");
    pinned[f.task] = 1;
  }
  if (tasks.empty()) {
    for (int i = 0; i < n; ++i)
      if (!pinned[i]) tasks.push_back(i);
  }
  std::sort(tasks.begin(), tasks.end());
  for (size_t a = 0; a < tasks.size(); ++a) {
    int t = tasks[a];
    if (t < 0 || t >= n) throw InvalidInputError("task out of range");
    if (a > 0 && tasks[a - 1] == t) throw InvalidInputError("duplicate task");
    if (pinned[t]) throw InvalidInputError("task both free and pinned");
  }
  if (set.is_empty()) throw EmptySetError("uncertainty set has no scenario left");

  bool equal_offsets = std::all_of(offsets.begin(), offsets.end(),
                                   [&](double o) { return o == offsets[0]; });
  bool interchangeable = equal_offsets && forced.empty();
  const int k = static_cast<int>(tasks.size());

  bool scan = (m == 2 && k <= 20) || (m >= 3 && m <= 5 && k <= 10) || m == 1 || k <= 2;
  if (!scan) return solve_sa_program(set, m, offsets, tasks, forced, interchangeable);

  WorstLoad eval(set, m);
  for (const auto& f : forced) eval.add(f.task, f.machine);

  // Visit heavier tasks first: their placement constrains the worst case most.
  std::vector<int> order = tasks;
  std::vector<double> solo(n, 0.0);
  for (int t : tasks) {
    eval.add(t, 0);
    solo[t] = eval.value(0);
    eval.remove(t, 0);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return solo[a] > solo[b]; });

  double seed = greedy_seed(order, m, offsets, eval);
  ScanResult best = scan_assignments(tasks, order, m, offsets, interchangeable, eval, seed);

  SaResult res;
  res.partition = partition_from_assign(tasks, forced, best.assign_of, m, interchangeable);
  res.value = best.value;
  return res;
}

PhResult solve_ph(const std::vector<double>& d, int m) {
  const int n = static_cast<int>(d.size());
  if (n < 1) throw InvalidInputError("need at least one task");
  if (m < 1) throw InvalidInputError("need at least one machine");
  for (double v : d) {
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidInputError("durations must be finite and nonnegative");
  }
  if (m >= n) {
    PhResult res;
    res.partition.machines.assign(m, {});
    for (int i = 0; i < n; ++i) res.partition.machines[i].push_back(i);
    res.makespan = *std::max_element(d.begin(), d.end());
    return res;
  }
  if (m == 2 ? n > 24 : n > 10)
    throw CapacityError("hindsight scan supports n <= 24 on two machines, n <= 10 beyond");

  UncertaintySet point = UncertaintySet::box(d, d);
  std::vector<int> tasks(n);
  std::iota(tasks.begin(), tasks.end(), 0);
  std::vector<double> offsets(m, 0.0);

  WorstLoad eval(point, m);
  std::vector<int> order = tasks;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] > d[b]; });
  double seed = greedy_seed(order, m, offsets, eval);
  ScanResult best = scan_assignments(tasks, order, m, offsets, true, eval, seed);

  PhResult res;
  res.partition = partition_from_assign(tasks, {}, best.assign_of, m, true);
  res.makespan = best.value;
  return res;
}

}  // namespace robsched
