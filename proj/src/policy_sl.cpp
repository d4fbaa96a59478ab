#include <algorithm>
#include <vector>

#include "robsched/errors.hpp"
#include "robsched/policies.hpp"

namespace robsched {

SlResult solve_sl(const UncertaintySet& set, const State& state) {
  state.validate();
  if (set.dimension() != state.n)
    throw InvalidInputError("set dimension does not match the state's task count");
  if (set.kind() != SetKind::discrete)
    throw UnsupportedSetError("priority-list search needs a discrete set");

  UncertaintySet cond = condition(set, state);
  std::vector<int> consistent = cond.consistent_scenarios();
  if (consistent.empty()) throw EmptySetError("no scenario is consistent with the history");
  const auto& scenarios = cond.discrete_data().scenarios;

  std::vector<int> unstarted = state.unstarted_tasks();
  if (unstarted.size() > 8)
    throw CapacityError("priority-list search supports at most 8 unstarted tasks");

  auto worst_of = [&](const std::vector<int>& order) {
    double worst = 0.0;
    for (int s : consistent) {
      ListSimResult sim = simulate_list_from_state(state, order, scenarios[s]);
      worst = std::max(worst, sim.makespan.value());
    }
    return worst;
  };

  SlResult best;
  std::vector<int> perm = unstarted;  // ascending start = lexicographic enumeration
  best.order.order = perm;
  best.value = worst_of(perm);
  while (std::next_permutation(perm.begin(), perm.end())) {
    double w = worst_of(perm);
    if (w < best.value - 1e-9) {
      best.value = w;
      best.order.order = perm;
    }
  }
  return best;
}

}  // namespace robsched
