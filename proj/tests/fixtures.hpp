#pragma once
// Shared fixture data for unit and acceptance tests: a four-task discrete instance
// with five scenarios, and a three-task budgeted instance, both exercised heavily
// because their optimal values are known in closed form.
#include <vector>

#include "robsched/duration.hpp"
#include "robsched/uncertainty.hpp"

namespace robsched::fixtures {

// Scenarios as duration vectors (tasks are rows of the table below, scenarios columns):
//   task 1: 3    4.5  4.75 2.5  0.25
//   task 2: 2    2    2    3.5  5
//   task 3: 3    3.5  3    3    3.5
//   task 4: 5.5  4    4    4    4
inline std::vector<DurationVec> four_task_scenarios() {
  auto h = [](int64_t v) { return Duration::exact_hundredths(v); };
  return {
      {h(300), h(200), h(300), h(550)},
      {h(450), h(200), h(350), h(400)},
      {h(475), h(200), h(300), h(400)},
      {h(250), h(350), h(300), h(400)},
      {h(25), h(500), h(350), h(400)},
  };
}

inline UncertaintySet four_task_set() { return UncertaintySet::discrete(four_task_scenarios()); }

inline Instance four_task_instance() {
  Instance ins;
  ins.n = 4;
  ins.m = 2;
  ins.set = four_task_set();
  ins.label = "four-task-discrete";
  ins.seed = 0;
  return ins;
}

// d_i = nominal_i + deviation_i * u_i, u in [0,1]^3, sum(u) <= 2.5
inline UncertaintySet three_task_budgeted() {
  return UncertaintySet::budgeted({0.0580, 0.1945, 0.5866}, {0.95, 0.75, 0.48}, 2.5);
}

inline Instance three_task_instance() {
  Instance ins;
  ins.n = 3;
  ins.m = 2;
  ins.set = three_task_budgeted();
  ins.label = "three-task-budgeted";
  ins.seed = 0;
  return ins;
}

}  // namespace robsched::fixtures
