#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "robsched/errors.hpp"
#include "robsched/policies.hpp"
#include "robsched/rng.hpp"
#include "robsched/uncertainty.hpp"

using namespace robsched;

namespace {

// Random instance on the tenth grid: collisions are common, so simultaneous
// completions exercise the adversary's choice at ties.
UncertaintySet random_tenths(Rng& rng, int n, int scenarios) {
  std::vector<DurationVec> sc(scenarios);
  for (auto& row : sc) {
    row.reserve(n);
    for (int i = 0; i < n; ++i) {
      double d0 = rng.uniform(0.1, 2.0);
      double dev = rng.uniform(0.1, 5.0);
      double v = d0 + rng.uniform() * dev;
      row.push_back(Duration::from_tenths(std::max<long long>(1, std::llround(v * 10.0))));
    }
  }
  return UncertaintySet::discrete(sc);
}

}  // namespace

TEST_CASE("four-task set: both adaptive routes give 7.5 and open with tasks 1 and 4") {
  Instance ins = fixtures::four_task_instance();
  State s0 = State::initial(ins.n, ins.m);
  PolicyDecision milo = solve_ar_milo(ins.set, s0);
  PolicyDecision dp = solve_ar_dp(ins.set, s0);
  CHECK(milo.promised == 7.5);  // exact: tenth-grid data, snapped values
  CHECK(dp.promised == 7.5);
  CHECK(milo.batch == std::vector<int>{0, 3});
  CHECK(dp.batch == std::vector<int>{0, 3});
}

TEST_CASE("four-task set mid-execution: absolute values agree across routes") {
  Instance ins = fixtures::four_task_instance();
  State s = State::initial(4, 2);
  s = start_tasks(s, {0, 1});
  s = advance_state(s, 0, Duration::exact_hundredths(25));  // pins scenario 5

  PolicyDecision milo = solve_ar_milo(ins.set, s);
  PolicyDecision dp = solve_ar_dp(ins.set, s);
  // scenario 5 is (0.25, 5, 3.5, 4): both remaining tasks ride the freed machine
  CHECK(milo.promised == 7.75);
  CHECK(dp.promised == 7.75);
  CHECK(milo.batch == dp.batch);
}

TEST_CASE("adaptive routes agree exactly on random tenth-grid instances") {
  Rng rng(derive_seed(20260817, 201));
  for (int trial = 0; trial < 10; ++trial) {
    int n = trial % 2 == 0 ? 4 : 5;
    int scenarios = 3 + static_cast<int>(rng.uniform_index(6));
    UncertaintySet set = random_tenths(rng, n, scenarios);
    State s0 = State::initial(n, 2);
    CAPTURE(trial);
    PolicyDecision milo = solve_ar_milo(set, s0);
    PolicyDecision dp = solve_ar_dp(set, s0);
    CHECK(milo.promised == dp.promised);  // bit-identical after hundredth snapping
    CHECK(milo.batch == dp.batch);
  }
}

TEST_CASE("three-task budgeted set: adaptive value and the two-stage heuristic") {
  UncertaintySet set = fixtures::three_task_budgeted();
  State s0 = State::initial(3, 2);
  PolicyDecision ar = solve_ar_milo(set, s0);
  CHECK(ar.promised == doctest::Approx(1.8296).epsilon(1e-3));
  CHECK(ar.batch == std::vector<int>{0, 1});

  TwoStagePlan plan = solve_2ssa(set);
  CHECK(plan.converged);
  // one completion observed before the last task is placed: as adaptive as it gets
  // with three tasks, so the plan matches the fully adaptive value
  CHECK(plan.promised == doctest::Approx(ar.promised).epsilon(5e-3));
  CHECK(std::min(plan.first, plan.second) == 0);
  CHECK(std::max(plan.first, plan.second) == 1);

  SaResult sa = solve_sa(set, 2);
  CHECK(ar.promised <= plan.promised + 1e-6);
  CHECK(plan.promised <= sa.value + 1e-6);
}

TEST_CASE("two-stage plan is sandwiched between adaptive and static") {
  Instance ins = fixtures::four_task_instance();
  PolicyDecision ar = solve_ar_milo(ins.set, State::initial(4, 2));
  SaResult sa = solve_sa(ins.set, 2);
  TwoStagePlan plan = solve_2ssa(ins.set);
  CHECK(plan.converged);
  CHECK(ar.promised <= plan.promised + 1e-9);
  CHECK(plan.promised <= sa.value + 1e-9);

  TwoStagePlan again = solve_2ssa(ins.set);
  CHECK(again.promised == plan.promised);
  CHECK(again.first == plan.first);
  CHECK(again.second == plan.second);
}

TEST_CASE("on boxes, neither observation nor full adaptivity helps") {
  Rng rng(derive_seed(20260817, 202));
  for (int trial = 0; trial < 6; ++trial) {
    int n = trial < 3 ? 3 : 4;
    std::vector<double> lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = rng.uniform(0.1, 2.0);
      hi[i] = lo[i] + rng.uniform(0.1, 2.0);
    }
    UncertaintySet box = UncertaintySet::box(lo, hi);
    CAPTURE(trial);
    SaResult sa = solve_sa(box, 2);
    PolicyDecision ar = solve_ar_milo(box, State::initial(n, 2));
    TwoStagePlan plan = solve_2ssa(box);
    CHECK(plan.converged);
    CHECK(ar.promised == doctest::Approx(sa.value).epsilon(1e-6));
    CHECK(plan.promised == doctest::Approx(sa.value).epsilon(1e-6));
    CHECK(plan.promised >= ar.promised - 1e-6);
  }
}

TEST_CASE("random budgeted sets keep the adaptivity ordering") {
  Rng rng(derive_seed(20260817, 203));
  for (int trial = 0; trial < 4; ++trial) {
    int n = trial < 3 ? 3 : 4;
    std::vector<double> nom(n), dev(n);
    for (int i = 0; i < n; ++i) {
      nom[i] = rng.uniform(0.5, 3.0);
      dev[i] = rng.uniform(0.2, 1.0) * nom[i];
    }
    UncertaintySet set = UncertaintySet::budgeted(nom, dev, rng.uniform(0.5, 0.7 * n));
    CAPTURE(trial);
    PolicyDecision ar = solve_ar_milo(set, State::initial(n, 2));
    TwoStagePlan plan = solve_2ssa(set);
    SaResult sa = solve_sa(set, 2);
    CHECK(plan.converged);
    CHECK(ar.promised <= plan.promised + 1e-6);
    CHECK(plan.promised <= sa.value + 1e-6);
  }
}

TEST_CASE("rolling companion: fresh, pinned, and degenerate states") {
  Instance ins = fixtures::four_task_instance();
  State s0 = State::initial(4, 2);
  TwoStagePlan plan = solve_2ssa(ins.set);
  PolicyDecision fresh = solve_2ssa_next(ins.set, s0);
  CHECK(fresh.batch ==
        std::vector<int>{std::min(plan.first, plan.second), std::max(plan.first, plan.second)});
  CHECK(fresh.promised == plan.promised);

  // one task running, two open: the companion starts exactly one task
  State s = start_tasks(s0, {0, 1});
  s = advance_state(s, 0, Duration::exact_hundredths(25));
  PolicyDecision next = solve_2ssa_next(ins.set, s);
  REQUIRE(next.batch.size() == 1);
  CHECK((next.batch[0] == 2 || next.batch[0] == 3));
  PolicyDecision ar = solve_ar_milo(ins.set, s);
  CHECK(next.promised >= ar.promised - 1e-9);

  // nothing open: the promise is the worst completion of what is still running
  UncertaintySet tail_set = UncertaintySet::box({0.5, 1.0, 2.0}, {0.5, 1.5, 4.0});
  State tail = State::initial(3, 2);
  tail = start_tasks(tail, {0, 1});
  tail = advance_state(tail, 0, Duration::exact_hundredths(50));
  tail = start_tasks(tail, {2});
  PolicyDecision idle = solve_2ssa_next(tail_set, tail);
  CHECK(idle.batch.empty());
  CHECK(idle.promised == doctest::Approx(4.5).epsilon(1e-9));
}

TEST_CASE("adaptive route validation") {
  Instance ins = fixtures::four_task_instance();
  UncertaintySet box = UncertaintySet::box({1.0, 2.0, 1.0}, {2.0, 3.0, 1.5});
  CHECK_THROWS_AS(solve_ar_dp(box, State::initial(3, 2)), UnsupportedSetError);
  CHECK_THROWS_AS(solve_ar_milo(box, State::initial(4, 2)), InvalidInputError);
  CHECK_THROWS_AS(solve_2ssa(UncertaintySet::box({1.0}, {2.0})), InvalidInputError);

  CHECK_THROWS_AS(solve_2ssa_next(ins.set, State::initial(4, 3)), InvalidInputError);

  State bad = State::initial(4, 2);
  bad = start_tasks(bad, {0, 1});
  bad = advance_state(bad, 0, Duration::exact_hundredths(99));
  CHECK_THROWS_AS(solve_ar_milo(ins.set, bad), EmptySetError);
  CHECK_THROWS_AS(solve_ar_dp(ins.set, bad), EmptySetError);
}
