#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fixtures.hpp"
#include "robsched/errors.hpp"
#include "robsched/policies.hpp"
#include "robsched/rng.hpp"
#include "robsched/uncertainty.hpp"

using namespace robsched;

namespace {

// Reference worst case of one machine's task set, straight from max_linear: an
// independent route from the incremental evaluator inside the allocation scan.
double machine_worst(const UncertaintySet& set, const std::vector<int>& tasks) {
  std::vector<double> c(set.dimension(), 0.0);
  for (int t : tasks) c[t] = 1.0;
  return max_linear(set, c).value;
}

struct BruteBest {
  double value = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> machines;
};

// Exhaustive two-machine reference with task `tasks[0]` pinned to machine 0; ties are
// broken by comparing assignment strings task by task (earlier tasks prefer machine 0),
// the rule the scan documents.
BruteBest brute_sa_two(const UncertaintySet& set, const std::vector<int>& tasks,
                       const std::vector<double>& offsets) {
  const int k = static_cast<int>(tasks.size());
  BruteBest best;
  std::vector<int> best_string;
  for (int mask = 0; mask < (1 << std::max(0, k - 1)); ++mask) {
    std::vector<int> m0{tasks[0]}, m1, str{0};
    for (int i = 1; i < k; ++i) {
      int bit = mask >> (i - 1) & 1;
      (bit ? m1 : m0).push_back(tasks[i]);
      str.push_back(bit);
    }
    double v = std::max(offsets[0] + machine_worst(set, m0), offsets[1] + machine_worst(set, m1));
    bool better = v < best.value - 1e-9;
    bool tie = !better && v < best.value + 1e-9 && str < best_string;
    if (better || tie) {
      best.value = std::min(best.value, v);
      best.machines = {m0, m1};
      best_string = str;
    }
  }
  return best;
}

double brute_ph(const std::vector<double>& d, int m) {
  const int n = static_cast<int>(d.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> assign(n, 0);
  auto rec = [&](auto&& self, int i) -> void {
    if (i == n) {
      std::vector<double> load(m, 0.0);
      for (int t = 0; t < n; ++t) load[assign[t]] += d[t];
      best = std::min(best, *std::max_element(load.begin(), load.end()));
      return;
    }
    for (int j = 0; j < m; ++j) {
      assign[i] = j;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  return best;
}

UncertaintySet random_budgeted(Rng& rng, int n) {
  std::vector<double> nom(n), dev(n);
  for (int i = 0; i < n; ++i) {
    nom[i] = rng.uniform(0.5, 5.0);
    dev[i] = rng.uniform(0.1, 1.0) * nom[i];
  }
  return UncertaintySet::budgeted(nom, dev, rng.uniform(0.0, n));
}

UncertaintySet random_box(Rng& rng, int n) {
  std::vector<double> lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = rng.uniform(0.1, 2.0);
    hi[i] = lo[i] + rng.uniform(0.1, 2.0);
  }
  return UncertaintySet::box(lo, hi);
}

UncertaintySet random_discrete(Rng& rng, int n, int scenarios) {
  std::vector<DurationVec> sc(scenarios);
  for (auto& row : sc) {
    row.reserve(n);
    for (int i = 0; i < n; ++i)
      row.push_back(Duration::from_tenths(1 + rng.uniform_index(30)));
  }
  return UncertaintySet::discrete(sc);
}

}  // namespace

TEST_CASE("hindsight scan: known splits and the tie rule") {
  PhResult r = solve_ph({3.0, 2.0, 2.0, 1.0}, 2);
  CHECK(r.makespan == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.partition.machines == std::vector<std::vector<int>>{{0, 3}, {1, 2}});

  // all ties: the first split task by task keeps early tasks on machine 0
  r = solve_ph({1.0, 1.0, 1.0, 1.0}, 2);
  CHECK(r.makespan == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.partition.machines == std::vector<std::vector<int>>{{0, 1}, {2, 3}});

  r = solve_ph({5.0, 1.0}, 3);  // more machines than tasks
  CHECK(r.makespan == doctest::Approx(5.0).epsilon(1e-12));

  CHECK_THROWS_AS(solve_ph({}, 2), InvalidInputError);
  CHECK_THROWS_AS(solve_ph({1.0, -0.5, 2.0}, 2), InvalidInputError);
  CHECK_THROWS_AS(solve_ph(std::vector<double>(25, 1.0), 2), CapacityError);
  CHECK_THROWS_AS(solve_ph(std::vector<double>(11, 1.0), 3), CapacityError);
}

TEST_CASE("hindsight scan equals exhaustive enumeration") {
  Rng rng(derive_seed(20260817, 101));
  for (int trial = 0; trial < 24; ++trial) {
    int n = 5 + static_cast<int>(rng.uniform_index(5));
    int m = trial % 2 == 0 ? 2 : 3;
    std::vector<double> d(n);
    for (double& v : d) v = rng.uniform(0.1, 5.0);
    CAPTURE(trial);
    PhResult r = solve_ph(d, m);
    CHECK(r.makespan == doctest::Approx(brute_ph(d, m)).epsilon(1e-9));
    DurationVec dv;
    for (double v : d) dv.push_back(Duration::from_real(v));
    CHECK(evaluate_partition(r.partition, dv).value() ==
          doctest::Approx(r.makespan).epsilon(1e-9));
  }
}

TEST_CASE("four-task discrete allocation: reference scan agrees and is matched") {
  Instance ins = fixtures::four_task_instance();
  // independent reference over all splits, worst case straight from the scenarios
  BruteBest ref = brute_sa_two(ins.set, {0, 1, 2, 3}, {0.0, 0.0});
  CHECK(ref.value == doctest::Approx(8.5).epsilon(1e-12));
  CHECK(ref.machines == std::vector<std::vector<int>>{{0, 1}, {2, 3}});

  SaResult r = solve_sa(ins.set, 2);
  CHECK(r.value == doctest::Approx(8.5).epsilon(1e-9));
  CHECK(r.partition.machines == ref.machines);
}

TEST_CASE("three-task budgeted allocation: worst cases of every split, then the argmin") {
  UncertaintySet set = fixtures::three_task_budgeted();
  // hand-checked worst cases (nominal sum plus fully boosted deviations, budget 2.5)
  CHECK(machine_worst(set, {0, 1}) == doctest::Approx(0.2525 + 1.70).epsilon(1e-9));
  CHECK(machine_worst(set, {0, 2}) == doctest::Approx(0.6446 + 1.43).epsilon(1e-9));
  CHECK(machine_worst(set, {1, 2}) == doctest::Approx(0.7811 + 1.23).epsilon(1e-9));

  BruteBest ref = brute_sa_two(set, {0, 1, 2}, {0.0, 0.0});
  CHECK(ref.value == doctest::Approx(1.9525).epsilon(1e-9));
  CHECK(ref.machines == std::vector<std::vector<int>>{{0, 1}, {2}});

  SaResult r = solve_sa(set, 2);
  CHECK(r.value == doctest::Approx(1.9525).epsilon(1e-9));
  CHECK(r.partition.machines == ref.machines);
}

TEST_CASE("allocation scan equals the mask reference on random sets") {
  Rng rng(derive_seed(20260817, 102));
  for (int trial = 0; trial < 18; ++trial) {
    int n = 3 + static_cast<int>(rng.uniform_index(5));
    UncertaintySet set = trial % 3 == 0   ? random_box(rng, n)
                         : trial % 3 == 1 ? random_budgeted(rng, n)
                                          : random_discrete(rng, n, 6);
    CAPTURE(trial);
    std::vector<int> tasks(n);
    std::iota(tasks.begin(), tasks.end(), 0);
    BruteBest ref = brute_sa_two(set, tasks, {0.0, 0.0});
    SaResult r = solve_sa(set, 2);
    CHECK(r.value == doctest::Approx(ref.value).epsilon(1e-9));
    CHECK(r.partition.machines == ref.machines);
  }
}

TEST_CASE("offsets and pinned tasks steer the allocation") {
  Rng rng(derive_seed(20260817, 103));
  for (int trial = 0; trial < 12; ++trial) {
    int n = 4 + static_cast<int>(rng.uniform_index(3));
    UncertaintySet set = trial % 2 == 0 ? random_budgeted(rng, n) : random_box(rng, n);
    std::vector<double> offsets{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)};
    // pin task 0 to machine 1, allocate the rest
    std::vector<int> tasks(n - 1);
    std::iota(tasks.begin(), tasks.end(), 1);
    SaResult r = solve_sa(set, 2, offsets, tasks, {{0, 1}});
    REQUIRE(r.partition.machines.size() == 2);
    CHECK(std::find(r.partition.machines[1].begin(), r.partition.machines[1].end(), 0) !=
          r.partition.machines[1].end());

    // reference: enumerate the free tasks over both machines, pinned load included
    double ref = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << (n - 1)); ++mask) {
      std::vector<int> m0, m1{0};
      for (int i = 1; i < n; ++i) (mask >> (i - 1) & 1 ? m1 : m0).push_back(i);
      ref = std::min(ref, std::max(offsets[0] + machine_worst(set, m0),
                                   offsets[1] + machine_worst(set, m1)));
    }
    CAPTURE(trial);
    CHECK(r.value == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("assignment program route agrees with the scan on three machines") {
  Rng rng(derive_seed(20260817, 104));
  for (int trial = 0; trial < 2; ++trial) {
    // 11 tasks on 3 machines exceeds the scan cap, forcing the program route
    UncertaintySet set = trial == 0 ? random_box(rng, 11) : random_budgeted(rng, 11);
    SaResult program = solve_sa(set, 3);

    std::vector<int> assign(11, 0);
    double ref = std::numeric_limits<double>::infinity();
    auto rec = [&](auto&& self, int i, int used) -> void {
      if (i == 11) {
        std::vector<std::vector<int>> machines(3);
        for (int t = 0; t < 11; ++t) machines[assign[t]].push_back(t);
        double v = 0.0;
        for (auto& mach : machines) v = std::max(v, machine_worst(set, mach));
        ref = std::min(ref, v);
        return;
      }
      for (int j = 0; j <= std::min(used, 2); ++j) {
        assign[i] = j;
        self(self, i + 1, std::max(used, j + 1));
      }
    };
    rec(rec, 0, 0);
    CAPTURE(trial);
    CHECK(program.value == doctest::Approx(ref).epsilon(1e-7));
  }
}

TEST_CASE("priority lists: the four-task set") {
  Instance ins = fixtures::four_task_instance();
  State s0 = State::initial(4, 2);

  // independent reference: replay every list against every scenario
  const auto& sc = ins.set.discrete_data().scenarios;
  auto worst_of = [&](const std::vector<int>& order) {
    double w = 0.0;
    for (const auto& d : sc)
      w = std::max(w, simulate_list(Permutation{order}, d, 2).makespan.value());
    return w;
  };
  std::vector<int> perm{0, 1, 2, 3};
  double ref = std::numeric_limits<double>::infinity();
  std::vector<int> ref_arg;
  do {
    double w = worst_of(perm);
    if (w < ref - 1e-9) {
      ref = w;
      ref_arg = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(ref == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(ref_arg == std::vector<int>{0, 1, 3, 2});
  CHECK(worst_of({1, 2, 3, 0}) == doctest::Approx(8.0).epsilon(1e-12));

  SlResult r = solve_sl(ins.set, s0);
  CHECK(r.value == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(r.order.order == ref_arg);
}

TEST_CASE("priority lists equal the best allocation on box corners") {
  Rng rng(derive_seed(20260817, 105));
  for (int trial = 0; trial < 8; ++trial) {
    int n = 4;
    UncertaintySet box = random_box(rng, n);
    const auto& bd = box.box_data();
    std::vector<DurationVec> corners;
    for (int mask = 0; mask < (1 << n); ++mask) {
      DurationVec d;
      for (int i = 0; i < n; ++i)
        d.push_back(Duration::from_real(mask >> i & 1 ? bd.upper[i] : bd.lower[i]));
      corners.push_back(std::move(d));
    }
    UncertaintySet corner_set = UncertaintySet::discrete(corners);
    CAPTURE(trial);
    SaResult sa = solve_sa(corner_set, 2);
    SlResult sl = solve_sl(corner_set, State::initial(n, 2));
    CHECK(sa.value == doctest::Approx(solve_sa(box, 2).value).epsilon(1e-9));
    CHECK(sl.value == doctest::Approx(sa.value).epsilon(1e-6));
  }
}

TEST_CASE("priority lists from a mid-execution state") {
  Instance ins = fixtures::four_task_instance();
  State s = State::initial(4, 2);
  s = start_tasks(s, {0, 1});
  s = advance_state(s, 0, Duration::exact_hundredths(25));  // pins scenario 5

  // scenario 5 is (0.25, 5, 3.5, 4); machine 2 is busy with task 1 until t=5
  SlResult r = solve_sl(ins.set, s);
  CHECK(r.value == doctest::Approx(7.75).epsilon(1e-9));

  State bad = State::initial(4, 2);
  bad = start_tasks(bad, {0, 1});
  bad = advance_state(bad, 0, Duration::exact_hundredths(99));
  CHECK_THROWS_AS(solve_sl(ins.set, bad), EmptySetError);
}

TEST_CASE("policy argument validation") {
  UncertaintySet set = fixtures::three_task_budgeted();
  CHECK_THROWS_AS(solve_sa(set, 0), InvalidInputError);
  CHECK_THROWS_AS(solve_sa(set, 2, {1.0}), InvalidInputError);
  CHECK_THROWS_AS(solve_sa(set, 2, {0.0, -1.0}), InvalidInputError);
  CHECK_THROWS_AS(solve_sa(set, 2, {}, {0, 0}), InvalidInputError);
  CHECK_THROWS_AS(solve_sa(set, 2, {}, {3}), InvalidInputError);
  CHECK_THROWS_AS(solve_sa(set, 2, {}, {0}, {{0, 0}}), InvalidInputError);
  CHECK_THROWS_AS(solve_sa(set, 2, {}, {}, {{0, 5}}), InvalidInputError);
  CHECK_THROWS_AS(solve_sl(set, State::initial(3, 2)), UnsupportedSetError);

  UncertaintySet big = UncertaintySet::discrete(
      {DurationVec(9, Duration::from_tenths(10)), DurationVec(9, Duration::from_tenths(20))});
  CHECK_THROWS_AS(solve_sl(big, State::initial(9, 2)), CapacityError);
}
