#pragma once
#include "robsched/mip.hpp"
#include "robsched/tree.hpp"
#include "robsched/uncertainty.hpp"

namespace robsched {

struct AdversaryMiloOptions {
  // Drop leaves whose completion order is provably unrealizable before building
  // (exact scenario checks for discrete sets, per-row interval checks for boxes).
  bool presolve = true;
};

struct AdversaryMilo {
  MixedIntegerProgram prog;
  int value_var = -1;     // column holding the subtree root's value
  long alive_leaves = 0;  // leaves represented in the program
  long total_leaves = 0;  // leaves of the subtree before pruning
  double big_m = 0.0;
  // pick indicators first, then deactivation flags, then the rest
  std::vector<int> branch_priority;
  // feasible point from the best fixed duration choice played through the subtree;
  // seed it as SolveOptions::start_point so the search starts with an incumbent
  std::vector<double> warm_start;
  double warm_value = 0.0;  // its objective, a lower bound on the program's maximum
};

// Program whose maximum is the value, relative to the base state's clock, of optimal
// adaptive scheduling from `subtree_root` against durations chosen from `set`.
// Scheduler moves bound the value from above at every child; adversary moves pick one
// child via indicator relaxation; one duration variable per observation (completion
// edge) makes non-anticipativity structural, and each leaf's makespan expression is
// deactivated by a flag when the adversary routes play elsewhere.
// `set` must already be conditioned on the tree's base state; `subtree_root` must be
// the tree root or one of its direct children.
AdversaryMilo build_adversary_milo(const ScenarioTree& tree, const UncertaintySet& set,
                                   int subtree_root = 0,
                                   const AdversaryMiloOptions& opts = {});

// Best duration vector among a handful of fixed candidates (the box upper corner,
// every consistent scenario of a discrete set, greedy corners of a budgeted set),
// scored by playing it through the subtree with fixed_scenario_value. Returns the
// vector and its value; the value is a lower bound on the subtree's robust value.
std::pair<std::vector<double>, double> best_fixed_scenario(const ScenarioTree& tree,
                                                           const UncertaintySet& set,
                                                           int subtree_root = 0);

}  // namespace robsched
