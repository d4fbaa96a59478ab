#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "robsched/duration.hpp"
#include "robsched/model.hpp"

namespace robsched {

enum class SetKind { box, budgeted, discrete };

std::string set_kind_name(SetKind k);
SetKind set_kind_from_name(const std::string& name);

// History constraints layered on a base set: completed tasks pin their coordinate,
// still-running tasks impose a lower bound equal to their elapsed time.
struct Conditioning {
  std::map<int, Duration> fixed;
  std::map<int, Duration> floors;
  bool empty() const { return fixed.empty() && floors.empty(); }
};

struct BoxData {
  std::vector<double> lower, upper;
};

struct BudgetedData {
  std::vector<double> nominal, deviation;
  double budget = 0.0;
};

struct DiscreteData {
  std::vector<DurationVec> scenarios;
};

// Effective u-space bounds of a (conditioned) budgeted set: the set is
// { d : d_i = nominal_i + deviation_i * u_i, u in [lo, hi], sum(u) <= budget }.
struct BudgetBox {
  std::vector<double> lo, hi;
  double budget = 0.0;
  bool feasible = true;
};

class UncertaintySet {
 public:
  UncertaintySet() = default;  // zero-dimensional placeholder; factories build real sets

  static UncertaintySet box(std::vector<double> lower, std::vector<double> upper);
  static UncertaintySet budgeted(std::vector<double> nominal, std::vector<double> deviation,
                                 double budget);
  static UncertaintySet discrete(std::vector<DurationVec> scenarios);

  SetKind kind() const { return kind_; }
  int dimension() const { return n_; }
  const Conditioning& conditioning() const { return cond_; }

  const BoxData& box_data() const;
  const BudgetedData& budgeted_data() const;
  const DiscreteData& discrete_data() const;

  bool contains(const DurationVec& d, double tol = 1e-9) const;
  bool is_empty() const;

  // Discrete sets: indices of scenarios consistent with the conditioning, ascending.
  std::vector<int> consistent_scenarios() const;

  // Budgeted sets: u-space bounds implied by the conditioning.
  BudgetBox budget_box() const;

  // Coordinate-wise value range (ignoring coupling constraints); used for big-M and
  // variable-bound derivation. Conditioning is applied.
  void coordinate_range(int i, double& lo, double& hi) const;

  UncertaintySet with_conditioning(Conditioning c) const;

 private:
  SetKind kind_ = SetKind::box;
  int n_ = 0;
  BoxData box_;
  BudgetedData budgeted_;
  DiscreteData discrete_;
  Conditioning cond_;
};

// Restricts `set` by the realized history in `state`: finished tasks fix their
// durations, running tasks bound them below by elapsed time. Composes with any
// conditioning already present.
UncertaintySet condition(const UncertaintySet& set, const State& state);

struct LinearConstraint {
  std::vector<double> coeffs;  // over duration coordinates
  double rhs = 0.0;            // coeffs . d <= rhs
};

struct MaxLinearResult {
  double value = 0.0;
  std::vector<double> argmax;
};

// max { c . d : d in set, extra constraints hold }. Throws EmptySetError when the
// feasible region is empty. Closed forms for box/budgeted/discrete; extra constraints
// route box and budgeted sets through an LP.
MaxLinearResult max_linear(const UncertaintySet& set, const std::vector<double>& c,
                           const std::vector<LinearConstraint>& extra = {});

struct Instance {
  int n = 0;
  int m = 0;
  UncertaintySet set;
  std::string label;
  uint64_t seed = 0;
};

}  // namespace robsched
