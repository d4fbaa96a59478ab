#include <algorithm>
#include <cmath>
#include <vector>

#include "robsched/bounds.hpp"
#include "robsched/errors.hpp"
#include "robsched/policies.hpp"

namespace robsched {
namespace {

void check_inputs(const std::vector<double>& nominal, double alpha, double gamma) {
  if (nominal.size() < 2) throw InvalidInputError("bound needs at least two tasks");
  for (double v : nominal) {
    if (!std::isfinite(v) || v <= 0.0)
      throw InvalidInputError("nominal durations must be positive");
  }
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw InvalidInputError("deviation fraction must be nonnegative");
  if (!std::isfinite(gamma) || gamma < 0.0 || gamma > static_cast<double>(nominal.size()))
    throw InvalidInputError("budget must lie in [0, n]");
}

// Largest budget-feasible boost of one machine's nominal load, as a fraction of that
// load: the gamma heaviest tasks deviate fully, a fractional remainder partially.
double boosted_fraction(std::vector<double> side, double gamma) {
  std::sort(side.begin(), side.end(), std::greater<double>());
  const int size = static_cast<int>(side.size());
  int full = std::min(size, static_cast<int>(std::floor(gamma)));
  double partial = std::min(gamma, static_cast<double>(size)) -
                   std::min(std::floor(gamma), static_cast<double>(size));
  double total = 0.0, boosted = 0.0;
  for (double v : side) total += v;
  for (int k = 0; k < full; ++k) boosted += side[k];
  if (partial > 0.0 && full < size) boosted += partial * side[full];
  return boosted / total;
}

}  // namespace

double bound_sa_ph(const std::vector<double>& nominal, double alpha, double gamma) {
  check_inputs(nominal, alpha, gamma);
  const double n = static_cast<double>(nominal.size());
  PhResult split = solve_ph(nominal, 2);
  double worst = 0.0;
  for (const auto& machine : split.partition.machines) {
    if (machine.empty()) continue;
    std::vector<double> side;
    for (int t : machine) side.push_back(nominal[t]);
    worst = std::max(worst, boosted_fraction(std::move(side), gamma));
  }
  // single ratio so both extremes are exact: worst is 0 at gamma = 0 and 1 at
  // gamma = n, making numerator and denominator the same expression
  return (n + alpha * worst * n) / (n + alpha * gamma);
}

double bound_rh_ph(const std::vector<double>& nominal, double alpha, double gamma) {
  check_inputs(nominal, alpha, gamma);
  const double n = static_cast<double>(nominal.size());
  double hi = *std::max_element(nominal.begin(), nominal.end());
  double lo = *std::min_element(nominal.begin(), nominal.end());
  double growth = std::min(1.0 + alpha, 1.0 + alpha * gamma);
  return 1.0 + hi * growth / (lo * (n + alpha * gamma));
}

}  // namespace robsched
