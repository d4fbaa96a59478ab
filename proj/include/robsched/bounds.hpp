#pragma once
#include <vector>

namespace robsched {

// Worst-case guarantee of the best static allocation relative to perfect hindsight on
// two machines, for budgeted deviations of up to alpha times the nominal duration and
// an uncertainty budget gamma in [0, n]. Uses the hindsight-optimal split of the
// nominal durations; exactly 1 at gamma = 0 and gamma = n.
double bound_sa_ph(const std::vector<double>& nominal, double alpha, double gamma);

// Worst-case guarantee of rolling-horizon re-solving relative to perfect hindsight on
// two machines under the same uncertainty model. Decreases toward 1 as the task count
// grows.
double bound_rh_ph(const std::vector<double>& nominal, double alpha, double gamma);

}  // namespace robsched
