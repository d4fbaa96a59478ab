#pragma once
#include <cmath>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace robsched {

enum class Relation { le, eq, ge };

struct MipRow {
  std::vector<std::pair<int, double>> terms;  // (column, coefficient)
  Relation rel = Relation::le;
  double rhs = 0.0;
  std::string name;
};

// Linear program with optional integrality marks. Bounds may be +-infinity.
struct MixedIntegerProgram {
  bool maximize = true;
  std::vector<double> objective;
  std::vector<double> lower, upper;
  std::vector<char> is_integer;
  std::vector<std::string> var_names;
  std::vector<MipRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int add_var(const std::string& name, double lb, double ub, double obj, bool integer);
  void add_row(std::vector<std::pair<int, double>> terms, Relation rel, double rhs,
               const std::string& name);
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, limit, error };

std::string status_name(SolveStatus s);

struct LpSolution {
  SolveStatus status = SolveStatus::error;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> row_duals;
  double duality_gap = 0.0;  // |primal - dual| certificate residual at termination
  long iterations = 0;
};

struct SolveOptions {
  long node_limit = 1000000;
  long iteration_limit = 2000000;
  double integrality_tol = 1e-6;
  double absolute_gap = 1e-7;
  // If finite: stop the search as soon as an incumbent proves the optimum is at least
  // (maximize) / at most (minimize) this value; status becomes `limit`.
  double early_stop_incumbent = std::numeric_limits<double>::quiet_NaN();
  // If finite: objective of a known feasible point (the point itself is not supplied).
  // The search prunes anything that cannot beat it, as if it were an incumbent, and
  // only explores improvements; passing an unattainable value makes results invalid.
  double warm_bound = std::numeric_limits<double>::quiet_NaN();
  // If nonempty: a feasible point seeded as the initial incumbent. It is verified
  // (bounds, integrality, rows) and rejected with InvalidInputError if it fails.
  std::vector<double> start_point;
  // Per-column branching priority (higher branches first; missing entries are 0).
  std::vector<int> branch_priority;
};

struct MipSolution {
  SolveStatus status = SolveStatus::error;
  double objective = 0.0;   // incumbent value
  double best_bound = 0.0;  // proven bound on the optimum
  std::vector<double> x;
  long nodes = 0;
  long lp_iterations = 0;
  double max_duality_gap = 0.0;
};

// Solves the linear relaxation (integrality marks ignored).
LpSolution solve_lp(const MixedIntegerProgram& prog);

// Branch-and-bound with warm-started dual simplex re-solves, best-bound node order
// with plunging, most-fractional branching (ties: lowest variable index).
MipSolution solve_mip(const MixedIntegerProgram& prog, const SolveOptions& opts = {});

// Writes the program in LP text format (deterministic output).
void write_lp_format(const MixedIntegerProgram& prog, std::ostream& os);

}  // namespace robsched
