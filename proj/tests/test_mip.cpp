#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "robsched/mip.hpp"
#include "robsched/rng.hpp"

using namespace robsched;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Brute-force LP oracle for programs whose variables all have finite bounds: every
// vertex of the feasible polytope activates nv constraints picked from rows (taken
// as equalities) and variable bounds. Enumerate, solve, filter, maximize.
struct OracleOut {
  bool feasible = false;
  double best = -kInf;
};

bool gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double>& x) {
  int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    double best = 1e-10;
    for (int r = col; r < n; ++r)
      if (std::fabs(a[r][col]) > best) {
        best = std::fabs(a[r][col]);
        piv = r;
      }
    if (piv < 0) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c2 = col; c2 < n; ++c2) a[r][c2] -= f * a[col][c2];
      b[r] -= f * b[col];
    }
  }
  x.resize(n);
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

OracleOut lp_vertex_oracle(const MixedIntegerProgram& prog) {
  int nv = prog.num_vars();
  int nr = static_cast<int>(prog.rows.size());
  // constraint library: rows 0..nr-1, lower bounds nr..nr+nv-1, upper bounds after
  int total = nr + 2 * nv;
  std::vector<int> pick;
  OracleOut out;
  auto feasible_point = [&](const std::vector<double>& x) {
    for (int j = 0; j < nv; ++j)
      if (x[j] < prog.lower[j] - 1e-6 || x[j] > prog.upper[j] + 1e-6) return false;
    for (const auto& row : prog.rows) {
      double lhs = 0.0;
      for (const auto& [col, coef] : row.terms) lhs += coef * x[col];
      if (row.rel == Relation::le && lhs > row.rhs + 1e-6) return false;
      if (row.rel == Relation::ge && lhs < row.rhs - 1e-6) return false;
      if (row.rel == Relation::eq && std::fabs(lhs - row.rhs) > 1e-6) return false;
    }
    return true;
  };
  auto consider = [&](const std::vector<int>& active) {
    std::vector<std::vector<double>> a(nv, std::vector<double>(nv, 0.0));
    std::vector<double> b(nv, 0.0);
    for (int k = 0; k < nv; ++k) {
      int idx = active[k];
      if (idx < nr) {
        for (const auto& [col, coef] : prog.rows[idx].terms) a[k][col] += coef;
        b[k] = prog.rows[idx].rhs;
      } else if (idx < nr + nv) {
        a[k][idx - nr] = 1.0;
        b[k] = prog.lower[idx - nr];
      } else {
        a[k][idx - nr - nv] = 1.0;
        b[k] = prog.upper[idx - nr - nv];
      }
    }
    std::vector<double> x;
    if (!gauss_solve(a, b, x)) return;
    if (!feasible_point(x)) return;
    double v = 0.0;
    for (int j = 0; j < nv; ++j) v += prog.objective[j] * x[j];
    out.feasible = true;
    if (v > out.best) out.best = v;
  };
  std::vector<int> active(nv);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == nv) {
      consider(active);
      return;
    }
    for (int i = start; i < total; ++i) {
      active[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  if (!prog.maximize && out.feasible) {
    // oracle maximizes; flip by negating the objective externally instead
  }
  return out;
}

MixedIntegerProgram random_lp(Rng& rng, bool with_eq = false) {
  MixedIntegerProgram prog;
  prog.maximize = true;
  int nv = rng.uniform_int(2, 4);
  for (int j = 0; j < nv; ++j) {
    double lo = rng.uniform(-2.0, 0.0);
    double hi = lo + rng.uniform(0.5, 3.0);
    prog.add_var("x" + std::to_string(j), lo, hi, rng.uniform(-2.0, 2.0), false);
  }
  int nr = rng.uniform_int(1, 4);
  for (int i = 0; i < nr; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < nv; ++j)
      if (rng.uniform() < 0.8) terms.push_back({j, rng.uniform(-2.0, 2.0)});
    if (terms.empty()) terms.push_back({0, 1.0});
    double roll = rng.uniform();
    Relation rel = roll < (with_eq ? 0.2 : 0.0) ? Relation::eq
                   : roll < 0.6                 ? Relation::le
                                                : Relation::ge;
    prog.add_row(terms, rel, rng.uniform(-1.0, 3.0), "r");
  }
  return prog;
}

}  // namespace

TEST_CASE("textbook linear programs solve to their optima") {
  SUBCASE("simple polytope") {
    MixedIntegerProgram p;
    p.maximize = true;
    int x = p.add_var("x", 0, 10, 3, false);
    int y = p.add_var("y", 0, 10, 2, false);
    p.add_row({{x, 1.0}, {y, 1.0}}, Relation::le, 4, "cap");
    p.add_row({{x, 1.0}}, Relation::le, 2, "xcap");
    auto sol = solve_lp(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(10.0));
    CHECK(sol.x[0] == doctest::Approx(2.0));
    CHECK(sol.x[1] == doctest::Approx(2.0));
  }
  SUBCASE("equality restriction") {
    MixedIntegerProgram p;
    p.maximize = true;
    int x = p.add_var("x", 0, 5, 1, false);
    int y = p.add_var("y", 0, 5, -1, false);
    p.add_row({{x, 1.0}, {y, 1.0}}, Relation::eq, 2, "tie");
    auto sol = solve_lp(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(2.0));
  }
  SUBCASE("lower-bounding row in a minimization") {
    MixedIntegerProgram p;
    p.maximize = false;
    int x = p.add_var("x", 0, 10, 1, false);
    int y = p.add_var("y", 0, 10, 2, false);
    p.add_row({{x, 1.0}, {y, 1.0}}, Relation::ge, 3, "floor");
    auto sol = solve_lp(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(3.0));
    CHECK(sol.x[0] == doctest::Approx(3.0));
  }
  SUBCASE("free variable pinned by an equality") {
    MixedIntegerProgram p;
    p.maximize = false;
    int x = p.add_var("x", -kInf, kInf, 1, false);
    int y = p.add_var("y", 0, 2, 0, false);
    p.add_row({{x, 1.0}, {y, -1.0}}, Relation::eq, 1, "link");
    auto sol = solve_lp(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(1.0));
  }
  SUBCASE("infeasible bounds vs row") {
    MixedIntegerProgram p;
    p.maximize = true;
    int x = p.add_var("x", 0, 1, 1, false);
    p.add_row({{x, 1.0}}, Relation::le, -1, "neg");
    CHECK(solve_lp(p).status == SolveStatus::infeasible);
  }
  SUBCASE("unbounded direction") {
    MixedIntegerProgram p;
    p.maximize = true;
    p.add_var("x", 0, kInf, 1, false);
    CHECK(solve_lp(p).status == SolveStatus::unbounded);
  }
}

TEST_CASE("random linear programs match a vertex-enumeration oracle") {
  Rng rng(777001);
  int compared = 0;
  for (int trial = 0; trial < 400; ++trial) {
    auto prog = random_lp(rng, trial % 3 == 0);
    auto oracle = lp_vertex_oracle(prog);
    auto sol = solve_lp(prog);
    if (!oracle.feasible) {
      CHECK(sol.status == SolveStatus::infeasible);
      continue;
    }
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(oracle.best).epsilon(1e-6).scale(1.0));
    CHECK(sol.duality_gap <= 1e-6 * std::max(1.0, std::fabs(sol.objective)));
    ++compared;
  }
  CHECK(compared > 150);  // the generator must not be degenerate
}

TEST_CASE("random mixed-binary programs match exhaustive enumeration") {
  Rng rng(424242);
  for (int trial = 0; trial < 120; ++trial) {
    MixedIntegerProgram prog;
    prog.maximize = true;
    int nb = rng.uniform_int(1, 6), nc = rng.uniform_int(0, 2);
    for (int j = 0; j < nb; ++j)
      prog.add_var("b" + std::to_string(j), 0, 1, rng.uniform(-3.0, 3.0), true);
    for (int j = 0; j < nc; ++j)
      prog.add_var("c" + std::to_string(j), 0, rng.uniform(0.5, 2.0), rng.uniform(-2.0, 2.0),
                   false);
    int nr = rng.uniform_int(1, 5);
    for (int i = 0; i < nr; ++i) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < nb + nc; ++j)
        if (rng.uniform() < 0.7) terms.push_back({j, rng.uniform(-2.0, 2.0)});
      if (terms.empty()) terms.push_back({0, 1.0});
      prog.add_row(terms, rng.uniform() < 0.7 ? Relation::le : Relation::ge,
                   rng.uniform(-1.0, 3.5), "r");
    }
    // oracle: enumerate binary assignments, solve the continuous rest
    double best = -kInf;
    bool feasible = false;
    for (int mask = 0; mask < (1 << nb); ++mask) {
      MixedIntegerProgram fixed = prog;
      for (int j = 0; j < nb; ++j) {
        double v = (mask >> j) & 1;
        fixed.lower[j] = v;
        fixed.upper[j] = v;
        fixed.is_integer[j] = 0;
      }
      auto sol = solve_lp(fixed);
      if (sol.status == SolveStatus::optimal) {
        feasible = true;
        best = std::max(best, sol.objective);
      }
    }
    auto mip = solve_mip(prog);
    if (!feasible) {
      CHECK(mip.status == SolveStatus::infeasible);
      continue;
    }
    REQUIRE(mip.status == SolveStatus::optimal);
    CHECK(mip.objective == doctest::Approx(best).epsilon(1e-6).scale(1.0));
    CHECK(mip.max_duality_gap <= 1e-5);
    // solutions must be reproducible run to run
    auto again = solve_mip(prog);
    CHECK(again.objective == mip.objective);
    CHECK(again.x == mip.x);
    CHECK(again.nodes == mip.nodes);
  }
}

TEST_CASE("branch and bound proves optimality on a small knapsack") {
  MixedIntegerProgram p;
  p.maximize = true;
  int a = p.add_var("a", 0, 1, 5, true);
  int b = p.add_var("b", 0, 1, 4, true);
  int c = p.add_var("c", 0, 1, 3, true);
  p.add_row({{a, 2.0}, {b, 3.0}, {c, 1.0}}, Relation::le, 3, "weight");
  auto sol = solve_mip(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(8.0));
  CHECK(sol.x[a] == doctest::Approx(1.0));
  CHECK(sol.x[b] == doctest::Approx(0.0));
  CHECK(sol.x[c] == doctest::Approx(1.0));
  CHECK(sol.best_bound == doctest::Approx(8.0));
}

TEST_CASE("early stopping returns once the incumbent is good enough") {
  MixedIntegerProgram p;
  p.maximize = true;
  for (int j = 0; j < 10; ++j) p.add_var("b" + std::to_string(j), 0, 1, 1, true);
  std::vector<std::pair<int, double>> all;
  for (int j = 0; j < 10; ++j) all.push_back({j, 1.0});
  p.add_row(all, Relation::le, 7.5, "cap");
  SolveOptions opts;
  opts.early_stop_incumbent = 3.0;
  auto sol = solve_mip(p, opts);
  REQUIRE(sol.status == SolveStatus::limit);
  CHECK(sol.objective >= 3.0);
  auto full = solve_mip(p);
  CHECK(full.status == SolveStatus::optimal);
  CHECK(full.objective == doctest::Approx(7.0));
}

TEST_CASE("integer programs with general integers") {
  MixedIntegerProgram p;
  p.maximize = true;
  int x = p.add_var("x", 0, 9, 1, true);
  p.add_row({{x, 2.0}}, Relation::le, 7, "half");
  auto sol = solve_mip(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(3.0));
}

TEST_CASE("lp text export is stable and complete") {
  MixedIntegerProgram p;
  p.maximize = true;
  int t = p.add_var("t_0", -kInf, kInf, 1, false);
  int z = p.add_var("z_5", 0, 1, 0, true);
  int d = p.add_var("d_5_1", 0.5, 2.5, 0, false);
  p.add_row({{t, 1.0}, {d, -1.0}, {z, 36.0}}, Relation::eq, 0, "value");
  p.add_row({{d, 1.0}}, Relation::le, 2.5, "cap");
  std::ostringstream os;
  write_lp_format(p, os);
  std::string text = os.str();
  CHECK(text ==
        "Maximize\n"
        " obj: t_0\n"
        "Subject To\n"
        " value_0: t_0 - d_5_1 + 36 z_5 = 0\n"
        " cap_1: d_5_1 <= 2.5\n"
        "Bounds\n"
        " t_0 free\n"
        " 0 <= z_5 <= 1\n"
        " 0.5 <= d_5_1 <= 2.5\n"
        "Binaries\n"
        " z_5\n"
        "End\n");
}
