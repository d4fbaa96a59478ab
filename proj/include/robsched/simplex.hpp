#pragma once
#include <cstdint>
#include <vector>

namespace robsched {

// Bounded-variable revised simplex over sparse columns with a product-form inverse.
// Computational form: min c'x  s.t.  A x = b,  l <= x <= u  (slack columns included
// by the caller). Primal solves use a composite phase 1 that drives the total bound
// violation of the basic variables to zero; dual solves warm-start from a dual-feasible
// basis (branch-and-bound re-solves after bound tightening).
enum class ColStatus : uint8_t { AtLower, AtUpper, Basic, Free };

enum class SimplexResult { optimal, infeasible, unbounded, iteration_limit, numerical };

struct SparseCol {
  std::vector<int> idx;
  std::vector<double> val;
};

struct SimplexBasis {
  std::vector<ColStatus> status;
  std::vector<int> basic;
};

class BoundedSimplex {
 public:
  BoundedSimplex(int rows, std::vector<SparseCol> cols, std::vector<double> cost,
                 std::vector<double> lower, std::vector<double> upper, std::vector<double> b);

  void set_bounds(int col, double lo, double hi);
  void set_slack_basis();  // caller guarantees the last `rows` columns are unit slacks

  SimplexResult solve_primal(long iter_limit);
  SimplexResult solve_dual(long iter_limit);

  double objective() const;
  const std::vector<double>& x() const { return x_; }
  std::vector<double> duals();        // y = B^{-T} c_B
  double duality_gap();               // |c'x - g(y)| at the current point
  long iterations() const { return iters_; }

  SimplexBasis save_basis() const { return {status_, basic_}; }
  void load_basis(const SimplexBasis& basis);

  double lower_bound(int col) const { return lo_[col]; }
  double upper_bound(int col) const { return hi_[col]; }

 private:
  struct Eta {
    int row;
    double pivot;
    std::vector<std::pair<int, double>> entries;  // nonzeros excluding the pivot row
  };

  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;
  bool refactor();      // rebuilds the eta file; false means the basis was repaired
  void recompute_x();
  void push_eta(int row, const std::vector<double>& w);
  double nonbasic_value(int j) const;
  void price(const std::vector<double>& y, bool phase1, bool bland, int& q, int& dir) const;

  int nrows_, ncols_;
  std::vector<SparseCol> cols_;
  std::vector<double> cost_, lo_, hi_, b_;
  std::vector<ColStatus> status_;
  std::vector<int> basic_;          // column basic in each row
  std::vector<int> basic_row_;      // row of each basic column, -1 otherwise
  std::vector<double> x_;
  std::vector<Eta> etas_;
  long iters_ = 0;
  int stall_ = 0;
  bool x_dirty_ = true;
};

}  // namespace robsched
