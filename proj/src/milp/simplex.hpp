#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace gridshed::milp::detail {

/// min cost·x  s.t.  row_lo <= A x <= row_hi,  lo <= x <= hi.
struct LpData {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> cost, lo, hi;
  std::vector<double> row_lo, row_hi;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numerical, cutoff };

/// Snapshot of a basis: which variable sits in each row, and which nonbasic
/// variables rest at their upper bound. Variables n..n+m-1 are row activities.
struct Basis {
  std::vector<std::int32_t> head;
  std::vector<std::uint8_t> at_upper;
};

/// Bounded-variable simplex on a compact tableau T = B^-1 N (m x n, row major).
/// Every row gets an activity variable r_i = a_i x with the row bounds, so the
/// initial basis is the row-activity basis. Rows are scaled to unit max norm.
class BoundedSimplex {
 public:
  explicit BoundedSimplex(const LpData& lp);

  std::size_t rows() const { return m_; }
  std::size_t columns() const { return n_; }

  void set_bounds(std::size_t j, double lo, double hi);
  double lower(std::size_t j) const { return lo_[j]; }
  double upper(std::size_t j) const { return hi_[j]; }

  /// Back to the row-activity basis with every structural at a bound.
  void reset();

  /// Primal simplex from the current basis (phase 1 on the sum of infeasibilities, then phase 2).
  LpStatus primal();

  /// Dual simplex from the current basis; repairs dual infeasibility by bound
  /// flips where possible and finishes with primal() when it cannot. Stops with
  /// `cutoff` once the (monotone) dual objective exceeds the cutoff.
  LpStatus dual();
  void set_cutoff(double value) { cutoff_ = value; }

  Basis basis() const;
  /// Loads a stored basis by refactorizing. Returns false (and resets) if it is singular.
  bool restore(const Basis& basis);

  double objective() const;
  std::vector<double> values() const;  // structural values
  double value(std::size_t j) const { return x_[j]; }
  std::size_t iterations() const { return iterations_; }
  void set_iteration_limit(std::size_t limit) { iteration_limit_ = limit; }

  /// Reduced cost of structural j (0 when basic).
  double reduced_cost(std::size_t j) const;
  bool is_basic(std::size_t j) const { return basic_[j] != 0; }

 private:
  double& t(std::size_t i, std::size_t k) { return tableau_[i * n_ + k]; }
  double t(std::size_t i, std::size_t k) const { return tableau_[i * n_ + k]; }

  void place_nonbasic(std::size_t var, bool prefer_upper);
  void recompute_primal();
  void recompute_duals();
  bool refactor();
  void pivot(std::size_t r, std::size_t k);
  double infeasibility(std::size_t var) const;
  double total_infeasibility() const;
  bool repair_dual_feasibility();

  enum class StepResult { pivoted, flipped, optimal, unbounded };
  StepResult primal_step(bool phase_one, bool bland);
  enum class DualResult { pivoted, optimal, infeasible };
  DualResult dual_step(bool bland);

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t total_ = 0;
  std::vector<double> cost_, lo_, hi_, x_;
  std::vector<double> row_scale_;
  std::vector<std::vector<std::pair<std::size_t, double>>> cols_;  // scaled A by column

  std::vector<double> tableau_;
  std::vector<double> dj_;                  // reduced cost per tableau column
  std::vector<std::size_t> head_;           // basic variable per row
  std::vector<std::size_t> nonbasic_;       // nonbasic variable per tableau column
  std::vector<std::size_t> where_;          // row (basic) or column (nonbasic) of each variable
  std::vector<std::uint8_t> basic_;
  std::vector<std::uint8_t> at_upper_;

  std::vector<std::size_t> scratch_;
  std::vector<double> phase_one_dj_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
  std::size_t iteration_limit_ = 0;
  double cutoff_ = std::numeric_limits<double>::infinity();
};

}  // namespace gridshed::milp::detail
