#include "simplex.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace gridshed::milp::detail {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double primal_tol = 1e-9;
constexpr double dual_tol = 1e-9;
constexpr double pivot_tol = 1e-9;
constexpr double drop_tol = 1e-13;
constexpr std::size_t refactor_interval = 200;
constexpr std::size_t degenerate_before_bland = 60;

}  // namespace

BoundedSimplex::BoundedSimplex(const LpData& lp) : n_(lp.n), m_(lp.m), total_(lp.n + lp.m) {
  cost_.assign(total_, 0.0);
  lo_.assign(total_, 0.0);
  hi_.assign(total_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    cost_[j] = lp.cost[j];
    lo_[j] = lp.lo[j];
    hi_[j] = lp.hi[j];
  }
  row_scale_.assign(m_, 1.0);
  cols_.assign(n_, {});
  for (std::size_t i = 0; i < m_; ++i) {
    double largest = 0.0;
    for (const auto& [j, a] : lp.rows[i]) largest = std::max(largest, std::abs(a));
    const double s = largest > 0.0 ? 1.0 / largest : 1.0;
    row_scale_[i] = s;
    for (const auto& [j, a] : lp.rows[i]) {
      if (a != 0.0) cols_[j].emplace_back(i, a * s);
    }
    lo_[n_ + i] = std::isfinite(lp.row_lo[i]) ? lp.row_lo[i] * s : -inf;
    hi_[n_ + i] = std::isfinite(lp.row_hi[i]) ? lp.row_hi[i] * s : inf;
  }
  // Duplicate column entries (same row twice) are merged.
  for (auto& col : cols_) {
    std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& e : col) {
      if (!merged.empty() && merged.back().first == e.first) {
        merged.back().second += e.second;
      } else {
        merged.push_back(e);
      }
    }
    std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
    col = std::move(merged);
  }
  iteration_limit_ = 50 * (total_ + 10);
  reset();
}

void BoundedSimplex::set_bounds(std::size_t j, double lo, double hi) {
  lo_[j] = lo;
  hi_[j] = hi;
  if (!basic_[j]) {
    // Keep the side preferred by the reduced cost so the basis stays dual feasible.
    const double d = dj_[where_[j]];
    const double old = x_[j];
    place_nonbasic(j, d < 0.0);
    const double delta = x_[j] - old;
    if (delta != 0.0) {
      const std::size_t k = where_[j];
      for (std::size_t i = 0; i < m_; ++i) {
        const double tik = t(i, k);
        if (tik != 0.0) x_[head_[i]] -= tik * delta;
      }
    }
  }
}

void BoundedSimplex::place_nonbasic(std::size_t var, bool prefer_upper) {
  const bool has_lo = std::isfinite(lo_[var]);
  const bool has_hi = std::isfinite(hi_[var]);
  bool upper = prefer_upper;
  if (upper && !has_hi) upper = false;
  if (!upper && !has_lo) upper = has_hi;
  at_upper_[var] = upper ? 1 : 0;
  if (upper) {
    x_[var] = hi_[var];
  } else {
    x_[var] = has_lo ? lo_[var] : 0.0;
  }
}

void BoundedSimplex::reset() {
  tableau_.assign(m_ * n_, 0.0);
  dj_.assign(n_, 0.0);
  head_.resize(m_);
  nonbasic_.resize(n_);
  where_.assign(total_, 0);
  basic_.assign(total_, 0);
  at_upper_.assign(total_, 0);
  x_.assign(total_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    where_[n_ + i] = i;
    basic_[n_ + i] = 1;
  }
  for (std::size_t j = 0; j < n_; ++j) {
    nonbasic_[j] = j;
    where_[j] = j;
    for (const auto& [i, a] : cols_[j]) t(i, j) = -a;
    dj_[j] = cost_[j];
    place_nonbasic(j, cost_[j] < 0.0);
  }
  since_refactor_ = 0;
  recompute_primal();
}

void BoundedSimplex::recompute_primal() {
  scratch_.clear();
  for (std::size_t k = 0; k < n_; ++k) {
    if (x_[nonbasic_[k]] != 0.0) scratch_.push_back(k);
  }
  for (std::size_t i = 0; i < m_; ++i) {
    double v = 0.0;
    const double* row = &tableau_[i * n_];
    for (std::size_t k : scratch_) v -= row[k] * x_[nonbasic_[k]];
    x_[head_[i]] = v;
  }
}

void BoundedSimplex::recompute_duals() {
  for (std::size_t k = 0; k < n_; ++k) dj_[k] = cost_[nonbasic_[k]];
  for (std::size_t i = 0; i < m_; ++i) {
    const double cb = cost_[head_[i]];
    if (cb == 0.0) continue;
    const double* row = &tableau_[i * n_];
    for (std::size_t k = 0; k < n_; ++k) dj_[k] -= cb * row[k];
  }
}

bool BoundedSimplex::refactor() {
  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> triplets;
  auto append_column = [&](std::size_t var, std::size_t col, std::vector<Eigen::Triplet<double>>& out) {
    if (var < n_) {
      for (const auto& [i, a] : cols_[var]) out.emplace_back(static_cast<int>(i), static_cast<int>(col), a);
    } else {
      out.emplace_back(static_cast<int>(var - n_), static_cast<int>(col), -1.0);
    }
  };
  for (std::size_t i = 0; i < m_; ++i) append_column(head_[i], i, triplets);
  SpMat basis_matrix(static_cast<int>(m_), static_cast<int>(m_));
  basis_matrix.setFromTriplets(triplets.begin(), triplets.end());
  basis_matrix.makeCompressed();

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(basis_matrix);
  lu.factorize(basis_matrix);
  if (lu.info() != Eigen::Success) return false;

  std::vector<Eigen::Triplet<double>> ntrip;
  for (std::size_t k = 0; k < n_; ++k) append_column(nonbasic_[k], k, ntrip);
  SpMat nonbasic_matrix(static_cast<int>(m_), static_cast<int>(n_));
  nonbasic_matrix.setFromTriplets(ntrip.begin(), ntrip.end());

  constexpr std::size_t block = 64;
  for (std::size_t k0 = 0; k0 < n_; k0 += block) {
    const std::size_t width = std::min(block, n_ - k0);
    Eigen::MatrixXd rhs = Eigen::MatrixXd(nonbasic_matrix.middleCols(static_cast<int>(k0), static_cast<int>(width)));
    Eigen::MatrixXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) return false;
    for (std::size_t i = 0; i < m_; ++i) {
      double* row = &tableau_[i * n_ + k0];
      for (std::size_t c = 0; c < width; ++c) {
        const double v = sol(static_cast<int>(i), static_cast<int>(c));
        row[c] = std::abs(v) < drop_tol ? 0.0 : v;
      }
    }
  }
  since_refactor_ = 0;
  recompute_primal();
  recompute_duals();
  return true;
}

void BoundedSimplex::pivot(std::size_t r, std::size_t k) {
  double* pivot_row = &tableau_[r * n_];
  const double p = pivot_row[k];
  const double inv = 1.0 / p;
  scratch_.clear();
  for (std::size_t j = 0; j < n_; ++j) {
    if (j != k && pivot_row[j] != 0.0) scratch_.push_back(j);
  }
  for (std::size_t j : scratch_) pivot_row[j] *= inv;
  pivot_row[k] = inv;

  for (std::size_t i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* row = &tableau_[i * n_];
    const double f = row[k];
    if (f == 0.0) continue;
    for (std::size_t j : scratch_) {
      double v = row[j] - f * pivot_row[j];
      row[j] = std::abs(v) < drop_tol ? 0.0 : v;
    }
    row[k] = -f * inv;
  }
  const double dk = dj_[k];
  if (dk != 0.0) {
    for (std::size_t j : scratch_) dj_[j] -= dk * pivot_row[j];
  }
  dj_[k] = -dk * inv;

  const std::size_t entering = nonbasic_[k];
  const std::size_t leaving = head_[r];
  head_[r] = entering;
  nonbasic_[k] = leaving;
  where_[entering] = r;
  where_[leaving] = k;
  basic_[entering] = 1;
  basic_[leaving] = 0;
  ++iterations_;
  ++since_refactor_;
}

double BoundedSimplex::infeasibility(std::size_t var) const {
  if (x_[var] < lo_[var] - primal_tol) return lo_[var] - x_[var];
  if (x_[var] > hi_[var] + primal_tol) return x_[var] - hi_[var];
  return 0.0;
}

double BoundedSimplex::total_infeasibility() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < m_; ++i) sum += infeasibility(head_[i]);
  return sum;
}

BoundedSimplex::StepResult BoundedSimplex::primal_step(bool phase_one, bool bland) {
  // Pricing.
  const std::vector<double>* d = &dj_;
  if (phase_one) {
    phase_one_dj_.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t b = head_[i];
      double w = 0.0;
      if (x_[b] < lo_[b] - primal_tol) w = -1.0;
      else if (x_[b] > hi_[b] + primal_tol) w = 1.0;
      if (w == 0.0) continue;
      const double* row = &tableau_[i * n_];
      for (std::size_t k = 0; k < n_; ++k) phase_one_dj_[k] -= w * row[k];
    }
    d = &phase_one_dj_;
  }
  std::size_t enter = n_;
  double best = 0.0;
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t v = nonbasic_[k];
    if (lo_[v] == hi_[v]) continue;
    const double dk = (*d)[k];
    double score = 0.0;
    if (dk < -dual_tol && x_[v] < hi_[v]) score = -dk;
    else if (dk > dual_tol && x_[v] > lo_[v]) score = dk;
    if (score == 0.0) continue;
    if (bland) {
      if (enter == n_ || v < nonbasic_[enter]) enter = k;
    } else if (score > best || (score == best && v < nonbasic_[enter])) {
      best = score;
      enter = k;
    }
  }
  if (enter == n_) return StepResult::optimal;

  const std::size_t q = nonbasic_[enter];
  const double dir = (*d)[enter] < 0.0 ? 1.0 : -1.0;

  // Harris two-pass ratio test. Each blocking row also records the bound it runs into.
  struct Block {
    double ratio;
    bool upper;
  };
  auto limit_of = [&](std::size_t i, double alpha, double slack) -> Block {
    const std::size_t b = head_[i];
    const double xb = x_[b];
    if (phase_one && xb < lo_[b] - primal_tol) {
      return alpha > 0.0 ? Block{(lo_[b] - xb) / alpha, false} : Block{inf, false};
    }
    if (phase_one && xb > hi_[b] + primal_tol) {
      return alpha < 0.0 ? Block{(hi_[b] - xb) / alpha, true} : Block{inf, true};
    }
    if (alpha > 0.0) return {std::isfinite(hi_[b]) ? (hi_[b] + slack - xb) / alpha : inf, true};
    return {std::isfinite(lo_[b]) ? (lo_[b] - slack - xb) / alpha : inf, false};
  };
  double relaxed = hi_[q] - lo_[q];
  for (std::size_t i = 0; i < m_; ++i) {
    const double alpha = -t(i, enter) * dir;
    if (std::abs(alpha) <= pivot_tol) continue;
    relaxed = std::min(relaxed, limit_of(i, alpha, bland ? 0.0 : primal_tol).ratio);
  }
  if (!std::isfinite(relaxed)) return StepResult::unbounded;

  std::size_t leave = m_;
  double leave_ratio = inf;
  double leave_alpha = 0.0;
  bool leave_upper = false;
  for (std::size_t i = 0; i < m_; ++i) {
    const double alpha = -t(i, enter) * dir;
    if (std::abs(alpha) <= pivot_tol) continue;
    const auto block = limit_of(i, alpha, 0.0);
    const double ratio = block.ratio;
    if (ratio > relaxed) continue;
    bool take = false;
    if (leave == m_) take = true;
    else if (bland) take = ratio < leave_ratio || (ratio == leave_ratio && head_[i] < head_[leave]);
    else take = std::abs(alpha) > std::abs(leave_alpha) ||
                (std::abs(alpha) == std::abs(leave_alpha) && head_[i] < head_[leave]);
    if (take) {
      leave = i;
      leave_ratio = ratio;
      leave_alpha = alpha;
      leave_upper = block.upper;
    }
  }

  const double flip = hi_[q] - lo_[q];
  if (leave == m_ || flip <= leave_ratio) {
    if (!std::isfinite(flip)) return StepResult::unbounded;
    // Bound flip, no basis change.
    const double step = flip;
    for (std::size_t i = 0; i < m_; ++i) {
      const double tik = t(i, enter);
      if (tik != 0.0) x_[head_[i]] -= tik * dir * step;
    }
    at_upper_[q] = dir > 0.0 ? 1 : 0;
    x_[q] = dir > 0.0 ? hi_[q] : lo_[q];
    ++iterations_;
    return StepResult::flipped;
  }

  const double step = std::max(leave_ratio, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    const double tik = t(i, enter);
    if (tik != 0.0) x_[head_[i]] -= tik * dir * step;
  }
  x_[q] += dir * step;
  const std::size_t out = head_[leave];
  // The leaving variable lands on the bound it was heading for.
  const bool to_upper = leave_upper;
  pivot(leave, enter);
  at_upper_[out] = to_upper ? 1 : 0;
  const double target = to_upper ? hi_[out] : lo_[out];
  const double drift = target - x_[out];
  x_[out] = target;
  if (drift != 0.0) {
    // Absorb the snap so x_B stays consistent with the tableau.
    const std::size_t k = where_[out];
    for (std::size_t i = 0; i < m_; ++i) {
      const double tik = t(i, k);
      if (tik != 0.0) x_[head_[i]] -= tik * drift;
    }
  }
  return step > 0.0 ? StepResult::pivoted : StepResult::flipped;
}

LpStatus BoundedSimplex::primal() {
  std::size_t degenerate = 0;
  bool bland = false;
  const std::size_t start = iterations_;
  while (true) {
    if (iterations_ - start > iteration_limit_) return LpStatus::iteration_limit;
    if (since_refactor_ >= refactor_interval && !refactor()) return LpStatus::numerical;
    bool phase_one = false;
    for (std::size_t i = 0; i < m_ && !phase_one; ++i) phase_one = infeasibility(head_[i]) > 0.0;
    const double before = phase_one ? total_infeasibility() : objective();
    const auto result = primal_step(phase_one, bland);
    if (result == StepResult::optimal) {
      if (phase_one) {
        // Confirm on a fresh factorization before declaring infeasibility.
        if (since_refactor_ > 0) {
          if (!refactor()) return LpStatus::numerical;
          continue;
        }
        return LpStatus::infeasible;
      }
      if (since_refactor_ > 0) {
        if (!refactor()) return LpStatus::numerical;
        bool still_infeasible = false;
        for (std::size_t i = 0; i < m_ && !still_infeasible; ++i) still_infeasible = infeasibility(head_[i]) > 0.0;
        bool dual_ok = true;
        for (std::size_t k = 0; k < n_ && dual_ok; ++k) {
          const std::size_t v = nonbasic_[k];
          if (lo_[v] == hi_[v]) continue;
          if (dj_[k] < -dual_tol && x_[v] < hi_[v]) dual_ok = false;
          if (dj_[k] > dual_tol && x_[v] > lo_[v]) dual_ok = false;
        }
        if (still_infeasible || !dual_ok) continue;
      }
      return LpStatus::optimal;
    }
    if (result == StepResult::unbounded) return phase_one ? LpStatus::numerical : LpStatus::unbounded;
    const double after = phase_one ? total_infeasibility() : objective();
    const bool progress = after < before - 1e-12;
    if (progress) {
      degenerate = 0;
      bland = false;
    } else if (++degenerate > degenerate_before_bland) {
      bland = true;
    }
  }
}

bool BoundedSimplex::repair_dual_feasibility() {
  bool moved = false;
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t v = nonbasic_[k];
    if (lo_[v] == hi_[v]) continue;
    const double d = dj_[k];
    if (d < -dual_tol && x_[v] < hi_[v]) {
      if (!std::isfinite(hi_[v])) return false;
      at_upper_[v] = 1;
      x_[v] = hi_[v];
      moved = true;
    } else if (d > dual_tol && x_[v] > lo_[v]) {
      if (!std::isfinite(lo_[v])) return false;
      at_upper_[v] = 0;
      x_[v] = lo_[v];
      moved = true;
    }
  }
  if (moved) recompute_primal();
  return true;
}

BoundedSimplex::DualResult BoundedSimplex::dual_step(bool bland) {
  std::size_t r = m_;
  double worst = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    const double inf_i = infeasibility(head_[i]);
    if (inf_i <= 0.0) continue;
    if (bland) {
      if (r == m_ || head_[i] < head_[r]) r = i;
    } else if (inf_i > worst || (inf_i == worst && head_[i] < head_[r])) {
      worst = inf_i;
      r = i;
    }
  }
  if (r == m_) return DualResult::optimal;

  const std::size_t b = head_[r];
  const bool raise = x_[b] < lo_[b];
  const double target = raise ? lo_[b] : hi_[b];
  const double* row = &tableau_[r * n_];

  // Eligible columns move x_b toward its violated bound; Harris ratio on |d|/|T|.
  auto rate_of = [&](std::size_t k) -> double {
    const std::size_t v = nonbasic_[k];
    if (lo_[v] == hi_[v]) return 0.0;
    const double s = at_upper_[v] ? -1.0 : 1.0;
    const double rate = -row[k] * s;
    if (raise ? rate > pivot_tol : rate < -pivot_tol) return rate;
    return 0.0;
  };
  auto slack_dual = [&](std::size_t k) { return std::max(0.0, at_upper_[nonbasic_[k]] ? -dj_[k] : dj_[k]); };

  double relaxed = inf;
  for (std::size_t k = 0; k < n_; ++k) {
    if (row[k] == 0.0 || rate_of(k) == 0.0) continue;
    relaxed = std::min(relaxed, (slack_dual(k) + (bland ? 0.0 : dual_tol)) / std::abs(row[k]));
  }
  if (!std::isfinite(relaxed)) return DualResult::infeasible;
  std::size_t enter = n_;
  double enter_ratio = inf;
  for (std::size_t k = 0; k < n_; ++k) {
    if (row[k] == 0.0 || rate_of(k) == 0.0) continue;
    const double ratio = slack_dual(k) / std::abs(row[k]);
    if (ratio > relaxed) continue;
    bool take = false;
    if (enter == n_) take = true;
    else if (bland) take = ratio < enter_ratio || (ratio == enter_ratio && nonbasic_[k] < nonbasic_[enter]);
    else take = std::abs(row[k]) > std::abs(row[enter]) ||
                (std::abs(row[k]) == std::abs(row[enter]) && nonbasic_[k] < nonbasic_[enter]);
    if (take) {
      enter = k;
      enter_ratio = ratio;
    }
  }

  const std::size_t q = nonbasic_[enter];
  const double s = at_upper_[q] ? -1.0 : 1.0;
  const double rate = -row[enter] * s;
  const double step = (target - x_[b]) / rate;
  for (std::size_t i = 0; i < m_; ++i) {
    const double tik = t(i, enter);
    if (tik != 0.0) x_[head_[i]] -= tik * s * step;
  }
  x_[q] += s * step;
  pivot(r, enter);
  at_upper_[b] = raise ? 0 : 1;
  x_[b] = target;
  return DualResult::pivoted;
}

LpStatus BoundedSimplex::dual() {
  if (!repair_dual_feasibility()) return primal();
  std::size_t stalled = 0;
  bool bland = false;
  const std::size_t start = iterations_;
  while (true) {
    if (iterations_ - start > iteration_limit_) return LpStatus::iteration_limit;
    if (since_refactor_ >= refactor_interval) {
      if (!refactor()) return LpStatus::numerical;
      if (!repair_dual_feasibility()) return primal();
    }
    const double before = objective();
    if (before > cutoff_) return LpStatus::cutoff;
    const auto result = dual_step(bland);
    if (result == DualResult::optimal) break;
    if (result == DualResult::infeasible) {
      if (since_refactor_ > 0) {
        if (!refactor()) return LpStatus::numerical;
        if (!repair_dual_feasibility()) return primal();
        continue;
      }
      return LpStatus::infeasible;
    }
    if (objective() > before + 1e-12) {
      stalled = 0;
      bland = false;
    } else if (++stalled > degenerate_before_bland) {
      bland = true;
    }
  }
  // Primal cleanup handles any dual infeasibility left by round-off.
  return primal();
}

Basis BoundedSimplex::basis() const {
  Basis out;
  out.head.assign(head_.begin(), head_.end());
  out.at_upper = at_upper_;
  return out;
}

bool BoundedSimplex::restore(const Basis& stored) {
  if (stored.head.size() != m_ || stored.at_upper.size() != total_) return false;
  std::vector<std::uint8_t> in_basis(total_, 0);
  for (auto v : stored.head) {
    if (v < 0 || static_cast<std::size_t>(v) >= total_ || in_basis[v]) return false;
    in_basis[v] = 1;
  }
  for (std::size_t i = 0; i < m_; ++i) {
    head_[i] = static_cast<std::size_t>(stored.head[i]);
    where_[head_[i]] = i;
  }
  std::size_t k = 0;
  for (std::size_t v = 0; v < total_; ++v) {
    basic_[v] = in_basis[v];
    if (in_basis[v]) continue;
    nonbasic_[k] = v;
    where_[v] = k;
    ++k;
  }
  at_upper_ = stored.at_upper;
  for (std::size_t v = 0; v < total_; ++v) {
    if (!basic_[v]) place_nonbasic(v, at_upper_[v] != 0);
  }
  if (!refactor()) {
    reset();
    return false;
  }
  return true;
}

double BoundedSimplex::objective() const {
  double z = 0.0;
  for (std::size_t j = 0; j < n_; ++j) z += cost_[j] * x_[j];
  return z;
}

std::vector<double> BoundedSimplex::values() const { return {x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_)}; }

double BoundedSimplex::reduced_cost(std::size_t j) const { return basic_[j] ? 0.0 : dj_[where_[j]]; }

}  // namespace gridshed::milp::detail
