#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridshed/mld.hpp"
#include "gridshed/ops.hpp"

namespace gridshed {

/// One (risk, load) outcome of a method at one parameter value.
struct TradeoffPoint {
  std::string method;      // ops, transmission, area or standard
  double parameter = 0.0;  // alpha for ops, threshold for heuristics
  double r_fire = 0.0;
  double d_tot_mw = 0.0;
  double objective = 0.0;
  milp::SolveStatus status = milp::SolveStatus::numerical_failure;
  double solve_time_s = 0.0;
  milp::SolveStats stats;
  std::string diagnostics;
  bool found = false;  // a plan was produced (r_fire, d_tot and objective are meaningful)
  std::optional<ShutoffPlan> plan;

  bool has_solution() const { return found; }
};

struct SweepResult {
  std::string method;
  std::vector<TradeoffPoint> points;  // ordered by parameter
  std::string network_fingerprint;
  std::string risk_fingerprint;
};

/// 64-bit FNV-1a of the canonical case serialization, as 16 hex digits.
std::string network_fingerprint(const Network& network);
/// 64-bit FNV-1a of every component risk in component order, as 16 hex digits.
std::string risk_fingerprint(const Network& network, const RiskTable& risk);

/// 0, 0.01, ..., 1.
std::vector<double> default_alpha_grid();
/// Transmission: max line risk rounded up to an integer, down to 0 in steps of 1.
/// Area: largest area total rounded up to a multiple of 10, down to 0 in steps of 10.
/// Returned in ascending order.
std::vector<double> default_threshold_grid(const Network& network, const RiskTable& risk, HeuristicKind kind);

struct SweepOptions {
  SolverSettings solver;
  unsigned workers = 0;  // 0: one per hardware thread
  /// Called after each finished point with (finished, total); may run on any worker thread.
  std::function<void(std::size_t, std::size_t)> progress;
  bool keep_plans = true;
  /// Alpha sweeps only: every solved plan is feasible at every alpha, so a point
  /// adopts another point's plan when that plan scores strictly better at its alpha.
  bool share_incumbents = true;
  /// Alpha sweeps only: the alpha 0 and alpha 1 points break objective ties (see OpsConfig).
  bool break_endpoint_ties = true;
};

/// One OPS solve per alpha. Throws ValidationError for an empty grid or an alpha
/// outside [0, 1]; a failing solve is recorded on its point and the sweep continues.
SweepResult sweep_alpha(const Network& network, const RiskTable& risk, std::vector<double> alphas,
                        const SweepOptions& options = {});

/// One heuristic pipeline run per threshold. Throws ValidationError for an empty grid.
SweepResult sweep_threshold(const Network& network, const RiskTable& risk, HeuristicKind kind,
                            std::vector<double> thresholds, const SweepOptions& options = {});

/// Points not weakly dominated by any other point (higher load and lower risk are
/// better). Points with equal (r_fire, d_tot) keep the smallest parameter. Points
/// without a solution are dropped. Ordered by r_fire ascending.
std::vector<TradeoffPoint> pareto_front(const std::vector<TradeoffPoint>& points);

/// Everything energized and the most load that topology can serve.
TradeoffPoint standard_operation_point(const Network& network, const RiskTable& risk,
                                       const SolverSettings& solver = {});

/// Risk of a plan split by component kind; the parts sum to plan.r_fire.
RiskBreakdown plan_risk_breakdown(const Network& network, const RiskTable& risk, const ShutoffPlan& plan);

/// Comparison document: per-method point tables and Pareto fronts, the points of each
/// method nearest 50 % and 10 % of standard-operation risk with their risk split by
/// component kind, and per-line (risk, |flow|) data for those points.
std::string compare_report(const Network& network, const RiskTable& risk, const std::vector<SweepResult>& sweeps,
                           const TradeoffPoint& standard);

/// `method,parameter,r_fire,d_tot_mw,objective,status,solve_time_s`, one row per point.
std::string sweep_csv(const SweepResult& sweep);
/// `line_id,r_l,abs_flow_mw,energized`, one row per line of the plan.
std::string line_scatter_csv(const Network& network, const RiskTable& risk, const ShutoffPlan& plan);

/// Stable JSON form of a sweep (points without plans, fingerprints included).
std::string serialize_sweep(const SweepResult& sweep);

}  // namespace gridshed
