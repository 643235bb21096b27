#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gridshed/milp.hpp"
#include "gridshed/network.hpp"
#include "gridshed/risk.hpp"

namespace gridshed {

enum class PinState { force_on, force_off };

/// Operator override of one component's energization.
struct Pin {
  ComponentRef component;
  PinState state = PinState::force_off;

  bool operator==(const Pin&) const = default;
};

std::string to_string(PinState state);
std::string to_string(const Pin& pin);  // "kind:id:on|off"
/// Parses "kind:id:on|off"; throws ParseError.
Pin parse_pin(std::string_view text);

/// A pin naming a missing component or pinning one component twice.
class InvalidPinError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Pins that no energization state can satisfy (e.g. a line forced on into a bus forced off).
class ContradictoryPinsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Throws InvalidPinError or ContradictoryPinsError.
void check_pins(const Network& network, const std::vector<Pin>& pins);

struct SolverSettings {
  std::string backend;  // empty: default backend
  milp::SolveOptions options;
};

struct OpsConfig {
  double alpha = 0.0;
  std::vector<Pin> pins;
  SolverSettings solver;
  /// At alpha 0 (1) the objective ignores risk (load), so optima can tie. When set,
  /// a second solve holds the optimum and picks the least risk (most load) among ties.
  bool break_endpoint_ties = false;
};

/// Angle box |theta| <= theta_max and the big-M constant used to relax line physics.
struct ThetaBound {
  double theta_max = 0.0;
  double relax_constant = 0.0;  // 2 * theta_max
};

/// Sum over lines of the largest angle difference each line can carry at its thermal limit.
ThetaBound theta_bound(const Network& network);

/// MILP plus the variable index of every network quantity (positions follow network order).
/// Power variables are per unit on the network base; angles are radians.
struct OpsModel {
  milp::MilpProblem problem;
  std::vector<std::size_t> z_bus, z_gen, z_line, x_load, p_gen, p_line, theta;
  ThetaBound bound;
  double alpha = 0.0;
};

/// Builds the shut-off MILP. Loads and risks enter the objective as
/// (1-alpha) * sum x_d w_d D_d / base - alpha * (risk of everything energized).
/// `forced_off` members get z = 0 (x = 0 for loads), like off pins.
OpsModel build_ops(const Network& network, const RiskTable& risk, const OpsConfig& config,
                   const std::set<ComponentRef>& forced_off = {});

struct ShutoffPlan {
  std::string method = "ops";
  double parameter = 0.0;  // alpha for ops, threshold for heuristics
  double alpha = 0.0;
  milp::SolveStatus status = milp::SolveStatus::infeasible;

  std::map<int, bool> bus_on, generator_on, line_on;
  std::map<int, double> load_served;  // x_d in [0,1]
  std::map<int, double> generation_mw, flow_mw, theta_rad;

  double d_tot_mw = 0.0;
  double d_weighted_mw = 0.0;
  double r_fire = 0.0;
  double objective = 0.0;

  std::vector<Pin> pins;
  std::vector<ComponentRef> forced_off;
  milp::SolveStats stats;
  std::string diagnostics;

  bool has_solution() const { return !bus_on.empty(); }
  EnergizationState state() const;
};

/// Plan objective recomputed from its own totals.
double plan_objective(const Network& network, double alpha, double d_weighted_mw, double r_fire);

/// Extracts a plan from a MILP solution of `model`; totals recomputed from the plan.
ShutoffPlan extract_plan(const Network& network, const RiskTable& risk, const OpsModel& model,
                         const milp::MilpSolution& solution);

/// Builds, solves and extracts. Throws InvalidPinError / ContradictoryPinsError for bad pins.
ShutoffPlan solve_ops(const Network& network, const RiskTable& risk, const OpsConfig& config);

struct PlanEvaluation {
  double d_tot_mw = 0.0;
  double d_weighted_mw = 0.0;
  double r_fire = 0.0;
  double max_balance_residual_mw = 0.0;
  double max_limit_violation_mw = 0.0;
  std::vector<std::string> violations;  // entries above the reporting tolerance
  std::vector<Island> islands;

  bool clean(double tol_mw = 1e-6) const {
    return max_balance_residual_mw <= tol_mw && max_limit_violation_mw <= tol_mw;
  }
};

/// Independent re-check of a plan against the network physics. Never throws on violations.
PlanEvaluation evaluate_plan(const Network& network, const RiskTable& risk, const ShutoffPlan& plan,
                             double report_tol_mw = 1e-6);

/// Stable JSON form of a plan (field order fixed, no timing data).
std::string serialize_plan(const ShutoffPlan& plan);

}  // namespace gridshed
