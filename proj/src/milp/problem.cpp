#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridshed/milp.hpp"

namespace gridshed::milp {

std::size_t MilpProblem::add_variable(std::string name, double lower, double upper, VarType type) {
  if (name.empty()) throw ValidationError("variable name must not be empty");
  if (!std::isfinite(lower) || !std::isfinite(upper)) throw ValidationError("variable " + name + " has an infinite bound");
  if (lower > upper) throw ValidationError("variable " + name + " has lower bound above upper bound");
  if (type == VarType::binary && (lower < 0.0 || upper > 1.0)) {
    throw ValidationError("binary variable " + name + " has bounds outside [0,1]");
  }
  if (by_name_.count(name)) throw ValidationError("duplicate variable name " + name);
  const std::size_t idx = variables_.size();
  by_name_.emplace(name, idx);
  variables_.push_back({std::move(name), lower, upper, type});
  return idx;
}

std::size_t MilpProblem::add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs) {
  if (!std::isfinite(rhs)) throw ValidationError("constraint " + name + " has a non-finite right-hand side");
  for (const auto& t : terms) {
    if (t.var >= variables_.size()) throw ValidationError("constraint " + name + " references an undeclared variable");
    if (!std::isfinite(t.coef)) throw ValidationError("constraint " + name + " has a non-finite coefficient");
  }
  constraints_.push_back({std::move(name), std::move(terms), sense, rhs});
  return constraints_.size() - 1;
}

void MilpProblem::set_objective(ObjectiveSense sense, std::vector<Term> terms, double constant) {
  for (const auto& t : terms) {
    if (t.var >= variables_.size()) throw ValidationError("objective references an undeclared variable");
    if (!std::isfinite(t.coef)) throw ValidationError("objective has a non-finite coefficient");
  }
  objective_ = {sense, std::move(terms), constant};
}

void MilpProblem::set_bounds(std::size_t var, double lower, double upper) {
  auto& v = variables_.at(var);
  if (!std::isfinite(lower) || !std::isfinite(upper) || lower > upper) {
    throw ValidationError("invalid bounds for variable " + v.name);
  }
  if (v.type == VarType::binary && (lower < 0.0 || upper > 1.0)) {
    throw ValidationError("binary variable " + v.name + " has bounds outside [0,1]");
  }
  v.lower = lower;
  v.upper = upper;
}

std::optional<std::size_t> MilpProblem::find(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t MilpProblem::index(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw Error("unknown variable " + std::string(name));
  return *idx;
}

std::size_t MilpProblem::binary_count() const {
  return static_cast<std::size_t>(
      std::count_if(variables_.begin(), variables_.end(), [](const Variable& v) { return v.type == VarType::binary; }));
}

void check_options(const SolveOptions& o) {
  if (!(o.relative_gap >= 0.0) || !(o.absolute_gap >= 0.0) || !(o.absolute_feasibility_tol >= 0.0) ||
      !(o.integrality_tol >= 0.0)) {
    throw ValidationError("solver tolerances must be nonnegative");
  }
  if (o.time_limit_s && !(*o.time_limit_s > 0.0)) throw ValidationError("time limit must be positive");
  if (o.node_limit && *o.node_limit == 0) throw ValidationError("node limit must be positive");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::limit_hit: return "limit_hit";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

double MilpSolution::value(const MilpProblem& problem, std::string_view name) const {
  const auto idx = problem.index(name);
  if (idx >= values.size()) throw Error("solution carries no values");
  return values[idx];
}

std::map<std::string, double> MilpSolution::named_values(const MilpProblem& problem) const {
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < values.size() && j < problem.variables().size(); ++j) {
    out[problem.variables()[j].name] = values[j];
  }
  return out;
}

FeasibilityReport check_point(const MilpProblem& problem, std::span<const double> values) {
  FeasibilityReport report;
  const auto& vars = problem.variables();
  if (values.size() != vars.size()) throw Error("point has the wrong dimension");
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double v = values[j];
    report.max_bound_violation =
        std::max({report.max_bound_violation, vars[j].lower - v, v - vars[j].upper});
    if (vars[j].type == VarType::binary) {
      report.max_integrality_violation = std::max(report.max_integrality_violation, std::abs(v - std::round(v)));
    }
  }
  for (const auto& row : problem.constraints()) {
    double activity = 0.0;
    for (const auto& t : row.terms) activity += t.coef * values[t.var];
    double violation = 0.0;
    switch (row.sense) {
      case RowSense::less_equal: violation = activity - row.rhs; break;
      case RowSense::greater_equal: violation = row.rhs - activity; break;
      case RowSense::equal: violation = std::abs(activity - row.rhs); break;
    }
    if (violation > report.max_row_violation) {
      report.max_row_violation = violation;
      report.worst_row = row.name;
    }
  }
  return report;
}

double evaluate_objective(const MilpProblem& problem, std::span<const double> values) {
  double z = problem.objective().constant;
  for (const auto& t : problem.objective().terms) z += t.coef * values[t.var];
  return z;
}

}  // namespace gridshed::milp
