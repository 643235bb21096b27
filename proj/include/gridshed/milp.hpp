#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridshed/component.hpp"

namespace gridshed::milp {

enum class VarType { continuous, binary };
enum class RowSense { less_equal, greater_equal, equal };
enum class ObjectiveSense { maximize, minimize };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  VarType type = VarType::continuous;
};

struct Term {
  std::size_t var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::less_equal;
  double rhs = 0.0;
};

struct Objective {
  ObjectiveSense sense = ObjectiveSense::maximize;
  std::vector<Term> terms;
  double constant = 0.0;
};

/// A mixed-binary linear program. Names must be unique; add_* methods check
/// the structural invariants and throw ValidationError.
class MilpProblem {
 public:
  std::size_t add_variable(std::string name, double lower, double upper, VarType type = VarType::continuous);
  std::size_t add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, VarType::binary); }
  std::size_t add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs);
  void set_objective(ObjectiveSense sense, std::vector<Term> terms, double constant = 0.0);
  void set_bounds(std::size_t var, double lower, double upper);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Objective& objective() const { return objective_; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index(std::string_view name) const;  // throws Error when missing
  std::size_t binary_count() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  Objective objective_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

struct SolveOptions {
  double relative_gap = 1e-6;
  double absolute_gap = 1e-9;
  double absolute_feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  std::optional<double> time_limit_s;
  std::optional<std::size_t> node_limit;
  /// Candidate points (values by variable index) tried as incumbents before the
  /// search. Only their binary pattern is used; the continuous part is re-solved.
  std::vector<std::vector<double>> start_points;
};

/// Throws ValidationError on negative tolerances or nonpositive limits.
void check_options(const SolveOptions& options);

enum class SolveStatus { optimal, feasible, infeasible, unbounded, limit_hit, numerical_failure };
std::string to_string(SolveStatus status);

struct SolveStats {
  std::size_t nodes = 0;
  std::size_t lp_solves = 0;
  std::size_t simplex_iterations = 0;
  double wall_time_s = 0.0;
  std::string backend;
  double best_bound = 0.0;  // in the problem's objective sense
  double gap = 0.0;         // relative gap between incumbent and bound
  std::vector<double> incumbent_history;  // objective of each improving incumbent, in order found
};

struct MilpSolution {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;
  std::vector<double> values;  // by variable index
  SolveStats stats;
  std::string diagnostics;

  bool has_values() const { return status == SolveStatus::optimal || status == SolveStatus::feasible ||
                                   (status == SolveStatus::limit_hit && !values.empty()); }
  double value(const MilpProblem& problem, std::string_view name) const;
  std::map<std::string, double> named_values(const MilpProblem& problem) const;
};

/// LP relaxation (binaries relaxed to [0,1]) by bounded-variable primal simplex.
MilpSolution solve_lp_relaxation(const MilpProblem& problem, const SolveOptions& options = {});

/// Solve with the default backend (the one named by GRIDSHED_BACKEND, else "reference").
MilpSolution solve(const MilpProblem& problem, const SolveOptions& options = {});

class Backend {
 public:
  virtual ~Backend() = default;
  virtual MilpSolution solve(const MilpProblem& problem, const SolveOptions& options) const = 0;
};

class UnknownBackendError : public Error {
 public:
  using Error::Error;
};

/// Registry shared by the process. "reference" (cold-start primal simplex per node)
/// and "dual" (parent-basis dual simplex with depth-first plunging) are built in.
void register_backend(const std::string& name, std::shared_ptr<const Backend> backend);
MilpSolution solve_with(std::string_view name, const MilpProblem& problem, const SolveOptions& options = {});
std::vector<std::string> backend_names();
/// Backend that hands the problem to an outside solver process:
/// `command PROBLEM.lp SOLUTION.txt RELATIVE_GAP TIME_LIMIT_S` (time limit 0 = none).
/// The solution file lists `status`, `objective`, `bound`, `nodes` and then one
/// `name value` line per variable. Returned binaries are snapped and the continuous
/// part re-solved by the built-in LP. Registered as "external" at startup when
/// GRIDSHED_EXTERNAL_SOLVER holds a command.
std::shared_ptr<const Backend> make_external_backend(std::string command);
bool has_backend(std::string_view name);
std::string default_backend_name();

/// Independent check of a candidate point against the problem data.
struct FeasibilityReport {
  double max_bound_violation = 0.0;
  double max_row_violation = 0.0;
  double max_integrality_violation = 0.0;
  std::string worst_row;
  bool ok(double feasibility_tol, double integrality_tol) const {
    return max_bound_violation <= feasibility_tol && max_row_violation <= feasibility_tol &&
           max_integrality_violation <= integrality_tol;
  }
};
FeasibilityReport check_point(const MilpProblem& problem, std::span<const double> values);
double evaluate_objective(const MilpProblem& problem, std::span<const double> values);

/// CPLEX LP text form. Numbers use shortest round-trip formatting, so the
/// output is identical across runs and platforms.
std::string write_lp(const MilpProblem& problem);

}  // namespace gridshed::milp
