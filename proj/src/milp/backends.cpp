#include <cstdlib>
#include <map>
#include <mutex>

#include "branch_and_bound.hpp"

namespace gridshed::milp {

namespace {

class BranchAndBoundBackend : public Backend {
 public:
  BranchAndBoundBackend(detail::Strategy strategy, std::string name) : strategy_(strategy), name_(std::move(name)) {}
  MilpSolution solve(const MilpProblem& problem, const SolveOptions& options) const override {
    return detail::branch_and_bound(problem, options, strategy_, name_);
  }

 private:
  detail::Strategy strategy_;
  std::string name_;
};

struct Registry {
  std::mutex mutex;
  std::map<std::string, std::shared_ptr<const Backend>, std::less<>> backends;

  Registry() {
    backends["reference"] = std::make_shared<BranchAndBoundBackend>(detail::Strategy::cold_primal, "reference");
    backends["dual"] = std::make_shared<BranchAndBoundBackend>(detail::Strategy::warm_dual, "dual");
    if (const char* command = std::getenv("GRIDSHED_EXTERNAL_SOLVER"); command && *command) {
      backends["external"] = make_external_backend(command);
    }
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_backend(const std::string& name, std::shared_ptr<const Backend> backend) {
  if (name.empty() || !backend) throw ValidationError("backend registration needs a name and an implementation");
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.backends[name] = std::move(backend);
}

bool has_backend(std::string_view name) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  return r.backends.find(name) != r.backends.end();
}

std::vector<std::string> backend_names() {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> out;
  for (const auto& [name, _] : r.backends) out.push_back(name);
  return out;
}

std::string default_backend_name() {
  if (const char* env = std::getenv("GRIDSHED_BACKEND"); env && *env) return env;
  return "reference";
}

MilpSolution solve_with(std::string_view name, const MilpProblem& problem, const SolveOptions& options) {
  std::shared_ptr<const Backend> backend;
  {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.backends.find(name);
    if (it == r.backends.end()) throw UnknownBackendError("unknown solver backend '" + std::string(name) + "'");
    backend = it->second;
  }
  auto solution = backend->solve(problem, options);
  if (solution.stats.backend.empty()) solution.stats.backend = std::string(name);
  return solution;
}

MilpSolution solve(const MilpProblem& problem, const SolveOptions& options) {
  return solve_with(default_backend_name(), problem, options);
}

MilpSolution solve_lp_relaxation(const MilpProblem& problem, const SolveOptions& options) {
  return detail::solve_relaxation(problem, options);
}

}  // namespace gridshed::milp
