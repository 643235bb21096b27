#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "gridshed/milp.hpp"

namespace gridshed::milp {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string quoted(const fs::path& path) {
  std::string out = "'";
  for (char c : path.string()) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

// Private scratch directory, removed on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<unsigned long> counter{0};
    const auto tick = Clock::now().time_since_epoch().count();
    const auto thread = std::hash<std::thread::id>{}(std::this_thread::get_id());
    for (int attempt = 0;; ++attempt) {
      path_ = fs::temp_directory_path() /
              ("gridshed-" + std::to_string(tick) + "-" + std::to_string(thread % 100000) + "-" +
               std::to_string(counter++));
      if (fs::create_directory(path_)) break;
      if (attempt > 100) throw Error("cannot create a scratch directory for the external solver");
    }
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string tail_of(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto text = ss.str();
  if (text.size() > 400) text = text.substr(text.size() - 400);
  while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.pop_back();
  return text;
}

std::optional<SolveStatus> parse_status(const std::string& word) {
  if (word == "optimal") return SolveStatus::optimal;
  if (word == "feasible") return SolveStatus::feasible;
  if (word == "limit_hit") return SolveStatus::limit_hit;
  if (word == "infeasible") return SolveStatus::infeasible;
  if (word == "unbounded") return SolveStatus::unbounded;
  if (word == "numerical_failure") return SolveStatus::numerical_failure;
  return std::nullopt;
}

class ExternalBackend : public Backend {
 public:
  explicit ExternalBackend(std::string command) : command_(std::move(command)) {}

  MilpSolution solve(const MilpProblem& problem, const SolveOptions& options) const override {
    check_options(options);
    const auto start = Clock::now();
    MilpSolution out;
    out.stats.backend = "external";
    ScratchDir dir;
    const auto lp = dir.path() / "problem.lp";
    const auto sol = dir.path() / "solution.txt";
    const auto err = dir.path() / "stderr.txt";
    {
      std::ofstream f(lp);
      f << write_lp(problem);
    }
    std::ostringstream cmd;
    cmd.precision(17);
    cmd << command_ << ' ' << quoted(lp) << ' ' << quoted(sol) << ' ' << options.relative_gap << ' '
        << options.time_limit_s.value_or(0.0) << " >/dev/null 2>" << quoted(err);
    const int rc = std::system(cmd.str().c_str());
    std::ifstream in(sol);
    if (rc != 0 || !in) {
      out.status = SolveStatus::numerical_failure;
      out.diagnostics = "external solver failed (exit " + std::to_string(rc) + "): " + tail_of(err);
      out.stats.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
      return out;
    }

    std::string key;
    std::string status_word;
    double objective = NAN, bound = NAN;
    std::size_t nodes = 0;
    std::vector<double> values(problem.variables().size(), 0.0);
    std::vector<bool> seen(values.size(), false);
    while (in >> key) {
      if (key == "status") {
        in >> status_word;
      } else if (key == "objective" || key == "bound") {
        std::string text;
        in >> text;
        const double v = text == "nan" ? NAN : std::strtod(text.c_str(), nullptr);
        (key == "objective" ? objective : bound) = v;
      } else if (key == "nodes") {
        in >> nodes;
      } else {
        double v = 0.0;
        in >> v;
        if (auto j = problem.find(key)) {
          values[*j] = v;
          seen[*j] = true;
        }
      }
    }
    const auto status = parse_status(status_word);
    out.stats.nodes = nodes;
    if (!status) {
      out.status = SolveStatus::numerical_failure;
      out.diagnostics = "external solver wrote an unreadable solution file";
      return out;
    }
    out.status = *status;
    const bool has_point = std::isfinite(objective) &&
                           (out.status == SolveStatus::optimal || out.status == SolveStatus::feasible ||
                            out.status == SolveStatus::limit_hit);
    if (has_point) {
      for (std::size_t j = 0; j < seen.size(); ++j) {
        if (!seen[j]) {
          out.status = SolveStatus::numerical_failure;
          out.diagnostics = "external solution misses variable " + problem.variables()[j].name;
          return out;
        }
      }
      // Snap binaries, then re-solve the continuous part with them fixed.
      MilpProblem fixed = problem;
      for (std::size_t j = 0; j < values.size(); ++j) {
        if (problem.variables()[j].type != VarType::binary) continue;
        values[j] = values[j] >= 0.5 ? 1.0 : 0.0;
        fixed.set_bounds(j, values[j], values[j]);
      }
      const auto polished = solve_lp_relaxation(fixed, options);
      out.stats.lp_solves = 1;
      out.stats.simplex_iterations = polished.stats.simplex_iterations;
      if (polished.status == SolveStatus::optimal) {
        out.values = polished.values;
      } else {
        out.values = values;
      }
      out.objective = evaluate_objective(problem, out.values);
      out.stats.best_bound = std::isfinite(bound) ? bound : out.objective;
      out.stats.gap = std::abs(out.stats.best_bound - out.objective) / std::max(1e-10, std::abs(out.objective));
      if (out.status == SolveStatus::optimal) out.stats.gap = std::min(out.stats.gap, options.relative_gap);
      out.stats.incumbent_history = {out.objective};
    }
    if (out.status == SolveStatus::limit_hit) out.diagnostics = "external solver stopped at its limit";
    out.stats.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
  }

 private:
  std::string command_;
};

}  // namespace

std::shared_ptr<const Backend> make_external_backend(std::string command) {
  if (command.empty()) throw ValidationError("external solver command is empty");
  return std::make_shared<ExternalBackend>(std::move(command));
}

}  // namespace gridshed::milp
