#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "gridshed/pareto.hpp"

namespace gridshed {

struct ServiceOptions {
  unsigned workers = 2;  // solver threads shared by solves and sweep jobs
  /// When set, every stored solution is also written to <plan_dir>/<case_id>/<solution_id>.plan.json.
  std::optional<std::filesystem::path> plan_dir;
  /// Upper bound on a single blocking solve; it becomes the solver time limit.
  double solve_timeout_s = 300.0;
  SolverSettings solver;  // defaults for requests that name no backend
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

/// In-process session store behind the HTTP routes
///   POST /cases                       upload {case, risk}            201 | 400
///   GET  /cases/{id}                                                 200 | 404
///   POST /cases/{id}/solve            {alpha, pins, backend?}        200 | 404 | 422 | 409
///   GET  /cases/{id}/solutions/{sid}  stored plan, byte-identical    200 | 404
///   POST /cases/{id}/sweeps           {method, grid?, backend?}      202 | 404 | 422
///   GET  /sweeps/{sid}                running(progress) | done | failed, 404
/// Single solves block and take priority over queued sweep jobs; sweeps run in the
/// background on the same worker pool.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Routes one request. Thread-safe.
  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Binds and serves until stop(). Returns false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds to a free port, serves on a background thread and returns the port (-1 on failure).
  int start_background(const std::string& host);
  void stop();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace gridshed
