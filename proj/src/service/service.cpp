#include "gridshed/service.hpp"

#include <httplib.h>

#include <atomic>
#include <future>
#include <json.hpp>
#include <map>
#include <mutex>
#include <thread>

#include "gridshed/io.hpp"
#include "worker_pool.hpp"

namespace gridshed {

namespace {

using nlohmann::ordered_json;
using json = nlohmann::json;

struct HttpError {
  int status;
  std::string message;
};

HttpResponse reply(int status, const ordered_json& body) { return {status, body.dump(2) + "\n"}; }

HttpResponse error_reply(int status, const std::string& message) { return reply(status, {{"error", message}}); }

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) out.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return out;
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw HttpError{400, "request body must be a JSON object"};
    return j;
  } catch (const json::parse_error& e) {
    throw HttpError{400, std::string("malformed request body: ") + e.what()};
  }
}

Pin pin_from_json(const json& j) {
  if (j.is_string()) return parse_pin(j.get<std::string>());
  if (j.is_object() && j.contains("kind") && j.contains("id") && j.contains("state") && j["kind"].is_string() &&
      j["id"].is_number_integer() && j["state"].is_string()) {
    return parse_pin(j["kind"].get<std::string>() + ":" + std::to_string(j["id"].get<int>()) + ":" +
                     j["state"].get<std::string>());
  }
  throw ParseError("pin must be \"kind:id:on|off\" or {kind, id, state}");
}

std::optional<double> optional_number(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw HttpError{422, std::string(key) + " must be a number"};
  return it->get<double>();
}

std::optional<std::string> optional_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw HttpError{422, std::string(key) + " must be a string"};
  return it->get<std::string>();
}

ordered_json summary_json(const Network& network, const RiskTable& risk) {
  return {{"buses", network.buses().size()},
          {"lines", network.lines().size()},
          {"generators", network.generators().size()},
          {"loads", network.loads().size()},
          {"areas", network.areas().size()},
          {"total_demand_mw", network.total_demand_mw()},
          {"standard_operation_risk", total_system_risk(network, risk, EnergizationState::all_on(network))}};
}

ordered_json islands_json(const std::vector<Island>& islands) {
  ordered_json out = ordered_json::array();
  for (const auto& i : islands) {
    out.push_back({{"buses", i.buses}, {"lines", i.lines}, {"generators", i.generators}, {"loads", i.loads}});
  }
  return out;
}

ordered_json plan_summary(const Network& network, const RiskTable& risk, const ShutoffPlan& plan) {
  ordered_json j;
  j["method"] = plan.method;
  j["alpha"] = plan.alpha;
  j["status"] = milp::to_string(plan.status);
  ordered_json pins = ordered_json::array();
  for (const auto& p : plan.pins) pins.push_back(to_string(p));
  j["pins"] = pins;
  if (!plan.has_solution()) {
    j["diagnostics"] = plan.diagnostics;
    return j;
  }
  j["objective"] = plan.objective;
  j["d_tot_mw"] = plan.d_tot_mw;
  j["r_fire"] = plan.r_fire;
  ordered_json buses = ordered_json::array(), gens = ordered_json::array(), lines = ordered_json::array(),
               loads = ordered_json::array();
  for (const auto& [id, on] : plan.bus_on) buses.push_back({{"id", id}, {"on", on}});
  for (const auto& [id, on] : plan.generator_on) {
    gens.push_back({{"id", id}, {"on", on}, {"p_mw", plan.generation_mw.at(id)}});
  }
  for (const auto& [id, on] : plan.line_on) lines.push_back({{"id", id}, {"on", on}, {"flow_mw", plan.flow_mw.at(id)}});
  for (const auto& [id, x] : plan.load_served) loads.push_back({{"id", id}, {"served_fraction", x}});
  j["buses"] = buses;
  j["generators"] = gens;
  j["lines"] = lines;
  j["loads"] = loads;
  const auto check = evaluate_plan(network, risk, plan);
  j["islands"] = islands_json(check.islands);
  j["evaluation"] = {{"max_balance_residual_mw", check.max_balance_residual_mw},
                     {"max_limit_violation_mw", check.max_limit_violation_mw},
                     {"violations", check.violations}};
  if (!plan.diagnostics.empty()) j["diagnostics"] = plan.diagnostics;
  return j;
}

struct Session {
  std::string id;
  std::shared_ptr<const Network> network;
  std::shared_ptr<const RiskTable> risk;
  std::string case_text;

  std::mutex mutex;
  std::map<std::string, std::string> solutions;  // id -> serialized plan, never modified
  std::vector<std::string> order;
  int next_solution = 1;
};

struct SweepJob {
  std::string id;
  std::string case_id;
  std::string method;
  std::size_t total = 0;
  std::atomic<std::size_t> finished{0};

  std::mutex mutex;
  std::string status = "running";
  std::string error;
  ordered_json result;
};

}  // namespace

struct Service::State {
  explicit State(ServiceOptions o) : options(std::move(o)), pool(options.workers) {}

  ServiceOptions options;
  std::mutex mutex;
  std::map<std::string, std::shared_ptr<Session>> cases;
  std::map<std::string, std::shared_ptr<SweepJob>> sweeps;
  int next_case = 1;
  int next_sweep = 1;

  std::unique_ptr<httplib::Server> server;
  std::thread server_thread;

  // Destroyed first: joins running solver tasks while the stores above still exist.
  detail::WorkerPool pool;

  std::shared_ptr<Session> session(const std::string& id) {
    std::lock_guard lock(mutex);
    auto it = cases.find(id);
    if (it == cases.end()) throw HttpError{404, "unknown case " + id};
    return it->second;
  }

  HttpResponse upload(const json& body);
  HttpResponse get_case(const std::string& id);
  HttpResponse solve(const std::string& id, const json& body);
  HttpResponse get_solution(const std::string& id, const std::string& sid);
  HttpResponse start_sweep(const std::string& id, const json& body);
  HttpResponse get_sweep(const std::string& sid);
};

HttpResponse Service::State::upload(const json& body) {
  if (!body.contains("case") || !body["case"].is_object()) throw HttpError{400, "body needs a 'case' document"};
  if (!body.contains("risk") || !body["risk"].is_object()) throw HttpError{400, "body needs a 'risk' document"};
  auto session = std::make_shared<Session>();
  try {
    session->network = std::make_shared<const Network>(parse_case(body["case"].dump()));
  } catch (const CaseValidationError& e) {
    ordered_json list = ordered_json::array();
    for (const auto& v : e.violations()) {
      list.push_back({{"entity", v.entity}, {"id", v.id}, {"rule", v.rule}, {"message", v.message}});
    }
    return reply(400, {{"error", e.what()}, {"violations", list}});
  } catch (const Error& e) {
    return reply(400, {{"error", e.what()}, {"violations", ordered_json::array({{{"entity", "case"}, {"message", e.what()}}})}});
  }
  try {
    const auto input = parse_risk_document(body["risk"].dump());
    session->risk = std::make_shared<const RiskTable>(build_risk_table(*session->network, input));
  } catch (const Error& e) {
    return reply(400, {{"error", e.what()}, {"violations", ordered_json::array({{{"entity", "risk"}, {"message", e.what()}}})}});
  }
  session->case_text = serialize_case(*session->network);
  {
    std::lock_guard lock(mutex);
    session->id = "c" + std::to_string(next_case++);
    cases[session->id] = session;
  }
  return reply(201, {{"case_id", session->id},
                     {"name", session->network->name()},
                     {"summary", summary_json(*session->network, *session->risk)},
                     {"violations", ordered_json::array()}});
}

HttpResponse Service::State::get_case(const std::string& id) {
  auto s = session(id);
  ordered_json risk = ordered_json::array();
  for (const auto& r : s->risk->entries()) {
    risk.push_back({{"kind", to_string(r.component.kind)}, {"id", r.component.id}, {"risk", r.value}});
  }
  std::vector<std::string> solutions;
  {
    std::lock_guard lock(s->mutex);
    solutions = s->order;
  }
  return reply(200, {{"case_id", s->id},
                     {"name", s->network->name()},
                     {"summary", summary_json(*s->network, *s->risk)},
                     {"case", ordered_json::parse(s->case_text)},
                     {"risk", risk},
                     {"solutions", solutions}});
}

HttpResponse Service::State::solve(const std::string& id, const json& body) {
  auto s = session(id);
  OpsConfig config;
  config.solver = options.solver;
  const auto alpha = optional_number(body, "alpha");
  if (!alpha) throw HttpError{422, "alpha is required"};
  if (!(*alpha >= 0.0 && *alpha <= 1.0)) throw HttpError{422, "alpha must lie in [0, 1]"};
  config.alpha = *alpha;
  if (auto it = body.find("pins"); it != body.end() && !it->is_null()) {
    if (!it->is_array()) throw HttpError{422, "pins must be an array"};
    for (const auto& p : *it) {
      try {
        config.pins.push_back(pin_from_json(p));
      } catch (const ParseError& e) {
        throw HttpError{422, e.what()};
      }
    }
  }
  if (auto backend = optional_string(body, "backend")) {
    if (!milp::has_backend(*backend)) throw HttpError{422, "unknown backend " + *backend};
    config.solver.backend = *backend;
  }
  if (auto gap = optional_number(body, "gap")) config.solver.options.relative_gap = *gap;
  double limit = options.solve_timeout_s;
  if (auto t = optional_number(body, "time_limit_s")) limit = std::min(limit, *t);
  config.solver.options.time_limit_s = limit;
  try {
    check_pins(*s->network, config.pins);
    milp::check_options(config.solver.options);
  } catch (const ContradictoryPinsError& e) {
    throw HttpError{409, e.what()};
  } catch (const ValidationError& e) {
    throw HttpError{422, e.what()};
  }

  auto task = std::make_shared<std::packaged_task<ShutoffPlan()>>(
      [s, config] { return solve_ops(*s->network, *s->risk, config); });
  auto future = task->get_future();
  pool.submit([task] { (*task)(); }, true);
  ShutoffPlan plan;
  try {
    plan = future.get();
  } catch (const ContradictoryPinsError& e) {
    throw HttpError{409, e.what()};
  } catch (const ValidationError& e) {
    throw HttpError{422, e.what()};
  } catch (const std::future_error&) {
    throw HttpError{503, "service is shutting down"};
  }

  const auto text = serialize_plan(plan);
  std::string sid;
  {
    std::lock_guard lock(s->mutex);
    sid = "p" + std::to_string(s->next_solution++);
    s->solutions.emplace(sid, text);
    s->order.push_back(sid);
  }
  if (options.plan_dir) {
    const auto dir = *options.plan_dir / s->id;
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / (sid + ".plan.json"), text);
  }
  auto out = plan_summary(*s->network, *s->risk, plan);
  ordered_json j;
  j["case_id"] = s->id;
  j["solution_id"] = sid;
  for (auto& [key, value] : out.items()) j[key] = value;
  return reply(200, j);
}

HttpResponse Service::State::get_solution(const std::string& id, const std::string& sid) {
  auto s = session(id);
  std::lock_guard lock(s->mutex);
  auto it = s->solutions.find(sid);
  if (it == s->solutions.end()) throw HttpError{404, "unknown solution " + sid};
  return {200, it->second};
}

HttpResponse Service::State::start_sweep(const std::string& id, const json& body) {
  auto s = session(id);
  const std::string method = optional_string(body, "method").value_or("ops");
  std::optional<HeuristicKind> kind;
  if (method == "transmission" || method == "area") {
    kind = parse_heuristic_kind(method);
  } else if (method != "ops") {
    throw HttpError{422, "method must be ops, transmission or area"};
  }
  std::vector<double> grid;
  if (auto it = body.find("grid"); it != body.end() && !it->is_null()) {
    if (!it->is_array() || it->empty()) throw HttpError{422, "grid must be a nonempty array of numbers"};
    for (const auto& v : *it) {
      if (!v.is_number()) throw HttpError{422, "grid must be a nonempty array of numbers"};
      grid.push_back(v.get<double>());
    }
  } else {
    grid = kind ? default_threshold_grid(*s->network, *s->risk, *kind) : default_alpha_grid();
  }
  if (!kind) {
    for (double a : grid) {
      if (!(a >= 0.0 && a <= 1.0)) throw HttpError{422, "alpha grid values must lie in [0, 1]"};
    }
  }
  SweepOptions sweep_options;
  sweep_options.solver = options.solver;
  if (auto backend = optional_string(body, "backend")) {
    if (!milp::has_backend(*backend)) throw HttpError{422, "unknown backend " + *backend};
    sweep_options.solver.backend = *backend;
  }
  sweep_options.workers = 1;
  sweep_options.keep_plans = false;

  auto job = std::make_shared<SweepJob>();
  job->case_id = s->id;
  job->method = method;
  job->total = grid.size();
  {
    std::lock_guard lock(mutex);
    job->id = "s" + std::to_string(next_sweep++);
    sweeps[job->id] = job;
  }
  sweep_options.progress = [job](std::size_t done, std::size_t) { job->finished = done; };
  pool.submit(
      [s, job, kind, grid, sweep_options] {
        try {
          const auto result = kind ? sweep_threshold(*s->network, *s->risk, *kind, grid, sweep_options)
                                   : sweep_alpha(*s->network, *s->risk, grid, sweep_options);
          ordered_json front = ordered_json::array();
          for (const auto& p : pareto_front(result.points)) {
            front.push_back({{"parameter", p.parameter}, {"r_fire", p.r_fire}, {"d_tot_mw", p.d_tot_mw}});
          }
          std::size_t failed = 0;
          for (const auto& p : result.points) failed += p.has_solution() ? 0 : 1;
          std::lock_guard lock(job->mutex);
          job->result = ordered_json::parse(serialize_sweep(result));
          job->result["pareto_front"] = front;
          job->result["failed_points"] = failed;
          job->status = "done";
        } catch (const std::exception& e) {
          std::lock_guard lock(job->mutex);
          job->status = "failed";
          job->error = e.what();
        }
      },
      false);
  return reply(202, {{"sweep_id", job->id}, {"case_id", s->id}, {"method", method}, {"status", "running"}});
}

HttpResponse Service::State::get_sweep(const std::string& sid) {
  std::shared_ptr<SweepJob> job;
  {
    std::lock_guard lock(mutex);
    auto it = sweeps.find(sid);
    if (it == sweeps.end()) throw HttpError{404, "unknown sweep " + sid};
    job = it->second;
  }
  std::lock_guard lock(job->mutex);
  ordered_json j;
  j["sweep_id"] = job->id;
  j["case_id"] = job->case_id;
  j["method"] = job->method;
  j["status"] = job->status;
  const double fraction = job->total == 0 ? 1.0 : static_cast<double>(job->finished) / job->total;
  j["progress"] = job->status == "done" ? 1.0 : fraction;
  if (job->status == "done") j["result"] = job->result;
  if (job->status == "failed") j["error"] = job->error;
  return reply(200, j);
}

Service::Service(ServiceOptions options) : state_(std::make_unique<State>(std::move(options))) {}

Service::~Service() {
  stop();
}

HttpResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  const auto seg = split_path(path);
  const bool get = method == "GET";
  const bool post = method == "POST";
  try {
    if (seg.size() == 1 && seg[0] == "cases") {
      if (post) return state_->upload(parse_body(body));
      return error_reply(405, "use POST");
    }
    if (seg.size() == 2 && seg[0] == "cases") {
      if (get) return state_->get_case(seg[1]);
      return error_reply(405, "use GET");
    }
    if (seg.size() == 3 && seg[0] == "cases" && seg[2] == "solve") {
      if (post) return state_->solve(seg[1], parse_body(body));
      return error_reply(405, "use POST");
    }
    if (seg.size() == 4 && seg[0] == "cases" && seg[2] == "solutions") {
      if (get) return state_->get_solution(seg[1], seg[3]);
      return error_reply(405, "use GET");
    }
    if (seg.size() == 3 && seg[0] == "cases" && seg[2] == "sweeps") {
      if (post) return state_->start_sweep(seg[1], parse_body(body));
      return error_reply(405, "use POST");
    }
    if (seg.size() == 2 && seg[0] == "sweeps") {
      if (get) return state_->get_sweep(seg[1]);
      return error_reply(405, "use GET");
    }
    return error_reply(404, "no route for " + std::string(path));
  } catch (const HttpError& e) {
    return error_reply(e.status, e.message);
  } catch (const milp::UnknownBackendError& e) {
    return error_reply(422, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

namespace {

void attach_routes(httplib::Server& server, Service& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
}

}  // namespace

bool Service::listen(const std::string& host, int port) {
  state_->server = std::make_unique<httplib::Server>();
  state_->server->new_task_queue = [this] { return new httplib::ThreadPool(std::max(2u, state_->options.workers * 2)); };
  attach_routes(*state_->server, *this);
  return state_->server->listen(host, port);
}

int Service::start_background(const std::string& host) {
  state_->server = std::make_unique<httplib::Server>();
  attach_routes(*state_->server, *this);
  const int port = state_->server->bind_to_any_port(host);
  if (port < 0) return -1;
  state_->server_thread = std::thread([this] { state_->server->listen_after_bind(); });
  return port;
}

void Service::stop() {
  if (state_->server) state_->server->stop();
  if (state_->server_thread.joinable()) state_->server_thread.join();
}

}  // namespace gridshed
