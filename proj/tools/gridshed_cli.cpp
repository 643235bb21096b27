#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <json.hpp>

#include "gridshed/io.hpp"
#include "gridshed/service.hpp"

using namespace gridshed;

namespace {

/// Flags that are well-formed but do not fit together; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string case_path;
  std::string risk_path;
  double alpha = 0.0;
  double threshold = 0.0;
  std::string method;
  std::string backend;
  double gap = 1e-6;
  double time_limit = 0.0;
  std::string out;
  std::string format;
  std::vector<std::string> pins;
  unsigned seed = 0;  // reserved
  std::string listen = "127.0.0.1:8080";
  unsigned workers = 0;
  std::string store;
};

struct Inputs {
  Network network;
  RiskTable risk;
};

Inputs load_inputs(const Flags& f) {
  auto network = load_case_file(f.case_path);
  auto risk = build_risk_table(network, parse_risk_document(read_text_file(f.risk_path)));
  return {std::move(network), std::move(risk)};
}

SolverSettings solver_settings(const Flags& f) {
  SolverSettings s;
  if (!f.backend.empty()) {
    if (!milp::has_backend(f.backend)) throw UsageError("unknown backend '" + f.backend + "'");
    s.backend = f.backend;
  }
  s.options.relative_gap = f.gap;
  if (f.time_limit > 0.0) s.options.time_limit_s = f.time_limit;
  return s;
}

std::vector<Pin> parse_pins(const Flags& f) {
  std::vector<Pin> pins;
  for (const auto& text : f.pins) {
    try {
      pins.push_back(parse_pin(text));
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
  }
  return pins;
}

void emit(const Flags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(f.out, text);
  }
}

std::string single_row_csv(const ShutoffPlan& plan) {
  SweepResult r;
  r.method = plan.method;
  TradeoffPoint p;
  p.method = plan.method;
  p.parameter = plan.parameter;
  p.status = plan.status;
  p.found = plan.has_solution();
  p.r_fire = plan.r_fire;
  p.d_tot_mw = plan.d_tot_mw;
  p.objective = plan.objective;
  p.solve_time_s = plan.stats.wall_time_s;
  r.points.push_back(p);
  return sweep_csv(r);
}

int finish_plan(const Flags& f, const ShutoffPlan& plan) {
  if (!plan.has_solution()) {
    std::cerr << "error: no plan found (" << milp::to_string(plan.status) << ")";
    if (!plan.diagnostics.empty()) std::cerr << ": " << plan.diagnostics;
    std::cerr << "\n";
    return 1;
  }
  emit(f, f.format == "csv" ? single_row_csv(plan) : serialize_plan(plan));
  return 0;
}

int cmd_validate(const Flags& f) {
  std::vector<std::string> warnings;
  Network network;
  try {
    network = load_case_file(f.case_path, &warnings);
  } catch (const CaseValidationError& e) {
    for (const auto& v : e.violations()) std::cerr << v.entity << " " << v.id << " " << v.rule << ": " << v.message << "\n";
    return 1;
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (!f.risk_path.empty()) build_risk_table(network, parse_risk_document(read_text_file(f.risk_path)));
  std::printf("ok: %zu buses, %zu lines, %zu generators, %zu loads, %zu areas, %.6g MW demand\n",
              network.buses().size(), network.lines().size(), network.generators().size(), network.loads().size(),
              network.areas().size(), network.total_demand_mw());
  return 0;
}

int cmd_risk(const Flags& f) {
  const auto in = load_inputs(f);
  if (f.format == "report") {
    nlohmann::ordered_json j;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : in.risk.entries()) {
      rows.push_back({{"kind", to_string(r.component.kind)}, {"id", r.component.id}, {"risk", r.value}});
    }
    nlohmann::ordered_json areas = nlohmann::ordered_json::array();
    for (const auto& a : in.network.areas()) {
      areas.push_back({{"area_id", a.id}, {"total", area_risk_total(in.risk, in.network, a.id)}});
    }
    j["components"] = rows;
    j["area_totals"] = areas;
    j["standard_operation_risk"] =
        total_system_risk(in.network, in.risk, EnergizationState::all_on(in.network));
    emit(f, j.dump(2) + "\n");
    return 0;
  }
  std::string out = "kind,id,risk\n";
  char buf[64];
  for (const auto& r : in.risk.entries()) {
    std::snprintf(buf, sizeof buf, "%.12g", r.value);
    out += std::string(to_string(r.component.kind)) + "," + std::to_string(r.component.id) + "," + buf + "\n";
  }
  emit(f, out);
  return 0;
}

int cmd_solve(const Flags& f) {
  const auto in = load_inputs(f);
  OpsConfig config;
  config.alpha = f.alpha;
  config.pins = parse_pins(f);
  config.solver = solver_settings(f);
  return finish_plan(f, solve_ops(in.network, in.risk, config));
}

int cmd_mld(const Flags& f) {
  const auto in = load_inputs(f);
  ForcedOffSet forced;
  for (const auto& pin : parse_pins(f)) {
    if (pin.state != PinState::force_off) throw UsageError("mld takes only off pins (the forced-off set)");
    if (!in.network.contains(pin.component)) throw InvalidPinError("unknown component " + to_string(pin.component));
    forced.insert(pin.component);
  }
  return finish_plan(f, solve_mld(in.network, in.risk, forced, solver_settings(f)));
}

int cmd_heuristic(const Flags& f) {
  const auto in = load_inputs(f);
  const auto kind = parse_heuristic_kind(f.method);
  return finish_plan(f, run_heuristic_pipeline(in.network, in.risk, kind, f.threshold, solver_settings(f)));
}

SweepOptions sweep_options(const Flags& f) {
  SweepOptions o;
  o.solver = solver_settings(f);
  o.workers = f.workers;
  o.keep_plans = true;
  return o;
}

SweepResult run_sweep(const Inputs& in, const std::string& method, const SweepOptions& options) {
  if (method == "ops") return sweep_alpha(in.network, in.risk, default_alpha_grid(), options);
  const auto kind = parse_heuristic_kind(method);
  return sweep_threshold(in.network, in.risk, kind, default_threshold_grid(in.network, in.risk, kind), options);
}

int cmd_sweep(const Flags& f) {
  const auto in = load_inputs(f);
  const auto options = sweep_options(f);
  const auto sweep = run_sweep(in, f.method, options);
  if (f.format == "report") {
    const auto standard = standard_operation_point(in.network, in.risk, options.solver);
    emit(f, compare_report(in.network, in.risk, {sweep}, standard));
  } else {
    emit(f, sweep_csv(sweep));
  }
  return 0;
}

int cmd_compare(const Flags& f) {
  const auto in = load_inputs(f);
  const auto options = sweep_options(f);
  std::vector<SweepResult> sweeps;
  for (const char* method : {"ops", "transmission", "area"}) sweeps.push_back(run_sweep(in, method, options));
  if (f.format == "csv") {
    std::string out;
    for (const auto& s : sweeps) {
      const auto csv = sweep_csv(s);
      out += out.empty() ? csv : csv.substr(csv.find('\n') + 1);
    }
    emit(f, out);
    return 0;
  }
  const auto standard = standard_operation_point(in.network, in.risk, options.solver);
  emit(f, compare_report(in.network, in.risk, sweeps, standard));
  return 0;
}

int cmd_serve(const Flags& f) {
  const auto colon = f.listen.rfind(':');
  if (colon == std::string::npos) throw UsageError("--listen must be host:port");
  int port = 0;
  try {
    port = std::stoi(f.listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--listen must be host:port");
  }
  ServiceOptions options;
  options.workers = f.workers == 0 ? 2 : f.workers;
  options.solver = solver_settings(f);
  if (f.time_limit > 0.0) options.solve_timeout_s = f.time_limit;
  if (!f.store.empty()) options.plan_dir = f.store;
  Service service(options);
  const auto host = f.listen.substr(0, colon);
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!service.listen(host, port)) {
    std::cerr << "error: cannot listen on " << f.listen << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wildfire-aware power shut-off planning"};
  app.require_subcommand(1, 1);
  Flags f;

  auto add_inputs = [&](CLI::App* cmd, bool need_risk) {
    cmd->add_option("--case", f.case_path, "Case file (.json or MATPOWER .m)")->required()->check(CLI::ExistingFile);
    auto* risk = cmd->add_option("--risk", f.risk_path, "Risk document")->check(CLI::ExistingFile);
    if (need_risk) risk->required();
    cmd->add_option("--seed", f.seed, "Reserved");
  };
  auto add_solver = [&](CLI::App* cmd) {
    cmd->add_option("--backend", f.backend, "MILP backend (default: GRIDSHED_BACKEND or reference)");
    cmd->add_option("--gap", f.gap, "Relative optimality gap")->check(CLI::NonNegativeNumber);
    cmd->add_option("--time-limit", f.time_limit, "Seconds per solve")->check(CLI::PositiveNumber);
  };
  std::map<const CLI::App*, std::string> default_format;
  auto add_output = [&](CLI::App* cmd, std::vector<std::string> formats) {
    cmd->add_option("--out", f.out, "Output file (default: stdout)");
    default_format[cmd] = formats.front();
    cmd->add_option("--format", f.format, "Output format (default: " + formats.front() + ")")
        ->check(CLI::IsMember(formats));
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a case (and optionally a risk document)");
  add_inputs(validate_cmd, false);

  auto* risk_cmd = app.add_subcommand("risk", "Per-component risk table");
  add_inputs(risk_cmd, true);
  add_output(risk_cmd, {"csv", "report"});

  auto* solve_cmd = app.add_subcommand("solve", "Optimal power shut-off at one alpha");
  add_inputs(solve_cmd, true);
  add_solver(solve_cmd);
  add_output(solve_cmd, {"plan", "csv"});
  solve_cmd->add_option("--alpha", f.alpha, "Risk weight in [0, 1]")->required()->check(CLI::Range(0.0, 1.0));
  solve_cmd->add_option("--pin", f.pins, "kind:id:on|off (repeatable)");

  auto* mld_cmd = app.add_subcommand("mld", "Maximum load delivery with a forced-off set");
  add_inputs(mld_cmd, true);
  add_solver(mld_cmd);
  add_output(mld_cmd, {"plan", "csv"});
  mld_cmd->add_option("--pin", f.pins, "kind:id:off (repeatable)");

  auto* heuristic_cmd = app.add_subcommand("heuristic", "Threshold heuristic, load delivery and island pruning");
  add_inputs(heuristic_cmd, true);
  add_solver(heuristic_cmd);
  add_output(heuristic_cmd, {"plan", "csv"});
  heuristic_cmd->add_option("--method", f.method, "transmission or area")
      ->required()
      ->check(CLI::IsMember({"transmission", "area"}));
  heuristic_cmd->add_option("--threshold", f.threshold, "Risk threshold")->required()->check(CLI::NonNegativeNumber);

  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep over the default grid");
  add_inputs(sweep_cmd, true);
  add_solver(sweep_cmd);
  add_output(sweep_cmd, {"csv", "report"});
  sweep_cmd->add_option("--method", f.method, "ops, transmission or area")
      ->required()
      ->check(CLI::IsMember({"ops", "transmission", "area"}));
  sweep_cmd->add_option("--workers", f.workers, "Parallel solves (default: hardware threads)");

  auto* compare_cmd = app.add_subcommand("compare", "All three sweeps plus standard operation");
  add_inputs(compare_cmd, true);
  add_solver(compare_cmd);
  add_output(compare_cmd, {"report", "csv"});
  compare_cmd->add_option("--workers", f.workers, "Parallel solves (default: hardware threads)");

  auto* serve_cmd = app.add_subcommand("serve", "HTTP service");
  serve_cmd->add_option("--listen", f.listen, "host:port");
  serve_cmd->add_option("--workers", f.workers, "Solver threads (default 2)");
  serve_cmd->add_option("--store", f.store, "Directory for plan files");
  serve_cmd->add_option("--backend", f.backend, "Default MILP backend");
  serve_cmd->add_option("--time-limit", f.time_limit, "Seconds per blocking solve")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (f.format.empty()) {
    for (const auto& [cmd, format] : default_format) {
      if (cmd->parsed()) f.format = format;
    }
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(f);
    if (risk_cmd->parsed()) return cmd_risk(f);
    if (solve_cmd->parsed()) return cmd_solve(f);
    if (mld_cmd->parsed()) return cmd_mld(f);
    if (heuristic_cmd->parsed()) return cmd_heuristic(f);
    if (sweep_cmd->parsed()) return cmd_sweep(f);
    if (compare_cmd->parsed()) return cmd_compare(f);
    if (serve_cmd->parsed()) return cmd_serve(f);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
