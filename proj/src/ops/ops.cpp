#include <algorithm>
#include <cmath>

#include "gridshed/ops.hpp"

namespace gridshed {

using milp::RowSense;
using milp::Term;

ThetaBound theta_bound(const Network& network) {
  double sum = 0.0;
  for (const auto& line : network.lines()) {
    sum += line.thermal_limit_mw / (network.base_mva() * line.susceptance_pu);
  }
  // An empty network still needs a positive box.
  if (sum <= 0.0) sum = 1.0;
  return {sum, 2.0 * sum};
}

OpsModel build_ops(const Network& network, const RiskTable& risk, const OpsConfig& config,
                   const std::set<ComponentRef>& forced_off) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  check_pins(network, config.pins);
  for (const auto& ref : forced_off) {
    if (!network.contains(ref)) throw ValidationError("forced-off set references unknown component " + to_string(ref));
  }

  OpsModel m;
  m.alpha = config.alpha;
  m.bound = theta_bound(network);
  auto& p = m.problem;
  const double base = network.base_mva();
  const double alpha = config.alpha;
  const double big_m = m.bound.relax_constant;

  for (const auto& b : network.buses()) m.z_bus.push_back(p.add_binary("z_bus_" + std::to_string(b.id)));
  for (const auto& g : network.generators()) m.z_gen.push_back(p.add_binary("z_gen_" + std::to_string(g.id)));
  for (const auto& l : network.lines()) m.z_line.push_back(p.add_binary("z_line_" + std::to_string(l.id)));
  for (const auto& d : network.loads()) m.x_load.push_back(p.add_variable("x_load_" + std::to_string(d.id), 0.0, 1.0));
  for (const auto& g : network.generators()) {
    m.p_gen.push_back(p.add_variable("p_gen_" + std::to_string(g.id), 0.0, g.p_max_mw / base));
  }
  for (const auto& l : network.lines()) {
    const double cap = l.thermal_limit_mw / base;
    m.p_line.push_back(p.add_variable("p_line_" + std::to_string(l.id), -cap, cap));
  }
  for (const auto& b : network.buses()) {
    m.theta.push_back(p.add_variable("theta_" + std::to_string(b.id), -m.bound.theta_max, m.bound.theta_max));
  }

  // Pins and forced-off components become fixed bounds.
  auto variable_of = [&](const ComponentRef& ref) -> std::size_t {
    switch (ref.kind) {
      case ComponentKind::bus: return m.z_bus[network.bus_index(ref.id)];
      case ComponentKind::generator: return m.z_gen[network.generator_index(ref.id)];
      case ComponentKind::line: return m.z_line[network.line_index(ref.id)];
      case ComponentKind::load: return m.x_load[network.load_index(ref.id)];
    }
    return 0;
  };
  for (const auto& pin : config.pins) {
    const auto var = variable_of(pin.component);
    if (pin.state == PinState::force_off) {
      p.set_bounds(var, 0.0, 0.0);
    } else if (pin.component.kind != ComponentKind::load) {
      p.set_bounds(var, 1.0, 1.0);
    }
  }
  for (const auto& ref : forced_off) p.set_bounds(variable_of(ref), 0.0, 0.0);

  // Coupling: loads, generators and both line ends need their bus.
  for (std::size_t d = 0; d < network.loads().size(); ++d) {
    const auto& load = network.loads()[d];
    p.add_constraint("load_bus_" + std::to_string(load.id),
                     {{m.x_load[d], 1.0}, {m.z_bus[network.bus_index(load.bus)], -1.0}}, RowSense::less_equal, 0.0);
  }
  for (std::size_t g = 0; g < network.generators().size(); ++g) {
    const auto& gen = network.generators()[g];
    p.add_constraint("gen_bus_" + std::to_string(gen.id),
                     {{m.z_gen[g], 1.0}, {m.z_bus[network.bus_index(gen.bus)], -1.0}}, RowSense::less_equal, 0.0);
  }
  for (std::size_t l = 0; l < network.lines().size(); ++l) {
    const auto& line = network.lines()[l];
    p.add_constraint("line_from_bus_" + std::to_string(line.id),
                     {{m.z_line[l], 1.0}, {m.z_bus[network.bus_index(line.from_bus)], -1.0}}, RowSense::less_equal, 0.0);
    p.add_constraint("line_to_bus_" + std::to_string(line.id),
                     {{m.z_line[l], 1.0}, {m.z_bus[network.bus_index(line.to_bus)], -1.0}}, RowSense::less_equal, 0.0);
  }

  // Generation limits switched by z_g.
  for (std::size_t g = 0; g < network.generators().size(); ++g) {
    const auto& gen = network.generators()[g];
    p.add_constraint("gen_min_" + std::to_string(gen.id), {{m.p_gen[g], 1.0}, {m.z_gen[g], -gen.p_min_mw / base}},
                     RowSense::greater_equal, 0.0);
    p.add_constraint("gen_max_" + std::to_string(gen.id), {{m.p_gen[g], 1.0}, {m.z_gen[g], -gen.p_max_mw / base}},
                     RowSense::less_equal, 0.0);
  }

  // DC flow, relaxed by big-M when the line is off; rows divided by the susceptance.
  for (std::size_t l = 0; l < network.lines().size(); ++l) {
    const auto& line = network.lines()[l];
    const auto i = m.theta[network.bus_index(line.from_bus)];
    const auto j = m.theta[network.bus_index(line.to_bus)];
    const double inv_b = 1.0 / line.susceptance_pu;
    const std::string id = std::to_string(line.id);
    p.add_constraint("flow_upper_" + id, {{m.p_line[l], inv_b}, {i, -1.0}, {j, 1.0}, {m.z_line[l], big_m}},
                     RowSense::less_equal, big_m);
    p.add_constraint("flow_lower_" + id, {{m.p_line[l], inv_b}, {i, -1.0}, {j, 1.0}, {m.z_line[l], -big_m}},
                     RowSense::greater_equal, -big_m);
    const double cap = line.thermal_limit_mw / base;
    p.add_constraint("thermal_upper_" + id, {{m.p_line[l], 1.0}, {m.z_line[l], -cap}}, RowSense::less_equal, 0.0);
    p.add_constraint("thermal_lower_" + id, {{m.p_line[l], 1.0}, {m.z_line[l], cap}}, RowSense::greater_equal, 0.0);
  }

  // Nodal balance: generation + inflow - outflow = served demand.
  std::vector<std::vector<Term>> balance(network.buses().size());
  for (std::size_t g = 0; g < network.generators().size(); ++g) {
    balance[network.bus_index(network.generators()[g].bus)].push_back({m.p_gen[g], 1.0});
  }
  for (std::size_t d = 0; d < network.loads().size(); ++d) {
    const auto& load = network.loads()[d];
    balance[network.bus_index(load.bus)].push_back({m.x_load[d], -load.demand_mw / base});
  }
  for (std::size_t l = 0; l < network.lines().size(); ++l) {
    const auto& line = network.lines()[l];
    balance[network.bus_index(line.from_bus)].push_back({m.p_line[l], -1.0});
    balance[network.bus_index(line.to_bus)].push_back({m.p_line[l], 1.0});
  }
  for (std::size_t b = 0; b < network.buses().size(); ++b) {
    p.add_constraint("balance_" + std::to_string(network.buses()[b].id), std::move(balance[b]), RowSense::equal, 0.0);
  }

  // Objective.
  std::vector<Term> obj;
  for (std::size_t d = 0; d < network.loads().size(); ++d) {
    const auto& load = network.loads()[d];
    const double c = (1.0 - alpha) * load.weight * load.demand_mw / base -
                     alpha * risk.load(load.id);
    if (c != 0.0) obj.push_back({m.x_load[d], c});
  }
  if (alpha > 0.0) {
    for (std::size_t b = 0; b < network.buses().size(); ++b) {
      const double r = risk.bus(network.buses()[b].id);
      if (r != 0.0) obj.push_back({m.z_bus[b], -alpha * r});
    }
    for (std::size_t g = 0; g < network.generators().size(); ++g) {
      const double r = risk.generator(network.generators()[g].id);
      if (r != 0.0) obj.push_back({m.z_gen[g], -alpha * r});
    }
    for (std::size_t l = 0; l < network.lines().size(); ++l) {
      const double r = risk.line(network.lines()[l].id);
      if (r != 0.0) obj.push_back({m.z_line[l], -alpha * r});
    }
  }
  p.set_objective(milp::ObjectiveSense::maximize, std::move(obj));
  return m;
}

EnergizationState ShutoffPlan::state() const {
  EnergizationState s;
  s.buses = bus_on;
  s.generators = generator_on;
  s.lines = line_on;
  s.loads = load_served;
  return s;
}

double plan_objective(const Network& network, double alpha, double d_weighted_mw, double r_fire) {
  return (1.0 - alpha) * d_weighted_mw / network.base_mva() - alpha * r_fire;
}

namespace {

void recompute_totals(const Network& network, const RiskTable& risk, ShutoffPlan& plan) {
  plan.d_tot_mw = 0.0;
  plan.d_weighted_mw = 0.0;
  for (const auto& load : network.loads()) {
    const double x = plan.load_served.at(load.id);
    plan.d_tot_mw += x * load.demand_mw;
    plan.d_weighted_mw += x * load.weight * load.demand_mw;
  }
  plan.r_fire = total_system_risk(network, risk, plan.state());
  plan.objective = plan_objective(network, plan.alpha, plan.d_weighted_mw, plan.r_fire);
}

}  // namespace

ShutoffPlan extract_plan(const Network& network, const RiskTable& risk, const OpsModel& model,
                         const milp::MilpSolution& solution) {
  ShutoffPlan plan;
  plan.alpha = model.alpha;
  plan.parameter = model.alpha;
  plan.status = solution.status;
  plan.stats = solution.stats;
  plan.diagnostics = solution.diagnostics;
  if (solution.values.empty()) return plan;

  const auto& v = solution.values;
  const double base = network.base_mva();
  auto on = [&](std::size_t var) { return v[var] >= 0.5; };
  for (std::size_t b = 0; b < network.buses().size(); ++b) {
    plan.bus_on[network.buses()[b].id] = on(model.z_bus[b]);
    plan.theta_rad[network.buses()[b].id] = v[model.theta[b]];
  }
  for (std::size_t g = 0; g < network.generators().size(); ++g) {
    const int id = network.generators()[g].id;
    const bool z = on(model.z_gen[g]);
    plan.generator_on[id] = z;
    plan.generation_mw[id] = z ? v[model.p_gen[g]] * base : 0.0;
  }
  for (std::size_t l = 0; l < network.lines().size(); ++l) {
    const int id = network.lines()[l].id;
    const bool z = on(model.z_line[l]);
    plan.line_on[id] = z;
    plan.flow_mw[id] = z ? v[model.p_line[l]] * base : 0.0;
  }
  for (std::size_t d = 0; d < network.loads().size(); ++d) {
    const auto& load = network.loads()[d];
    double x = std::clamp(v[model.x_load[d]], 0.0, 1.0);
    if (x < 1e-9) x = 0.0;
    if (x > 1.0 - 1e-9) x = 1.0;
    if (!plan.bus_on[load.bus]) x = 0.0;
    plan.load_served[load.id] = x;
  }
  recompute_totals(network, risk, plan);
  return plan;
}

namespace {

ShutoffPlan break_endpoint_tie(const Network& network, const RiskTable& risk, const OpsConfig& config,
                               const std::string& backend, const OpsModel& model, const milp::MilpSolution& first,
                               const ShutoffPlan& plan) {
  OpsConfig other = config;
  other.alpha = 1.0 - config.alpha;
  auto second = build_ops(network, risk, other);
  second.alpha = config.alpha;
  const auto& held = model.problem.objective();
  second.problem.add_constraint("hold_optimum", held.terms, RowSense::greater_equal,
                                first.objective - held.constant - 1e-10);
  auto options = config.solver.options;
  options.start_points.push_back(first.values);
  if (!options.node_limit) options.node_limit = 500;
  const auto solution = milp::solve_with(backend, second.problem, options);
  if (solution.values.empty()) return plan;
  auto refined = extract_plan(network, risk, second, solution);
  const bool better = config.alpha == 0.0 ? refined.r_fire < plan.r_fire - 1e-9 : refined.d_tot_mw > plan.d_tot_mw + 1e-9;
  if (!better || refined.objective < plan.objective - 1e-9) return plan;
  refined.stats.nodes += plan.stats.nodes;
  refined.stats.lp_solves += plan.stats.lp_solves;
  refined.stats.simplex_iterations += plan.stats.simplex_iterations;
  refined.stats.wall_time_s += plan.stats.wall_time_s;
  refined.status = milp::SolveStatus::optimal;  // the held row keeps it optimal for the alpha objective
  const bool proven = solution.status == milp::SolveStatus::optimal;
  refined.diagnostics = config.alpha == 0.0 ? (proven ? "least-risk plan among maximum-load optima"
                                                      : "lower-risk plan among maximum-load optima")
                                            : (proven ? "most-load plan among least-risk optima"
                                                      : "higher-load plan among least-risk optima");
  return refined;
}

}  // namespace

ShutoffPlan solve_ops(const Network& network, const RiskTable& risk, const OpsConfig& config) {
  const auto model = build_ops(network, risk, config);
  const auto backend = config.solver.backend.empty() ? milp::default_backend_name() : config.solver.backend;
  const auto solution = milp::solve_with(backend, model.problem, config.solver.options);
  if (solution.status == milp::SolveStatus::infeasible && !config.pins.empty()) {
    throw ContradictoryPinsError("the pins admit no feasible operating point");
  }
  auto plan = extract_plan(network, risk, model, solution);
  if (config.break_endpoint_ties && solution.status == milp::SolveStatus::optimal &&
      (config.alpha == 0.0 || config.alpha == 1.0)) {
    plan = break_endpoint_tie(network, risk, config, backend, model, solution, plan);
  }
  plan.pins = config.pins;
  return plan;
}

}  // namespace gridshed
