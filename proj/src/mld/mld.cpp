#include "gridshed/mld.hpp"

#include <cmath>

namespace gridshed {

std::string to_string(HeuristicKind kind) { return kind == HeuristicKind::area ? "area" : "transmission"; }

HeuristicKind parse_heuristic_kind(std::string_view text) {
  if (text == "area") return HeuristicKind::area;
  if (text == "transmission") return HeuristicKind::transmission;
  throw ParseError("unknown heuristic '" + std::string(text) + "' (expected area or transmission)");
}

ForcedOffSet area_heuristic(const Network& network, const RiskTable& risk, double threshold) {
  std::set<int> triggered;
  for (const auto& area : network.areas()) {
    if (area_risk_total(risk, network, area.id) >= threshold) triggered.insert(area.id);
  }
  ForcedOffSet out;
  if (triggered.empty()) return out;
  auto area_of = [&](int bus) { return network.buses()[network.bus_index(bus)].area_id; };
  for (const auto& b : network.buses()) {
    if (triggered.count(b.area_id)) out.insert({ComponentKind::bus, b.id});
  }
  for (const auto& g : network.generators()) {
    if (triggered.count(area_of(g.bus))) out.insert({ComponentKind::generator, g.id});
  }
  for (const auto& d : network.loads()) {
    if (triggered.count(area_of(d.bus))) out.insert({ComponentKind::load, d.id});
  }
  for (const auto& l : network.lines()) {
    const ComponentRef ref{ComponentKind::line, l.id};
    for (const auto& term : risk.terms(ref)) {
      if (triggered.count(term.area_id)) {
        out.insert(ref);
        break;
      }
    }
  }
  return out;
}

ForcedOffSet transmission_heuristic(const Network& network, const RiskTable& risk, double threshold) {
  ForcedOffSet out;
  for (const auto& l : network.lines()) {
    if (risk.line(l.id) >= threshold) out.insert({ComponentKind::line, l.id});
  }
  return out;
}

ShutoffPlan solve_mld(const Network& network, const RiskTable& risk, const ForcedOffSet& forced_off,
                      const SolverSettings& solver) {
  OpsConfig config;
  config.alpha = 0.0;
  config.solver = solver;
  const auto model = build_ops(network, risk, config, forced_off);
  const auto backend = solver.backend.empty() ? milp::default_backend_name() : solver.backend;
  const auto solution = milp::solve_with(backend, model.problem, solver.options);
  auto plan = extract_plan(network, risk, model, solution);
  plan.method = "mld";
  plan.forced_off.assign(forced_off.begin(), forced_off.end());
  return plan;
}

ShutoffPlan prune_dead_islands(const Network& network, const RiskTable& risk, ShutoffPlan plan) {
  if (!plan.has_solution()) return plan;
  while (true) {
    bool changed = false;
    for (const auto& island : energized_islands(network, plan.state())) {
      double served = 0.0;
      for (int id : island.loads) served += plan.load_served.at(id) * network.loads()[network.load_index(id)].demand_mw;
      if (served > 0.0) continue;
      changed = true;
      for (int id : island.buses) {
        plan.bus_on[id] = false;
        for (std::size_t d : network.loads_at(network.bus_index(id))) plan.load_served[network.loads()[d].id] = 0.0;
      }
      for (int id : island.lines) {
        plan.line_on[id] = false;
        plan.flow_mw[id] = 0.0;
      }
      for (int id : island.generators) {
        plan.generator_on[id] = false;
        plan.generation_mw[id] = 0.0;
      }
    }
    if (!changed) break;
  }
  plan.r_fire = total_system_risk(network, risk, plan.state());
  plan.objective = plan_objective(network, plan.alpha, plan.d_weighted_mw, plan.r_fire);
  return plan;
}

ShutoffPlan run_heuristic_pipeline(const Network& network, const RiskTable& risk, HeuristicKind kind,
                                   double threshold, const SolverSettings& solver) {
  const auto forced = kind == HeuristicKind::area ? area_heuristic(network, risk, threshold)
                                                  : transmission_heuristic(network, risk, threshold);
  auto plan = prune_dead_islands(network, risk, solve_mld(network, risk, forced, solver));
  plan.method = to_string(kind);
  plan.parameter = threshold;
  return plan;
}

}  // namespace gridshed
