#include <json.hpp>

#include "gridshed/ops.hpp"

namespace gridshed {

std::string serialize_plan(const ShutoffPlan& plan) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format_version"] = 1;
  j["method"] = plan.method;
  j["parameter"] = plan.parameter;
  j["alpha"] = plan.alpha;
  j["status"] = milp::to_string(plan.status);
  j["objective"] = plan.objective;
  j["d_tot_mw"] = plan.d_tot_mw;
  j["d_weighted_mw"] = plan.d_weighted_mw;
  j["r_fire"] = plan.r_fire;

  ordered_json pins = ordered_json::array();
  for (const auto& pin : plan.pins) {
    pins.push_back({{"kind", to_string(pin.component.kind)}, {"id", pin.component.id}, {"state", to_string(pin.state)}});
  }
  j["pins"] = pins;
  ordered_json forced = ordered_json::array();
  for (const auto& ref : plan.forced_off) forced.push_back({{"kind", to_string(ref.kind)}, {"id", ref.id}});
  j["forced_off"] = forced;

  ordered_json buses = ordered_json::array();
  for (const auto& [id, on] : plan.bus_on) {
    buses.push_back({{"id", id}, {"on", on}, {"theta_rad", plan.theta_rad.at(id)}});
  }
  j["buses"] = buses;
  ordered_json gens = ordered_json::array();
  for (const auto& [id, on] : plan.generator_on) {
    gens.push_back({{"id", id}, {"on", on}, {"p_mw", plan.generation_mw.at(id)}});
  }
  j["generators"] = gens;
  ordered_json lines = ordered_json::array();
  for (const auto& [id, on] : plan.line_on) {
    lines.push_back({{"id", id}, {"on", on}, {"flow_mw", plan.flow_mw.at(id)}});
  }
  j["lines"] = lines;
  ordered_json loads = ordered_json::array();
  for (const auto& [id, x] : plan.load_served) loads.push_back({{"id", id}, {"served_fraction", x}});
  j["loads"] = loads;

  j["solver"] = {{"backend", plan.stats.backend},
                 {"nodes", plan.stats.nodes},
                 {"lp_solves", plan.stats.lp_solves},
                 {"simplex_iterations", plan.stats.simplex_iterations},
                 {"best_bound", plan.stats.best_bound},
                 {"gap", plan.stats.gap}};
  if (!plan.diagnostics.empty()) j["diagnostics"] = plan.diagnostics;
  return j.dump(2) + "\n";
}

}  // namespace gridshed
