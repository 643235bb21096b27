#include <cmath>
#include <sstream>

#include "gridshed/ops.hpp"

namespace gridshed {

namespace {

template <class Map>
auto lookup(const Map& map, int id, const char* what) {
  auto it = map.find(id);
  if (it == map.end()) throw ValidationError(std::string("plan has no entry for ") + what + " " + std::to_string(id));
  return it->second;
}

std::string describe(const std::string& what, double amount) {
  std::ostringstream os;
  os << what << " (" << amount << " MW)";
  return os.str();
}

}  // namespace

PlanEvaluation evaluate_plan(const Network& network, const RiskTable& risk, const ShutoffPlan& plan,
                             double report_tol_mw) {
  PlanEvaluation out;
  const double base = network.base_mva();
  auto limit = [&](const std::string& what, double amount) {
    if (amount > out.max_limit_violation_mw) out.max_limit_violation_mw = amount;
    if (amount > report_tol_mw) out.violations.push_back(describe(what, amount));
  };

  std::vector<double> injection(network.buses().size(), 0.0);
  for (const auto& load : network.loads()) {
    const double x = lookup(plan.load_served, load.id, "load");
    const bool bus_on = lookup(plan.bus_on, load.bus, "bus");
    out.d_tot_mw += x * load.demand_mw;
    out.d_weighted_mw += x * load.weight * load.demand_mw;
    injection[network.bus_index(load.bus)] -= x * load.demand_mw;
    const std::string id = "load " + std::to_string(load.id);
    limit(id + " served fraction outside [0,1]", std::max(-x, x - 1.0) * load.demand_mw);
    if (!bus_on) limit(id + " served from a de-energized bus", x * load.demand_mw);
  }
  for (const auto& gen : network.generators()) {
    const bool z = lookup(plan.generator_on, gen.id, "generator");
    const double p = lookup(plan.generation_mw, gen.id, "generator");
    injection[network.bus_index(gen.bus)] += p;
    const std::string id = "generator " + std::to_string(gen.id);
    if (!z) {
      limit(id + " off but producing", std::abs(p));
    } else {
      limit(id + " below minimum output", gen.p_min_mw - p);
      limit(id + " above maximum output", p - gen.p_max_mw);
      if (!lookup(plan.bus_on, gen.bus, "bus")) limit(id + " on at a de-energized bus", std::abs(p) + 1.0);
    }
  }
  for (const auto& line : network.lines()) {
    const bool z = lookup(plan.line_on, line.id, "line");
    const double flow = lookup(plan.flow_mw, line.id, "line");
    injection[network.bus_index(line.from_bus)] -= flow;
    injection[network.bus_index(line.to_bus)] += flow;
    const std::string id = "line " + std::to_string(line.id);
    if (!z) {
      limit(id + " de-energized but carrying flow", std::abs(flow));
      continue;
    }
    limit(id + " above thermal limit", std::abs(flow) - line.thermal_limit_mw);
    if (!lookup(plan.bus_on, line.from_bus, "bus") || !lookup(plan.bus_on, line.to_bus, "bus")) {
      limit(id + " energized into a de-energized bus", std::abs(flow) + 1.0);
    }
    const double dtheta = lookup(plan.theta_rad, line.from_bus, "bus") - lookup(plan.theta_rad, line.to_bus, "bus");
    limit(id + " flow differs from the DC flow law", std::abs(flow - line.susceptance_pu * dtheta * base));
  }
  for (std::size_t b = 0; b < network.buses().size(); ++b) {
    const double residual = std::abs(injection[b]);
    if (residual > out.max_balance_residual_mw) out.max_balance_residual_mw = residual;
    if (residual > report_tol_mw) {
      out.violations.push_back(describe("bus " + std::to_string(network.buses()[b].id) + " power balance residual", residual));
    }
  }
  const auto state = plan.state();
  out.r_fire = total_system_risk(network, risk, state);
  out.islands = energized_islands(network, state);
  return out;
}

}  // namespace gridshed
