#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "gridshed/pareto.hpp"

namespace gridshed {

namespace {

using nlohmann::ordered_json;

struct Target {
  const char* scenario;
  double risk_fraction;
};
constexpr Target targets[] = {{"medium_wildfire_risk", 0.5}, {"low_wildfire_risk", 0.1}};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string seconds(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

ordered_json breakdown_json(const RiskBreakdown& b) {
  return {{"total", b.total()}, {"bus", b.bus}, {"line", b.line}, {"gen", b.generator}, {"load", b.load}};
}

ordered_json scatter_json(const Network& network, const RiskTable& risk, const ShutoffPlan& plan) {
  ordered_json lines = ordered_json::array();
  for (const auto& l : network.lines()) {
    lines.push_back({{"line_id", l.id},
                     {"r_l", risk.line(l.id)},
                     {"abs_flow_mw", std::abs(plan.flow_mw.at(l.id))},
                     {"energized", plan.line_on.at(l.id)}});
  }
  return lines;
}

const TradeoffPoint* nearest(const SweepResult& sweep, double target_risk) {
  const TradeoffPoint* best = nullptr;
  for (const auto& p : sweep.points) {
    if (!p.has_solution()) continue;
    if (!best || std::abs(p.r_fire - target_risk) < std::abs(best->r_fire - target_risk)) best = &p;
  }
  return best;
}

}  // namespace

std::string compare_report(const Network& network, const RiskTable& risk, const std::vector<SweepResult>& sweeps,
                           const TradeoffPoint& standard) {
  if (sweeps.empty()) throw ValidationError("comparison needs at least one sweep");
  ordered_json j;
  j["format_version"] = 1;
  j["network"] = network.name();
  j["network_fingerprint"] = network_fingerprint(network);
  j["risk_fingerprint"] = risk_fingerprint(network, risk);

  const double total_demand = network.total_demand_mw();
  const double standard_risk = standard.r_fire;
  ordered_json rows = ordered_json::array();
  ordered_json by_type = ordered_json::array();
  ordered_json scatter = ordered_json::array();

  rows.push_back({{"scenario", "standard_operation"},
                  {"method", "standard"},
                  {"parameter", nullptr},
                  {"status", milp::to_string(standard.status)},
                  {"total_risk", standard.r_fire},
                  {"load_served_mw", standard.d_tot_mw},
                  {"solve_time_s", nullptr},
                  {"risk_fraction", standard.has_solution() ? ordered_json(1.0) : ordered_json(nullptr)},
                  {"load_fraction", total_demand > 0.0 ? ordered_json(standard.d_tot_mw / total_demand)
                                                       : ordered_json(nullptr)}});
  if (standard.plan) {
    by_type.push_back({{"scenario", "standard_operation"},
                       {"method", "standard"},
                       {"parameter", nullptr},
                       {"risk", breakdown_json(plan_risk_breakdown(network, risk, *standard.plan))}});
  }

  if (standard.has_solution() && standard_risk > 0.0) {
    for (const auto& target : targets) {
      for (const auto& sweep : sweeps) {
        const auto* p = nearest(sweep, target.risk_fraction * standard_risk);
        if (!p) continue;
        rows.push_back({{"scenario", target.scenario},
                        {"method", sweep.method},
                        {"parameter", p->parameter},
                        {"status", milp::to_string(p->status)},
                        {"total_risk", p->r_fire},
                        {"load_served_mw", p->d_tot_mw},
                        {"solve_time_s", p->solve_time_s},
                        {"risk_fraction", p->r_fire / standard_risk},
                        {"load_fraction", total_demand > 0.0 ? ordered_json(p->d_tot_mw / total_demand)
                                                             : ordered_json(nullptr)}});
        if (!p->plan) continue;
        by_type.push_back({{"scenario", target.scenario},
                           {"method", sweep.method},
                           {"parameter", p->parameter},
                           {"risk", breakdown_json(plan_risk_breakdown(network, risk, *p->plan))}});
        scatter.push_back({{"scenario", target.scenario},
                           {"method", sweep.method},
                           {"parameter", p->parameter},
                           {"lines", scatter_json(network, risk, *p->plan)}});
      }
    }
  }
  j["operating_points"] = rows;
  j["risk_by_component_type"] = by_type;

  ordered_json methods = ordered_json::array();
  for (const auto& sweep : sweeps) {
    ordered_json points = ordered_json::array();
    for (const auto& p : sweep.points) {
      points.push_back({{"parameter", p.parameter},
                        {"status", milp::to_string(p.status)},
                        {"total_risk", p.has_solution() ? ordered_json(p.r_fire) : ordered_json(nullptr)},
                        {"load_served_mw", p.has_solution() ? ordered_json(p.d_tot_mw) : ordered_json(nullptr)},
                        {"objective", p.has_solution() ? ordered_json(p.objective) : ordered_json(nullptr)},
                        {"solve_time_s", p.solve_time_s}});
    }
    ordered_json front = ordered_json::array();
    for (const auto& p : pareto_front(sweep.points)) {
      front.push_back({{"parameter", p.parameter}, {"total_risk", p.r_fire}, {"load_served_mw", p.d_tot_mw}});
    }
    methods.push_back({{"method", sweep.method}, {"points", points}, {"pareto_front", front}});
  }
  j["methods"] = methods;
  j["line_scatter"] = scatter;
  return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "method,parameter,r_fire,d_tot_mw,objective,status,solve_time_s\n";
  for (const auto& p : sweep.points) {
    out += p.method + "," + num(p.parameter) + ",";
    if (p.has_solution()) {
      out += num(p.r_fire) + "," + num(p.d_tot_mw) + "," + num(p.objective);
    } else {
      out += ",,";
    }
    out += "," + milp::to_string(p.status) + "," + seconds(p.solve_time_s) + "\n";
  }
  return out;
}

std::string line_scatter_csv(const Network& network, const RiskTable& risk, const ShutoffPlan& plan) {
  std::string out = "line_id,r_l,abs_flow_mw,energized\n";
  for (const auto& l : network.lines()) {
    out += std::to_string(l.id) + "," + num(risk.line(l.id)) + "," + num(std::abs(plan.flow_mw.at(l.id))) + "," +
           (plan.line_on.at(l.id) ? "1" : "0") + "\n";
  }
  return out;
}

std::string serialize_sweep(const SweepResult& sweep) {
  ordered_json j;
  j["format_version"] = 1;
  j["method"] = sweep.method;
  j["network_fingerprint"] = sweep.network_fingerprint;
  j["risk_fingerprint"] = sweep.risk_fingerprint;
  ordered_json points = ordered_json::array();
  for (const auto& p : sweep.points) {
    ordered_json q;
    q["method"] = p.method;
    q["parameter"] = p.parameter;
    q["status"] = milp::to_string(p.status);
    q["r_fire"] = p.has_solution() ? ordered_json(p.r_fire) : ordered_json(nullptr);
    q["d_tot_mw"] = p.has_solution() ? ordered_json(p.d_tot_mw) : ordered_json(nullptr);
    q["objective"] = p.has_solution() ? ordered_json(p.objective) : ordered_json(nullptr);
    q["solve_time_s"] = p.solve_time_s;
    q["gap"] = p.stats.gap;
    q["nodes"] = p.stats.nodes;
    if (!p.diagnostics.empty()) q["diagnostics"] = p.diagnostics;
    points.push_back(q);
  }
  j["points"] = points;
  return j.dump(2) + "\n";
}

}  // namespace gridshed
