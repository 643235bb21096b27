// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
// The bundled 73-bus case is solved with the external backend, the small cases
// with the reference backend.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <random>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "gridshed/pareto.hpp"
#include "lp_oracle.hpp"

using namespace gridshed;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

template <class... Args>
std::string fmt(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

void report(const char* name, const Outcome& o, double elapsed) {
  std::printf("%s %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", name, elapsed, o.detail.c_str());
  std::fflush(stdout);
}

std::optional<double> inner_lp(const milp::MilpProblem& fixed) {
  auto s = milp::solve_lp_relaxation(fixed);
  if (s.status != milp::SolveStatus::optimal) return std::nullopt;
  return s.objective;
}

std::size_t binary_count(const milp::MilpProblem& p) {
  std::size_t n = 0;
  for (const auto& v : p.variables()) n += v.type == milp::VarType::binary;
  return n;
}

double max_line_risk(const corpus::Instance& c) {
  double m = 0.0;
  for (const auto& l : c.network.lines()) m = std::max(m, c.risk.line(l.id));
  return m;
}

double max_area_risk(const corpus::Instance& c) {
  double m = 0.0;
  for (const auto& a : c.network.areas()) m = std::max(m, area_risk_total(c.risk, c.network, a.id));
  return m;
}

bool all_risks_positive(const corpus::Instance& c) {
  for (const auto& e : c.risk.entries())
    if (!(e.value > 0.0)) return false;
  return true;
}

std::vector<corpus::Instance> small_cases() {
  auto out = corpus::small();
  const auto perf = corpus::data_dir() / "perf";
  for (const auto& n : corpus::names(perf)) out.push_back(corpus::load(perf, n));
  return out;
}

/// Every plan produced during the run, for the feasibility audit.
struct PlanLog {
  struct Entry {
    const corpus::Instance* instance;
    std::string label;
    ShutoffPlan plan;
  };
  std::vector<Entry> entries;

  void add(const corpus::Instance& c, const std::string& label, const ShutoffPlan& plan) {
    if (plan.has_solution()) entries.push_back({&c, c.name + " " + label, plan});
  }
  void add(const corpus::Instance& c, const SweepResult& sweep) {
    for (const auto& p : sweep.points)
      if (p.plan) add(c, fmt("%s %g", sweep.method.c_str(), p.parameter), *p.plan);
  }
};

struct Bundled {
  corpus::Instance c;
  SolverSettings solver;
  SweepResult ops, transmission;
  ShutoffPlan area_point;
  TradeoffPoint standard;
  std::string error;  // set when the external backend could not be used
};

Outcome oracle_equivalence(const std::vector<corpus::Instance>& cases, PlanLog& log) {
  Outcome o;
  const auto start = Clock::now();
  std::size_t networks = 0, comparisons = 0;
  bool triangle = false, five_bus = false;
  double worst = 0.0;
  for (const auto& c : cases) {
    if (binary_count(build_ops(c.network, c.risk, OpsConfig{}).problem) > 12) continue;
    ++networks;
    triangle |= c.name == "triangle";
    five_bus |= c.network.buses().size() == 5;
    auto compare = [&](const std::string& what, const ShutoffPlan& plan, const milp::MilpProblem& problem) {
      ++comparisons;
      const auto expected = oracle::binary_enumeration(problem, inner_lp);
      if (!expected) return o.fail(c.name + " " + what + ": enumeration found no feasible pattern");
      if (!plan.has_solution()) return o.fail(c.name + " " + what + ": no plan returned");
      const double diff = std::abs(plan.objective - *expected);
      worst = std::max(worst, diff);
      if (diff > 1e-6) {
        o.fail(fmt("%s %s: objective %.9g, enumeration %.9g", c.name.c_str(), what.c_str(), plan.objective, *expected));
      }
      log.add(c, what, plan);
    };
    for (double alpha : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      OpsConfig config;
      config.alpha = alpha;
      compare(fmt("ops %g", alpha), solve_ops(c.network, c.risk, config), build_ops(c.network, c.risk, config).problem);
    }
    std::vector<ForcedOffSet> forced_sets{{}};
    const auto lines = c.network.lines();
    for (std::size_t i = 0; i < lines.size() && i < 2; ++i) forced_sets.push_back({{ComponentKind::line, lines[i].id}});
    forced_sets.push_back(transmission_heuristic(c.network, c.risk, 0.5 * max_line_risk(c)));
    for (const auto& forced : forced_sets) {
      compare(fmt("mld |C|=%zu", forced.size()), solve_mld(c.network, c.risk, forced),
              build_ops(c.network, c.risk, OpsConfig{}, forced).problem);
    }
  }
  const double elapsed = seconds_since(start);
  if (networks < 10) o.fail(fmt("only %zu networks have at most 12 binaries", networks));
  if (!triangle || !five_bus) o.fail("no triangle or no 5-bus network among them");
  if (elapsed >= 60.0) o.fail(fmt("took %.1f s", elapsed));
  if (o.pass) o.detail = fmt("%zu networks, %zu comparisons, max |diff| %.2e", networks, comparisons, worst);
  return o;
}

Outcome alpha_endpoints(const std::vector<corpus::Instance>& cases, PlanLog& log) {
  Outcome o;
  std::size_t checked_one = 0;
  for (const auto& c : cases) {
    OpsConfig zero;
    const auto ops0 = solve_ops(c.network, c.risk, zero);
    const auto mld = solve_mld(c.network, c.risk, {});
    log.add(c, "ops 0", ops0);
    log.add(c, "mld", mld);
    if (!ops0.has_solution() || !mld.has_solution()) {
      o.fail(c.name + ": no plan at alpha 0 or for MLD");
      continue;
    }
    if (std::abs(ops0.d_tot_mw - mld.d_tot_mw) > 1e-6) {
      o.fail(fmt("%s: alpha 0 serves %.9g MW, MLD %.9g MW", c.name.c_str(), ops0.d_tot_mw, mld.d_tot_mw));
    }
    if (!all_risks_positive(c)) continue;
    OpsConfig one;
    one.alpha = 1.0;
    const auto ops1 = solve_ops(c.network, c.risk, one);
    log.add(c, "ops 1", ops1);
    ++checked_one;
    if (!ops1.has_solution() || std::abs(ops1.r_fire) > 1e-6 || std::abs(ops1.d_tot_mw) > 1e-6) {
      o.fail(fmt("%s: alpha 1 gives r %.9g, d %.9g", c.name.c_str(), ops1.r_fire, ops1.d_tot_mw));
    }
  }
  if (checked_one == 0) o.fail("no network with all-positive risks");
  if (o.pass) o.detail = fmt("%zu networks at alpha 0, %zu with all-positive risks at alpha 1", cases.size(), checked_one);
  return o;
}

Outcome monotonicity(const Bundled& b) {
  Outcome o;
  if (!b.error.empty()) {
    o.fail(b.error);
    return o;
  }
  const auto& pts = b.ops.points;
  if (pts.size() != 101) o.fail(fmt("sweep has %zu points", pts.size()));
  for (const auto& p : pts)
    if (!p.has_solution()) o.fail(fmt("no plan at alpha %g (%s)", p.parameter, p.diagnostics.c_str()));
  for (std::size_t i = 1; o.pass && i < pts.size(); ++i) {
    const auto &a = pts[i - 1], &z = pts[i];
    if (z.r_fire > a.r_fire + 1e-6) o.fail(fmt("r rises from %.6g to %.6g at alpha %g", a.r_fire, z.r_fire, z.parameter));
    if (z.d_tot_mw > a.d_tot_mw + 1e-6) {
      o.fail(fmt("d rises from %.6g to %.6g at alpha %g", a.d_tot_mw, z.d_tot_mw, z.parameter));
    }
  }
  std::size_t optimal = 0;
  for (const auto& p : pts) optimal += p.status == milp::SolveStatus::optimal;
  if (o.pass) {
    o.detail = fmt("101 points (%zu optimal), r %.4g -> %.4g, d %.6g -> %.6g MW", optimal, pts.front().r_fire,
                   pts.back().r_fire, pts.front().d_tot_mw, pts.back().d_tot_mw);
  }
  return o;
}

bool dominates(double d, double r, double d_ref, double r_ref) { return d >= d_ref - 1e-6 && r <= r_ref + 1e-6; }

bool some_point_dominates(const SweepResult& sweep, double d_ref, double r_ref) {
  for (const auto& p : sweep.points)
    if (p.has_solution() && dominates(p.d_tot_mw, p.r_fire, d_ref, r_ref)) return true;
  return false;
}

Outcome dominance(const Bundled& b) {
  Outcome o;
  if (!b.error.empty()) {
    o.fail(b.error);
    return o;
  }
  std::size_t checked = 0;
  std::vector<double> undominated;
  for (const auto& p : b.transmission.points) {
    if (!p.has_solution()) {
      o.fail(fmt("transmission threshold %g has no plan", p.parameter));
      continue;
    }
    ++checked;
    if (!some_point_dominates(b.ops, p.d_tot_mw, p.r_fire)) undominated.push_back(p.parameter);
  }
  if (!undominated.empty()) {
    std::string list;
    for (double t : undominated) list += (list.empty() ? "" : ",") + fmt("%g", t);
    o.fail(fmt("%zu of %zu transmission points not dominated by an alpha point (thresholds %s)", undominated.size(),
               checked, list.c_str()));
  }
  const auto& a = b.area_point;
  if (!a.has_solution()) {
    o.fail("area point has no plan");
  } else {
    std::string missing;
    if (!some_point_dominates(b.ops, a.d_tot_mw, a.r_fire)) missing += " alpha";
    if (!some_point_dominates(b.transmission, a.d_tot_mw, a.r_fire)) missing += " transmission";
    if (!missing.empty()) {
      const auto why = fmt("area point (r %.6g, d %.6g) not dominated by:%s", a.r_fire, a.d_tot_mw, missing.c_str());
      if (o.pass) o.fail(why);
      else o.detail += "; " + why;
    }
  }
  if (o.pass) {
    o.detail = fmt("%zu transmission points dominated; area point (threshold 30, r %.6g, d %.6g MW) dominated by both sweeps",
                   checked, a.r_fire, a.d_tot_mw);
  }
  return o;
}

Outcome feasibility_audit(const PlanLog& log) {
  Outcome o;
  double worst_balance = 0.0, worst_limit = 0.0;
  for (const auto& e : log.entries) {
    const auto& net = e.instance->network;
    const auto ev = evaluate_plan(net, e.instance->risk, e.plan);
    worst_balance = std::max(worst_balance, ev.max_balance_residual_mw);
    worst_limit = std::max(worst_limit, ev.max_limit_violation_mw);
    if (!ev.clean()) {
      o.fail(fmt("%s: balance %.3g MW, limit %.3g MW", e.label.c_str(), ev.max_balance_residual_mw,
                 ev.max_limit_violation_mw));
    }
    for (const auto& l : net.lines()) {
      if (!e.plan.line_on.at(l.id) && e.plan.flow_mw.at(l.id) != 0.0) {
        o.fail(fmt("%s: de-energized line %d carries %.3g MW", e.label.c_str(), l.id, e.plan.flow_mw.at(l.id)));
      }
    }
  }
  if (log.entries.empty()) o.fail("no plans to audit");
  if (o.pass) {
    o.detail = fmt("%zu plans, max balance residual %.2e MW, max limit violation %.2e MW", log.entries.size(),
                   worst_balance, worst_limit);
  }
  return o;
}

bool subset(const ForcedOffSet& a, const ForcedOffSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Outcome heuristic_monotonicity(const corpus::Instance& c) {
  Outcome o;
  std::mt19937_64 rng(20241016);
  std::size_t grown = 0;
  for (int pair = 0; pair < 50; ++pair) {
    const double top_line = 1.1 * max_line_risk(c), top_area = 1.1 * max_area_risk(c);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    const auto line_lo = transmission_heuristic(c.network, c.risk, lo * top_line);
    const auto line_hi = transmission_heuristic(c.network, c.risk, hi * top_line);
    const auto area_lo = area_heuristic(c.network, c.risk, lo * top_area);
    const auto area_hi = area_heuristic(c.network, c.risk, hi * top_area);
    if (!subset(line_hi, line_lo)) o.fail(fmt("transmission sets at %g and %g", lo * top_line, hi * top_line));
    if (!subset(area_hi, area_lo)) o.fail(fmt("area sets at %g and %g", lo * top_area, hi * top_area));
    grown += (line_hi.size() < line_lo.size()) + (area_hi.size() < area_lo.size());
  }
  if (o.pass) o.detail = fmt("50 pairs on %s for both heuristics, %zu strict growths", c.name.c_str(), grown);
  return o;
}

double island_served_mw(const Network& net, const ShutoffPlan& plan, const Island& island) {
  double served = 0.0;
  for (int id : island.loads) served += net.loads()[net.load_index(id)].demand_mw * plan.load_served.at(id);
  return served;
}

Outcome island_pruning(const std::vector<corpus::Instance>& cases, const Bundled& b) {
  Outcome o;
  std::size_t plans = 0, changed = 0;
  auto check = [&](const corpus::Instance& c, const std::string& label, const ShutoffPlan& plan) {
    if (!plan.has_solution()) return;
    ++plans;
    const auto pruned = prune_dead_islands(c.network, c.risk, plan);
    changed += serialize_plan(pruned) != serialize_plan(plan);
    for (const auto& island : energized_islands(c.network, pruned.state())) {
      if (island_served_mw(c.network, pruned, island) <= 0.0) {
        o.fail(fmt("%s %s: island at bus %d serves 0 MW", c.name.c_str(), label.c_str(), island.buses.front()));
      }
    }
    if (serialize_plan(prune_dead_islands(c.network, c.risk, pruned)) != serialize_plan(pruned)) {
      o.fail(c.name + " " + label + ": pruning twice differs from pruning once");
    }
  };
  for (const auto& c : cases) {
    check(c, "mld", solve_mld(c.network, c.risk, {}));
    for (double f : {0.25, 0.5, 0.75}) {
      check(c, fmt("transmission mld %g", f), solve_mld(c.network, c.risk, transmission_heuristic(c.network, c.risk, f * max_line_risk(c))));
      check(c, fmt("area mld %g", f), solve_mld(c.network, c.risk, area_heuristic(c.network, c.risk, f * max_area_risk(c))));
    }
  }
  if (b.error.empty()) {
    for (const auto& p : b.transmission.points)
      if (p.plan) check(b.c, fmt("transmission %g", p.parameter), *p.plan);
    check(b.c, "area 30", b.area_point);
  }
  if (o.pass) o.detail = fmt("%zu plans (%zu changed by pruning), all idempotent", plans, changed);
  return o;
}

Outcome qualitative_shape(const Bundled& b) {
  Outcome o;
  if (!b.error.empty()) {
    o.fail(b.error);
    return o;
  }
  const auto golden =
      nlohmann::json::parse(read_text_file(corpus::data_dir() / "rts73" / "rts73.shape_golden.json"));
  const double standard_risk = b.standard.r_fire;
  const double demand = b.c.network.total_demand_mw();
  if (!b.standard.has_solution() || standard_risk <= 0.0) {
    o.fail("standard operation point unavailable");
    return o;
  }
  auto fractions = [&](const TradeoffPoint& p) { return std::pair{p.r_fire / standard_risk, p.d_tot_mw / demand}; };
  const TradeoffPoint* hit = nullptr;
  const TradeoffPoint* recorded = nullptr;
  const double golden_alpha = golden["alpha"].get<double>();
  for (const auto& p : b.ops.points) {
    if (!p.has_solution()) continue;
    if (std::abs(p.parameter - golden_alpha) < 1e-9) recorded = &p;
    const auto [rf, lf] = fractions(p);
    if (!hit && p.parameter <= 0.05 + 1e-12 && rf <= 0.55 && lf >= 0.95) hit = &p;
  }
  if (!hit) {
    o.fail("no alpha <= 0.05 reaches 55% risk with 95% load");
    return o;
  }
  if (!recorded) {
    o.fail(fmt("no solved point at the golden alpha %g", golden_alpha));
    return o;
  }
  const auto [rf, lf] = fractions(*recorded);
  if (std::abs(rf - golden["risk_fraction"].get<double>()) > 0.05 ||
      std::abs(lf - golden["load_fraction"].get<double>()) > 0.05) {
    o.fail(fmt("alpha %g gives risk %.4f and load %.4f, golden %.4f and %.4f", golden_alpha, rf, lf,
               golden["risk_fraction"].get<double>(), golden["load_fraction"].get<double>()));
  }
  if (o.pass) {
    const auto [hit_rf, hit_lf] = fractions(*hit);
    o.detail = fmt("first qualifying alpha %g (%.1f%% risk, %.2f%% load); golden alpha %g: %.1f%% of standard risk "
                   "%.4g, %.2f%% of load",
                   hit->parameter, 100.0 * hit_rf, 100.0 * hit_lf, golden_alpha, 100.0 * rf, standard_risk, 100.0 * lf);
  }
  return o;
}

Outcome performance(const std::vector<corpus::Instance>& cases) {
  Outcome o;
  SolverSettings reference;
  reference.backend = "reference";
  double slowest = 0.0;
  std::string slowest_label;
  std::size_t solves = 0;
  auto timed = [&](const corpus::Instance& c, const std::string& label, auto&& run) {
    const auto start = Clock::now();
    const ShutoffPlan plan = run();
    const double t = seconds_since(start);
    ++solves;
    if (t > slowest) {
      slowest = t;
      slowest_label = c.name + " " + label;
    }
    if (!plan.has_solution() || plan.status != milp::SolveStatus::optimal) {
      o.fail(c.name + " " + label + ": " + milp::to_string(plan.status));
    }
    if (t >= 5.0) o.fail(fmt("%s %s took %.2f s", c.name.c_str(), label.c_str(), t));
  };
  std::size_t instances = 0;
  for (const auto& c : cases) {
    if (c.network.buses().size() > 20) continue;
    ++instances;
    for (double alpha : {0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 0.8, 1.0}) {
      OpsConfig config;
      config.alpha = alpha;
      config.solver = reference;
      timed(c, fmt("ops %g", alpha), [&] { return solve_ops(c.network, c.risk, config); });
    }
    timed(c, "mld", [&] { return solve_mld(c.network, c.risk, {}, reference); });
    timed(c, "transmission 0.5", [&] {
      return run_heuristic_pipeline(c.network, c.risk, HeuristicKind::transmission, 0.5 * max_line_risk(c), reference);
    });
  }
  if (o.pass) {
    o.detail = fmt("%zu instances, %zu solves, slowest %.3f s (%s)", instances, solves, slowest, slowest_label.c_str());
  }
  return o;
}

Bundled solve_bundled() {
  Bundled b{corpus::load(corpus::data_dir() / "rts73", "rts73")};
  std::string command;
  if (const char* env = std::getenv("GRIDSHED_EXTERNAL_SOLVER"); env && *env) command = env;
#ifdef GRIDSHED_EXTERNAL_COMMAND
  if (command.empty()) command = GRIDSHED_EXTERNAL_COMMAND;
#endif
  if (command.empty()) {
    b.error = "no external solver command configured";
    return b;
  }
  milp::register_backend("external", milp::make_external_backend(command));
  b.solver.backend = "external";
  try {
    SweepOptions options;
    options.solver = b.solver;
    auto start = Clock::now();
    b.ops = sweep_alpha(b.c.network, b.c.risk, default_alpha_grid(), options);
    std::printf("# bundled alpha sweep: %.1f s\n", seconds_since(start));
    start = Clock::now();
    b.transmission = sweep_threshold(b.c.network, b.c.risk, HeuristicKind::transmission,
                                     default_threshold_grid(b.c.network, b.c.risk, HeuristicKind::transmission), options);
    std::printf("# bundled transmission sweep: %.1f s\n", seconds_since(start));
    b.area_point = run_heuristic_pipeline(b.c.network, b.c.risk, HeuristicKind::area, 30.0, b.solver);
    b.standard = standard_operation_point(b.c.network, b.c.risk, b.solver);
    std::fflush(stdout);
  } catch (const std::exception& e) {
    b.error = std::string("external backend failed: ") + e.what();
  }
  return b;
}

}  // namespace

int main() {
  const auto small = small_cases();
  PlanLog log;
  bool all = true;
  auto run = [&](const char* name, auto&& criterion) {
    const auto start = Clock::now();
    const Outcome o = criterion();
    report(name, o, seconds_since(start));
    all &= o.pass;
  };

  run("oracle_equivalence", [&] { return oracle_equivalence(small, log); });
  run("alpha_endpoints", [&] { return alpha_endpoints(small, log); });

  const auto bundled_start = Clock::now();
  const Bundled bundled = solve_bundled();
  std::printf("# bundled case solved in %.1f s%s\n", seconds_since(bundled_start),
              bundled.error.empty() ? "" : (": " + bundled.error).c_str());
  if (bundled.error.empty()) {
    log.add(bundled.c, bundled.ops);
    log.add(bundled.c, bundled.transmission);
    log.add(bundled.c, "area 30", bundled.area_point);
  }

  run("scalarization_monotonicity", [&] { return monotonicity(bundled); });
  run("dominance", [&] { return dominance(bundled); });
  run("heuristic_monotonicity", [&] { return heuristic_monotonicity(bundled.c); });
  run("island_pruning", [&] { return island_pruning(small, bundled); });
  run("qualitative_shape", [&] { return qualitative_shape(bundled); });
  run("performance", [&] { return performance(small); });
  run("feasibility_audit", [&] { return feasibility_audit(log); });
  return all ? 0 : 1;
}
