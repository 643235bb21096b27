#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <thread>

#include "gridshed/pareto.hpp"

namespace gridshed {

namespace {

using Clock = std::chrono::steady_clock;

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TradeoffPoint to_point(ShutoffPlan plan, double seconds, bool keep_plan) {
  TradeoffPoint p;
  p.method = plan.method;
  p.parameter = plan.parameter;
  p.status = plan.status;
  p.solve_time_s = seconds;
  p.stats = plan.stats;
  p.diagnostics = plan.diagnostics;
  if (plan.has_solution()) {
    p.found = true;
    p.r_fire = plan.r_fire;
    p.d_tot_mw = plan.d_tot_mw;
    p.objective = plan.objective;
    if (keep_plan) p.plan = std::move(plan);
  }
  return p;
}

// Runs job(i) for i in [0, n) on a bounded set of threads.
template <class Job>
void run_pool(std::size_t n, const SweepOptions& options, Job job) {
  unsigned workers = options.workers != 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      job(i);
      const std::size_t done = ++finished;
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(done, n);
      }
    }
  };
  if (workers <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

template <class Solve>
TradeoffPoint guarded(const std::string& method, double parameter, bool keep_plan, Solve solve) {
  const auto start = Clock::now();
  try {
    auto plan = solve();
    return to_point(std::move(plan), std::chrono::duration<double>(Clock::now() - start).count(), keep_plan);
  } catch (const std::exception& e) {
    TradeoffPoint p;
    p.method = method;
    p.parameter = parameter;
    p.status = milp::SolveStatus::numerical_failure;
    p.solve_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    p.diagnostics = e.what();
    return p;
  }
}

std::string format_parameter(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Each point takes the best plan of the pool at its own alpha.
void share_incumbents(const Network& network, std::vector<TradeoffPoint>& points,
                      const std::vector<ShutoffPlan>& pool) {
  for (auto& p : points) {
    const double alpha = p.parameter;
    double best = p.has_solution() ? plan_objective(network, alpha, p.plan->d_weighted_mw, p.plan->r_fire)
                                   : -std::numeric_limits<double>::infinity();
    const ShutoffPlan* pick = nullptr;
    for (const auto& q : pool) {
      const double v = plan_objective(network, alpha, q.d_weighted_mw, q.r_fire);
      if (v > best) {
        best = v;
        pick = &q;
      }
    }
    if (!pick) continue;
    ShutoffPlan adopted = *pick;
    adopted.parameter = alpha;
    adopted.alpha = alpha;
    adopted.objective = best;
    adopted.stats = p.stats;
    adopted.status = p.has_solution() ? p.status : milp::SolveStatus::feasible;
    adopted.diagnostics = "plan found at alpha " + format_parameter(pick->alpha) + " scores higher here";
    p.status = adopted.status;
    p.found = true;
    p.r_fire = adopted.r_fire;
    p.d_tot_mw = adopted.d_tot_mw;
    p.objective = adopted.objective;
    p.diagnostics = adopted.diagnostics;
    p.plan = std::move(adopted);
  }
}

}  // namespace

std::string network_fingerprint(const Network& network) { return fnv1a_hex(serialize_case(network)); }

std::string risk_fingerprint(const Network& network, const RiskTable& risk) {
  std::string text;
  char buf[64];
  for (const auto& ref : network.components()) {
    std::snprintf(buf, sizeof buf, "%.17g\n", risk.risk(ref));
    text += to_string(ref) + " " + buf;
  }
  return fnv1a_hex(text);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> out;
  for (int i = 0; i <= 100; ++i) out.push_back(i / 100.0);
  return out;
}

std::vector<double> default_threshold_grid(const Network& network, const RiskTable& risk, HeuristicKind kind) {
  double top = 0.0;
  double step = 1.0;
  if (kind == HeuristicKind::transmission) {
    for (const auto& l : network.lines()) top = std::max(top, risk.line(l.id));
    top = std::ceil(top);
  } else {
    for (const auto& a : network.areas()) top = std::max(top, area_risk_total(risk, network, a.id));
    step = 10.0;
    top = std::ceil(top / step) * step;
  }
  std::vector<double> out;
  const int n = static_cast<int>(std::lround(top / step));
  for (int i = 0; i <= n; ++i) out.push_back(i * step);
  return out;
}

SweepResult sweep_alpha(const Network& network, const RiskTable& risk, std::vector<double> alphas,
                        const SweepOptions& options) {
  if (alphas.empty()) throw ValidationError("alpha grid is empty");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("alpha " + format_parameter(a) + " is outside [0, 1]");
  }
  std::sort(alphas.begin(), alphas.end());
  SweepResult out;
  out.method = "ops";
  out.network_fingerprint = network_fingerprint(network);
  out.risk_fingerprint = risk_fingerprint(network, risk);
  out.points.resize(alphas.size());
  const bool keep = options.keep_plans || options.share_incumbents;
  run_pool(alphas.size(), options, [&](std::size_t i) {
    out.points[i] = guarded("ops", alphas[i], keep, [&] {
      OpsConfig config;
      config.alpha = alphas[i];
      config.solver = options.solver;
      config.break_endpoint_ties = options.break_endpoint_ties;
      return solve_ops(network, risk, config);
    });
  });
  if (options.share_incumbents) {
    std::vector<ShutoffPlan> pool;
    for (const auto& p : out.points) {
      if (p.has_solution() && p.plan) pool.push_back(*p.plan);
    }
    share_incumbents(network, out.points, pool);
  }
  if (!options.keep_plans) {
    for (auto& p : out.points) p.plan.reset();
  }
  return out;
}

SweepResult sweep_threshold(const Network& network, const RiskTable& risk, HeuristicKind kind,
                            std::vector<double> thresholds, const SweepOptions& options) {
  if (thresholds.empty()) throw ValidationError("threshold grid is empty");
  for (double t : thresholds) {
    if (std::isnan(t)) throw ValidationError("threshold is not a number");
  }
  std::sort(thresholds.begin(), thresholds.end());
  SweepResult out;
  out.method = to_string(kind);
  out.network_fingerprint = network_fingerprint(network);
  out.risk_fingerprint = risk_fingerprint(network, risk);
  out.points.resize(thresholds.size());
  run_pool(thresholds.size(), options, [&](std::size_t i) {
    out.points[i] = guarded(out.method, thresholds[i], options.keep_plans, [&] {
      return run_heuristic_pipeline(network, risk, kind, thresholds[i], options.solver);
    });
  });
  return out;
}

std::vector<TradeoffPoint> pareto_front(const std::vector<TradeoffPoint>& points) {
  std::vector<const TradeoffPoint*> live;
  for (const auto& p : points) {
    if (p.has_solution()) live.push_back(&p);
  }
  // Sort by risk ascending, load descending, parameter ascending; a point survives
  // when its load beats every load seen before it.
  std::sort(live.begin(), live.end(), [](const TradeoffPoint* a, const TradeoffPoint* b) {
    if (a->r_fire != b->r_fire) return a->r_fire < b->r_fire;
    if (a->d_tot_mw != b->d_tot_mw) return a->d_tot_mw > b->d_tot_mw;
    if (a->parameter != b->parameter) return a->parameter < b->parameter;
    return a->method < b->method;
  });
  std::vector<TradeoffPoint> out;
  double best_load = -std::numeric_limits<double>::infinity();
  for (const auto* p : live) {
    if (p->d_tot_mw > best_load) {
      out.push_back(*p);
      best_load = p->d_tot_mw;
    }
  }
  return out;
}

TradeoffPoint standard_operation_point(const Network& network, const RiskTable& risk, const SolverSettings& solver) {
  OpsConfig config;
  config.solver = solver;
  for (const auto& b : network.buses()) config.pins.push_back({{ComponentKind::bus, b.id}, PinState::force_on});
  for (const auto& l : network.lines()) config.pins.push_back({{ComponentKind::line, l.id}, PinState::force_on});
  for (const auto& g : network.generators()) {
    config.pins.push_back({{ComponentKind::generator, g.id}, PinState::force_on});
  }
  auto point = guarded("standard", 0.0, true, [&] {
    auto plan = solve_ops(network, risk, config);
    plan.method = "standard";
    return plan;
  });
  point.method = "standard";
  return point;
}

RiskBreakdown plan_risk_breakdown(const Network& network, const RiskTable& risk, const ShutoffPlan& plan) {
  return risk_breakdown(network, risk, plan.state());
}

}  // namespace gridshed
