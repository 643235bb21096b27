#include "branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>

#include "simplex.hpp"

namespace gridshed::milp::detail {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double inf = std::numeric_limits<double>::infinity();

// Heuristic schedule.
constexpr std::size_t dive_interval = 200;
constexpr std::size_t rins_interval = 400;
constexpr std::size_t rins_node_limit = 400;
constexpr double rins_min_fixed_share = 0.3;

struct LpModel {
  LpData data;
  double sign = 1.0;  // internal objective = sign * problem objective (without constant)
  std::vector<std::size_t> binaries;
};

LpModel to_lp(const MilpProblem& problem) {
  LpModel model;
  const auto& vars = problem.variables();
  model.sign = problem.objective().sense == ObjectiveSense::maximize ? -1.0 : 1.0;
  auto& d = model.data;
  d.n = vars.size();
  d.m = problem.constraints().size();
  d.cost.assign(d.n, 0.0);
  for (const auto& t : problem.objective().terms) d.cost[t.var] += model.sign * t.coef;
  for (std::size_t j = 0; j < d.n; ++j) {
    d.lo.push_back(vars[j].lower);
    d.hi.push_back(vars[j].upper);
    if (vars[j].type == VarType::binary) model.binaries.push_back(j);
  }
  for (const auto& c : problem.constraints()) {
    std::vector<std::pair<std::size_t, double>> row;
    row.reserve(c.terms.size());
    for (const auto& t : c.terms) row.emplace_back(t.var, t.coef);
    d.rows.push_back(std::move(row));
    d.row_lo.push_back(c.sense == RowSense::less_equal ? -inf : c.rhs);
    d.row_hi.push_back(c.sense == RowSense::greater_equal ? inf : c.rhs);
  }
  return model;
}

double to_problem_objective(const MilpProblem& problem, const LpModel& model, double internal) {
  return model.sign * internal + problem.objective().constant;
}

SolveStatus map_lp_status(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return SolveStatus::optimal;
    case LpStatus::infeasible: return SolveStatus::infeasible;
    case LpStatus::unbounded: return SolveStatus::unbounded;
    case LpStatus::iteration_limit:
    case LpStatus::numerical:
    case LpStatus::cutoff: return SolveStatus::numerical_failure;
  }
  return SolveStatus::numerical_failure;
}

std::string lp_diagnostic(LpStatus s) {
  if (s == LpStatus::iteration_limit) return "simplex iteration limit reached (suspected cycling)";
  if (s == LpStatus::numerical) return "numerical trouble in the simplex (singular basis or lost feasibility)";
  return {};
}

using Fixing = std::vector<std::int8_t>;  // per binary: -1 free, 0 or 1

struct Node {
  std::size_t id = 0;
  double bound = -inf;  // internal (minimization) LP bound of the parent
  Fixing fix;
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class Search {
 public:
  Search(const MilpProblem& problem, const SolveOptions& options, Strategy strategy, std::string name,
         bool nested = false)
      : problem_(problem),
        options_(options),
        strategy_(strategy),
        nested_(nested),
        model_(to_lp(problem)),
        engine_(model_.data) {
    result_.stats.backend = std::move(name);
    start_ = Clock::now();
  }

  MilpSolution run();

 private:
  void apply(const Fixing& fix, BoundedSimplex& engine) const {
    for (std::size_t b = 0; b < model_.binaries.size(); ++b) {
      const std::size_t j = model_.binaries[b];
      const auto& v = problem_.variables()[j];
      if (fix[b] < 0) {
        engine.set_bounds(j, v.lower, v.upper);
      } else {
        engine.set_bounds(j, fix[b], fix[b]);
      }
    }
  }

  LpStatus solve_node(const Node& node, bool warm_in_place);
  // Index into binaries of the most fractional one, or npos when integral.
  std::size_t branching_choice(const std::vector<double>& x) const;
  double fractionality(double v) const { return std::min(v - std::floor(v), std::ceil(v) - v); }
  void consider_incumbent(double internal, std::vector<double> x);
  // LP with every binary fixed; warm starts from `from` when given.
  void try_pattern(const Fixing& fix, const BoundedSimplex* from);
  void try_roundings(const std::vector<double>& x, const BoundedSimplex& from);
  void dive(const BoundedSimplex& from, Fixing fix);
  void rins(const std::vector<double>& x, const Fixing& fix);
  void reduced_cost_fixing(const BoundedSimplex& engine, double z, Fixing& fix) const;
  void seed_start_points();

  double cutoff() const { return incumbent_.empty() ? inf : best_internal_ - tolerance(); }
  bool prunable(double bound) const {
    if (incumbent_.empty()) return false;
    return bound >= cutoff();
  }
  double tolerance() const {
    const double scale = std::abs(to_problem_objective(problem_, model_, best_internal_));
    return std::max(options_.absolute_gap, options_.relative_gap * scale);
  }
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  bool out_of_time() const { return options_.time_limit_s && elapsed() >= *options_.time_limit_s; }
  bool out_of_budget() const {
    if (options_.node_limit && result_.stats.nodes >= *options_.node_limit) return true;
    return out_of_time();
  }
  Fixing fixes_of(const std::vector<double>& x) const {
    Fixing fix(model_.binaries.size());
    for (std::size_t b = 0; b < fix.size(); ++b) fix[b] = x[model_.binaries[b]] >= 0.5 ? 1 : 0;
    return fix;
  }
  double internal_objective(const std::vector<double>& x) const {
    double z = 0.0;
    for (std::size_t j = 0; j < model_.data.n; ++j) z += model_.data.cost[j] * x[j];
    return z;
  }
  void count(const BoundedSimplex& engine, std::size_t before) {
    ++result_.stats.lp_solves;
    result_.stats.simplex_iterations += engine.iterations() - before;
  }
  void finish(SolveStatus status, double open_bound);

  const MilpProblem& problem_;
  const SolveOptions& options_;
  Strategy strategy_;
  bool nested_;
  LpModel model_;
  BoundedSimplex engine_;
  MilpSolution result_;
  Clock::time_point start_;
  std::size_t next_id_ = 0;

  double best_internal_ = inf;
  std::vector<double> incumbent_;
};

LpStatus Search::solve_node(const Node& node, bool warm_in_place) {
  const auto before = engine_.iterations();
  LpStatus status;
  engine_.set_cutoff(cutoff());
  if (strategy_ == Strategy::warm_dual && (warm_in_place || node.basis)) {
    apply(node.fix, engine_);
    if (!warm_in_place) engine_.restore(*node.basis);
    status = engine_.dual();
  } else {
    engine_.reset();
    apply(node.fix, engine_);
    status = engine_.primal();
  }
  if (status == LpStatus::iteration_limit || status == LpStatus::numerical) {
    // One cold retry before giving up on the node.
    engine_.reset();
    apply(node.fix, engine_);
    status = engine_.primal();
  }
  count(engine_, before);
  return status;
}

std::size_t Search::branching_choice(const std::vector<double>& x) const {
  std::size_t pick = npos_index;
  double best = 0.0;
  for (std::size_t b = 0; b < model_.binaries.size(); ++b) {
    const double frac = fractionality(x[model_.binaries[b]]);
    if (frac <= options_.integrality_tol) continue;
    if (pick == npos_index || frac > best) {
      best = frac;
      pick = b;
    }
  }
  return pick;
}

void Search::consider_incumbent(double internal, std::vector<double> x) {
  if (internal < best_internal_) {
    best_internal_ = internal;
    incumbent_ = std::move(x);
    result_.stats.incumbent_history.push_back(to_problem_objective(problem_, model_, internal));
  }
}

void Search::try_pattern(const Fixing& fix, const BoundedSimplex* from) {
  BoundedSimplex probe = from ? *from : BoundedSimplex(model_.data);
  if (!from) probe.reset();
  apply(fix, probe);
  probe.set_cutoff(cutoff());
  const auto before = probe.iterations();
  auto status = from ? probe.dual() : probe.primal();
  if (status == LpStatus::iteration_limit || status == LpStatus::numerical) {
    probe.reset();
    apply(fix, probe);
    status = probe.primal();
  }
  count(probe, before);
  if (status == LpStatus::optimal) consider_incumbent(probe.objective(), probe.values());
}

void Search::try_roundings(const std::vector<double>& x, const BoundedSimplex& from) {
  const std::size_t nb = model_.binaries.size();
  const double tol = options_.integrality_tol;
  Fixing nearest(nb), up(nb), down(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const double v = x[model_.binaries[b]];
    nearest[b] = v >= 0.5 ? 1 : 0;
    up[b] = v > tol ? 1 : 0;
    down[b] = v >= 1.0 - tol ? 1 : 0;
  }
  try_pattern(nearest, &from);
  if (up != nearest) try_pattern(up, &from);
  if (down != nearest && down != up) try_pattern(down, &from);
}

// Fix the least fractional free binary to its nearest value, re-solve, repeat.
// An infeasible fixing is flipped once; a second failure ends the dive.
void Search::dive(const BoundedSimplex& from, Fixing fix) {
  BoundedSimplex probe = from;
  const std::size_t nb = model_.binaries.size();
  for (std::size_t step = 0; step <= nb; ++step) {
    if (out_of_time()) return;
    auto x = probe.values();
    std::size_t pick = npos_index;
    double best = inf;
    for (std::size_t b = 0; b < nb; ++b) {
      if (fix[b] >= 0) continue;
      const double frac = fractionality(x[model_.binaries[b]]);
      if (frac <= options_.integrality_tol) continue;
      if (frac < best) {
        best = frac;
        pick = b;
      }
    }
    if (pick == npos_index) {
      consider_incumbent(probe.objective(), std::move(x));
      return;
    }
    const std::int8_t value = x[model_.binaries[pick]] >= 0.5 ? 1 : 0;
    LpStatus status = LpStatus::infeasible;
    for (std::int8_t attempt : {value, static_cast<std::int8_t>(1 - value)}) {
      fix[pick] = attempt;
      BoundedSimplex trial = probe;
      apply(fix, trial);
      trial.set_cutoff(cutoff());
      const auto before = trial.iterations();
      status = trial.dual();
      count(trial, before);
      if (status == LpStatus::optimal) {
        probe = std::move(trial);
        break;
      }
      if (status != LpStatus::infeasible) return;
    }
    if (status != LpStatus::optimal) return;
    if (prunable(probe.objective())) return;
  }
}

// Sub-MIP over the binaries where the node LP disagrees with the incumbent.
void Search::rins(const std::vector<double>& x, const Fixing& fix) {
  if (incumbent_.empty()) return;
  MilpProblem sub = problem_;
  std::size_t fixed = 0;
  for (std::size_t b = 0; b < model_.binaries.size(); ++b) {
    const std::size_t j = model_.binaries[b];
    const double inc = incumbent_[j];
    if (fix[b] >= 0) {
      sub.set_bounds(j, fix[b], fix[b]);
      ++fixed;
    } else if (std::abs(x[j] - inc) <= options_.integrality_tol) {
      sub.set_bounds(j, std::round(inc), std::round(inc));
      ++fixed;
    }
  }
  const std::size_t nb = model_.binaries.size();
  if (fixed == nb || fixed < rins_min_fixed_share * static_cast<double>(nb)) return;
  SolveOptions sub_options = options_;
  sub_options.node_limit = rins_node_limit;
  sub_options.start_points = {incumbent_};
  if (options_.time_limit_s) {
    const double left = *options_.time_limit_s - elapsed();
    if (left <= 0.0) return;
    sub_options.time_limit_s = left;
  }
  Search inner(sub, sub_options, strategy_, result_.stats.backend, true);
  const auto found = inner.run();
  result_.stats.lp_solves += found.stats.lp_solves;
  result_.stats.simplex_iterations += found.stats.simplex_iterations;
  if (!found.has_values()) return;
  consider_incumbent(internal_objective(found.values), found.values);
}

// A free binary resting at a bound whose reduced cost alone lifts the node
// bound past the cutoff cannot move in any improving descendant.
void Search::reduced_cost_fixing(const BoundedSimplex& engine, double z, Fixing& fix) const {
  if (incumbent_.empty()) return;
  const double limit = cutoff();
  for (std::size_t b = 0; b < model_.binaries.size(); ++b) {
    if (fix[b] >= 0) continue;
    const std::size_t j = model_.binaries[b];
    if (engine.is_basic(j)) continue;
    const double d = engine.reduced_cost(j);
    const double v = engine.value(j);
    if (v <= engine.lower(j) && d > 0.0 && z + d >= limit) fix[b] = 0;
    if (v >= engine.upper(j) && d < 0.0 && z - d >= limit) fix[b] = 1;
  }
}

void Search::seed_start_points() {
  for (const auto& point : options_.start_points) {
    if (point.size() != model_.data.n) {
      throw ValidationError("start point has " + std::to_string(point.size()) + " values for " +
                            std::to_string(model_.data.n) + " variables");
    }
    auto fix = fixes_of(point);
    bool within_bounds = true;
    for (std::size_t b = 0; b < fix.size(); ++b) {
      const auto& v = problem_.variables()[model_.binaries[b]];
      if (fix[b] < v.lower || fix[b] > v.upper) within_bounds = false;
    }
    if (within_bounds) try_pattern(fix, nullptr);
  }
}

void Search::finish(SolveStatus status, double open_bound) {
  auto& r = result_;
  r.status = status;
  r.stats.wall_time_s = elapsed();
  if (incumbent_.empty()) {
    r.values.clear();
    r.stats.best_bound = to_problem_objective(problem_, model_, open_bound);
    return;
  }
  // Polish: resolve the continuous part with the binaries fixed, then snap them exactly.
  auto fix = fixes_of(incumbent_);
  BoundedSimplex polish(model_.data);
  apply(fix, polish);
  std::vector<double> values = incumbent_;
  if (polish.primal() == LpStatus::optimal) values = polish.values();
  for (std::size_t b = 0; b < fix.size(); ++b) values[model_.binaries[b]] = fix[b];
  r.values = std::move(values);
  r.objective = evaluate_objective(problem_, r.values);
  const double bound = std::min(open_bound, best_internal_);
  r.stats.best_bound = to_problem_objective(problem_, model_, bound);
  const double denom = std::max(1e-10, std::abs(r.objective));
  r.stats.gap = std::abs(r.stats.best_bound - r.objective) / denom;
  if (status == SolveStatus::optimal) r.stats.gap = std::min(r.stats.gap, options_.relative_gap);
}

MilpSolution Search::run() {
  const std::size_t nb = model_.binaries.size();
  seed_start_points();
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(Node{next_id_++, -inf, Fixing(nb, -1), nullptr});
  bool limit = false;

  std::optional<Node> plunge;
  while (plunge || !open.empty()) {
    if (out_of_budget()) {
      limit = true;
      break;
    }
    Node node;
    bool in_place = false;
    if (plunge) {
      node = std::move(*plunge);
      plunge.reset();
      in_place = true;
    } else {
      node = open.top();
      open.pop();
    }
    if (prunable(node.bound)) continue;

    ++result_.stats.nodes;
    const bool root = result_.stats.nodes == 1;
    const auto status = solve_node(node, in_place);
    if (status == LpStatus::infeasible || status == LpStatus::cutoff) continue;
    if (status == LpStatus::unbounded) {
      if (root) {
        finish(SolveStatus::unbounded, -inf);
        return std::move(result_);
      }
      continue;
    }
    if (status != LpStatus::optimal) {
      finish(SolveStatus::numerical_failure, -inf);
      result_.diagnostics = lp_diagnostic(status);
      return std::move(result_);
    }

    const double z = engine_.objective();
    if (prunable(z)) continue;
    auto x = engine_.values();
    std::size_t pick = branching_choice(x);
    if (pick == npos_index) {
      consider_incumbent(z, std::move(x));
      continue;
    }
    if (root) try_roundings(x, engine_);
    if (root || result_.stats.nodes % dive_interval == 0) dive(engine_, node.fix);
    if (!nested_ && result_.stats.nodes % rins_interval == 0) rins(x, node.fix);
    if (prunable(z)) continue;
    reduced_cost_fixing(engine_, z, node.fix);
    if (node.fix[pick] >= 0) {
      // The branching candidate itself got fixed; the children inherit the fixings.
      Node child{next_id_++, z, node.fix, nullptr};
      if (strategy_ == Strategy::warm_dual) {
        child.basis = std::make_shared<const Basis>(engine_.basis());
        plunge = std::move(child);
      } else {
        open.push(std::move(child));
      }
      continue;
    }

    const double v = x[model_.binaries[pick]];
    Node down{next_id_++, z, node.fix, nullptr};
    Node up{next_id_++, z, node.fix, nullptr};
    down.fix[pick] = 0;
    up.fix[pick] = 1;
    if (strategy_ == Strategy::warm_dual) {
      auto basis = std::make_shared<const Basis>(engine_.basis());
      down.basis = basis;
      up.basis = basis;
      if (v >= 0.5) {
        open.push(std::move(down));
        plunge = std::move(up);
      } else {
        open.push(std::move(up));
        plunge = std::move(down);
      }
    } else {
      open.push(std::move(down));
      open.push(std::move(up));
    }
  }

  double open_bound = inf;
  if (plunge) open_bound = std::min(open_bound, plunge->bound);
  if (!open.empty()) open_bound = std::min(open_bound, open.top().bound);
  if (limit) {
    finish(SolveStatus::limit_hit, open_bound);
    result_.diagnostics = options_.node_limit && result_.stats.nodes >= *options_.node_limit ? "node limit reached"
                                                                                               : "time limit reached";
    return std::move(result_);
  }
  finish(incumbent_.empty() ? SolveStatus::infeasible : SolveStatus::optimal, open_bound);
  return std::move(result_);
}

}  // namespace

MilpSolution solve_relaxation(const MilpProblem& problem, const SolveOptions& options) {
  check_options(options);
  const auto start = Clock::now();
  auto model = to_lp(problem);
  BoundedSimplex engine(model.data);
  const auto status = engine.primal();
  MilpSolution out;
  out.status = map_lp_status(status);
  out.diagnostics = lp_diagnostic(status);
  out.stats.backend = "reference";
  out.stats.nodes = 1;
  out.stats.lp_solves = 1;
  out.stats.simplex_iterations = engine.iterations();
  if (status == LpStatus::optimal) {
    out.values = engine.values();
    out.objective = evaluate_objective(problem, out.values);
    out.stats.best_bound = out.objective;
  }
  out.stats.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

MilpSolution branch_and_bound(const MilpProblem& problem, const SolveOptions& options, Strategy strategy,
                              std::string backend_name) {
  check_options(options);
  Search search(problem, options, strategy, std::move(backend_name));
  return search.run();
}

}  // namespace gridshed::milp::detail
