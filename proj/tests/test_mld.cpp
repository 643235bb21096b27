#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "gridshed/mld.hpp"
#include "lp_oracle.hpp"

using namespace gridshed;

namespace {

std::optional<double> inner_lp(const milp::MilpProblem& fixed) {
  auto s = milp::solve_lp_relaxation(fixed);
  if (s.status != milp::SolveStatus::optimal) return std::nullopt;
  return s.objective;
}

bool subset(const ForcedOffSet& a, const ForcedOffSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

double max_line_risk(const Network& n, const RiskTable& r) {
  double m = 0.0;
  for (const auto& l : n.lines()) m = std::max(m, r.line(l.id));
  return m;
}

}  // namespace

TEST_CASE("transmission heuristic compares inclusively") {
  const auto c = corpus::small("path5");
  // Line risks: default exposure split evenly between the endpoint areas.
  std::vector<double> risks;
  for (const auto& l : c.network.lines()) risks.push_back(c.risk.line(l.id));
  const double pick = risks[1];
  const auto set = transmission_heuristic(c.network, c.risk, pick);
  for (const auto& l : c.network.lines()) {
    CHECK(set.count({ComponentKind::line, l.id}) == (c.risk.line(l.id) >= pick ? 1u : 0u));
  }
  for (const auto& ref : set) CHECK(ref.kind == ComponentKind::line);
  CHECK(transmission_heuristic(c.network, c.risk, max_line_risk(c.network, c.risk) + 1.0).empty());
  CHECK(transmission_heuristic(c.network, c.risk, 0.0).size() == c.network.lines().size());
}

TEST_CASE("area heuristic at the extremes") {
  const auto c = corpus::small("bowtie");
  CHECK(area_heuristic(c.network, c.risk, 1e9).empty());
  const auto all = area_heuristic(c.network, c.risk, 0.0);
  CHECK(all.size() == c.network.component_count());
}

TEST_CASE("area heuristic takes lines touching a triggered area") {
  const auto c = corpus::small("bowtie");
  // Area 3 (buses 4, 5) carries rho 4 and the largest total.
  const double t3 = area_risk_total(c.risk, c.network, 3);
  const auto set = area_heuristic(c.network, c.risk, t3);
  CHECK(set.count({ComponentKind::bus, 4}) == 1);
  CHECK(set.count({ComponentKind::bus, 5}) == 1);
  CHECK(set.count({ComponentKind::bus, 1}) == 0);
  // Lines 4 (3-4) and 6 (3-5) cross into area 3.
  CHECK(set.count({ComponentKind::line, 4}) == 1);
  CHECK(set.count({ComponentKind::line, 6}) == 1);
  CHECK(set.count({ComponentKind::line, 1}) == 0);
}

TEST_CASE("heuristic sets grow as thresholds fall") {
  std::mt19937 rng(5);
  for (const auto& c : corpus::small()) {
    std::uniform_real_distribution<double> line_t(0.0, max_line_risk(c.network, c.risk) + 1.0);
    std::uniform_real_distribution<double> area_t(0.0, 40.0);
    for (int i = 0; i < 10; ++i) {
      double a = line_t(rng), b = line_t(rng);
      if (a > b) std::swap(a, b);
      CHECK(subset(transmission_heuristic(c.network, c.risk, b), transmission_heuristic(c.network, c.risk, a)));
      double p = area_t(rng), q = area_t(rng);
      if (p > q) std::swap(p, q);
      CHECK(subset(area_heuristic(c.network, c.risk, q), area_heuristic(c.network, c.risk, p)));
    }
  }
}

TEST_CASE("MLD serves everything when nothing is forced off") {
  const auto c = corpus::small("triangle");
  const auto plan = solve_mld(c.network, c.risk, {});
  REQUIRE(plan.status == milp::SolveStatus::optimal);
  CHECK(plan.d_tot_mw == doctest::Approx(c.network.total_demand_mw()));
}

TEST_CASE("MLD with the only line forced off isolates the load") {
  const auto c = corpus::small("two_bus");
  const auto plan = solve_mld(c.network, c.risk, {{ComponentKind::line, 1}});
  CHECK(plan.d_tot_mw == 0.0);
  CHECK_FALSE(plan.line_on.at(1));
  CHECK(plan.forced_off.size() == 1);
}

TEST_CASE("MLD optimum matches enumeration on every corpus network") {
  for (const auto& c : corpus::small()) {
    CAPTURE(c.name);
    for (const ForcedOffSet& forced : {ForcedOffSet{}, ForcedOffSet{{ComponentKind::line, 1}}}) {
      OpsConfig config;
      const auto model = build_ops(c.network, c.risk, config, forced);
      const auto expected = oracle::binary_enumeration(model.problem, inner_lp);
      REQUIRE(expected);
      const auto plan = solve_mld(c.network, c.risk, forced);
      CHECK(std::abs(plan.objective - *expected) <= 1e-6);
      CHECK(evaluate_plan(c.network, c.risk, plan).clean());
    }
  }
}

TEST_CASE("MLD with no forced set equals OPS at alpha zero") {
  for (const auto& c : corpus::small()) {
    CAPTURE(c.name);
    const auto mld = solve_mld(c.network, c.risk, {});
    const auto ops = solve_ops(c.network, c.risk, OpsConfig{});
    CHECK(std::abs(mld.d_tot_mw - ops.d_tot_mw) <= 1e-6);
    CHECK(std::abs(mld.objective - ops.objective) <= 1e-6);
  }
}

TEST_CASE("pruning removes an energized bus with nothing attached") {
  const auto c = corpus::small("gen_spur");
  auto plan = solve_mld(c.network, c.risk, {});
  // Hand-built state: bus 3 and its generator cut loose from the loaded part.
  plan.line_on[2] = false;
  plan.flow_mw[2] = 0.0;
  plan.generator_on[3] = false;
  plan.generation_mw[3] = 0.0;
  plan.bus_on[3] = true;
  const auto before = total_system_risk(c.network, c.risk, plan.state());
  const auto pruned = prune_dead_islands(c.network, c.risk, plan);
  CHECK_FALSE(pruned.bus_on.at(3));
  CHECK(pruned.r_fire == doctest::Approx(before - c.risk.bus(3)));
}

TEST_CASE("pruning removes a generator-only island") {
  const auto c = corpus::small("gen_spur");
  auto plan = solve_mld(c.network, c.risk, {});
  // Island {3} with its generator energized and idle.
  plan.line_on[2] = false;
  plan.flow_mw[2] = 0.0;
  plan.bus_on[3] = true;
  plan.generator_on[3] = true;
  plan.generation_mw[3] = 0.0;
  const double island_risk = c.risk.bus(3) + c.risk.generator(3);
  const auto before = total_system_risk(c.network, c.risk, plan.state());
  const auto pruned = prune_dead_islands(c.network, c.risk, plan);
  CHECK_FALSE(pruned.bus_on.at(3));
  CHECK_FALSE(pruned.generator_on.at(3));
  CHECK(pruned.r_fire == doctest::Approx(before - island_risk));
  CHECK(pruned.d_tot_mw == plan.d_tot_mw);
}

TEST_CASE("pruning is a fixpoint on plans whose islands all serve load") {
  for (const auto& c : corpus::small()) {
    CAPTURE(c.name);
    const auto plan = run_heuristic_pipeline(c.network, c.risk, HeuristicKind::transmission, 0.5);
    const auto again = prune_dead_islands(c.network, c.risk, plan);
    CHECK(serialize_plan(again) == serialize_plan(plan));
    for (const auto& island : energized_islands(c.network, plan.state())) CHECK_FALSE(island.loads.empty());
  }
}

TEST_CASE("pipeline extremes") {
  for (const auto& c : corpus::small()) {
    CAPTURE(c.name);
    const auto none = run_heuristic_pipeline(c.network, c.risk, HeuristicKind::transmission,
                                             max_line_risk(c.network, c.risk) + 1.0);
    const auto mld = solve_mld(c.network, c.risk, {});
    CHECK(none.d_tot_mw == doctest::Approx(mld.d_tot_mw));
    const auto all = run_heuristic_pipeline(c.network, c.risk, HeuristicKind::transmission, 0.0);
    CHECK(all.method == "transmission");
    bool single_bus_supply = false;
    for (const auto& load : c.network.loads()) {
      for (auto g : c.network.generators_at(c.network.bus_index(load.bus))) {
        (void)g;
        single_bus_supply = true;
      }
    }
    if (!single_bus_supply) {
      CHECK(all.d_tot_mw == 0.0);
      CHECK(all.r_fire == 0.0);
    }
  }
}
