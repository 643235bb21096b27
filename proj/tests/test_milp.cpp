#include <doctest.h>

#include <random>

#include "gridshed/milp.hpp"
#include "lp_oracle.hpp"

using namespace gridshed::milp;

namespace {

const std::vector<std::string> builtin_backends = {"reference", "dual"};

// Rows are built around a random interior point so most instances are feasible;
// every fifth one gets a contradictory pair of rows.
MilpProblem random_lp(std::mt19937& rng, std::size_t n, std::size_t m, bool maximize, bool contradictory) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> width(0.5, 6.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> sense(0, 2);
  MilpProblem p;
  std::vector<double> inside;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = coef(rng);
    const double hi = lo + width(rng);
    p.add_variable("x" + std::to_string(j), lo, hi);
    inside.push_back(lo + unit(rng) * (hi - lo));
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Term> terms;
    double activity = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      terms.push_back({j, coef(rng)});
      activity += terms.back().coef * inside[j];
    }
    const int s = sense(rng);
    const double slack = 2.0 * unit(rng);
    if (s == 0) p.add_constraint("c" + std::to_string(i), terms, RowSense::less_equal, activity + slack);
    if (s == 1) p.add_constraint("c" + std::to_string(i), terms, RowSense::greater_equal, activity - slack);
    if (s == 2) p.add_constraint("c" + std::to_string(i), terms, RowSense::equal, activity);
  }
  if (contradictory) {
    p.add_constraint("up", {{0, 1.0}, {1, 1.0}}, RowSense::greater_equal, 3.0);
    p.add_constraint("down", {{0, 1.0}, {1, 1.0}}, RowSense::less_equal, 2.0);
  }
  std::vector<Term> obj;
  for (std::size_t j = 0; j < n; ++j) obj.push_back({j, coef(rng)});
  p.set_objective(maximize ? ObjectiveSense::maximize : ObjectiveSense::minimize, obj, coef(rng));
  return p;
}

MilpProblem random_milp(std::mt19937& rng, std::size_t binaries, std::size_t continuous, std::size_t rows) {
  std::uniform_real_distribution<double> coef(-4.0, 4.0);
  MilpProblem p;
  for (std::size_t j = 0; j < binaries; ++j) p.add_binary("b" + std::to_string(j));
  for (std::size_t j = 0; j < continuous; ++j) p.add_variable("y" + std::to_string(j), 0.0, 3.0);
  const std::size_t n = binaries + continuous;
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    for (std::size_t j = 0; j < n; ++j) terms.push_back({j, coef(rng)});
    p.add_constraint("c" + std::to_string(i), terms, RowSense::less_equal, std::abs(coef(rng)) + 0.5);
  }
  std::vector<Term> obj;
  for (std::size_t j = 0; j < n; ++j) obj.push_back({j, coef(rng)});
  p.set_objective(ObjectiveSense::maximize, obj);
  return p;
}

std::optional<double> inner_lp(const MilpProblem& fixed) {
  auto s = solve_lp_relaxation(fixed);
  if (s.status != SolveStatus::optimal) return std::nullopt;
  return s.objective;
}

}  // namespace

TEST_CASE("single bounded variable LP") {
  MilpProblem p;
  auto x = p.add_variable("x", 0.0, 10.0);
  p.add_constraint("cap", {{x, 1.0}}, RowSense::less_equal, 3.0);
  p.set_objective(ObjectiveSense::maximize, {{x, 1.0}});
  auto s = solve_lp_relaxation(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.value(p, "x") == doctest::Approx(3.0));
}

TEST_CASE("two variable LP on the simplex face") {
  MilpProblem p;
  auto x = p.add_variable("x", 0.0, 1.0);
  auto y = p.add_variable("y", 0.0, 1.0);
  p.add_constraint("sum", {{x, 1.0}, {y, 1.0}}, RowSense::less_equal, 1.0);
  p.set_objective(ObjectiveSense::maximize, {{x, 1.0}, {y, 1.0}});
  auto s = solve_lp_relaxation(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(1.0));
}

TEST_CASE("infeasible LP is reported") {
  MilpProblem p;
  auto x = p.add_variable("x", 0.0, 1.0);
  p.add_constraint("low", {{x, 1.0}}, RowSense::greater_equal, 2.0);
  p.set_objective(ObjectiveSense::maximize, {{x, 1.0}});
  CHECK(solve_lp_relaxation(p).status == SolveStatus::infeasible);
  CHECK(solve(p).status == SolveStatus::infeasible);
}

TEST_CASE("random dense LPs match vertex enumeration") {
  std::mt19937 rng(20240611);
  int feasible = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_lp(rng, 3 + trial % 2, 4, trial % 2 == 0, trial % 5 == 4);
    const auto expected = oracle::vertex_enumeration(p);
    const auto got = solve_lp_relaxation(p);
    CAPTURE(trial);
    if (!expected) {
      CHECK(got.status == SolveStatus::infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(got.status == SolveStatus::optimal);
    CHECK(got.objective == doctest::Approx(*expected).epsilon(1e-9).scale(1.0));
    CHECK(std::abs(got.objective - *expected) <= 1e-6);
    CHECK(check_point(p, got.values).ok(1e-7, 1.0));
  }
  CHECK(feasible == 16);
}

TEST_CASE("equality rows and free-signed bounds") {
  MilpProblem p;
  auto x = p.add_variable("x", -4.0, 4.0);
  auto y = p.add_variable("y", -4.0, 4.0);
  p.add_constraint("eq", {{x, 1.0}, {y, -2.0}}, RowSense::equal, 1.0);
  p.add_constraint("le", {{x, 1.0}, {y, 1.0}}, RowSense::less_equal, 2.5);
  p.set_objective(ObjectiveSense::minimize, {{x, -1.0}, {y, 3.0}}, 2.0);
  auto s = solve_lp_relaxation(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(std::abs(s.objective - *oracle::vertex_enumeration(p)) <= 1e-9);
}

TEST_CASE("small knapsack picks the heavier item") {
  MilpProblem p;
  auto a = p.add_binary("a");
  auto b = p.add_binary("b");
  p.add_constraint("one", {{a, 1.0}, {b, 1.0}}, RowSense::less_equal, 1.0);
  p.set_objective(ObjectiveSense::maximize, {{a, 2.0}, {b, 1.0}});
  for (const auto& backend : builtin_backends) {
    auto s = solve_with(backend, p);
    CAPTURE(backend);
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.objective == doctest::Approx(2.0));
    CHECK(s.value(p, "a") == 1.0);
    CHECK(s.value(p, "b") == 0.0);
    CHECK(s.stats.backend == backend);
  }
}

TEST_CASE("pure LP through solve equals the relaxation") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_lp(rng, 4, 3, true, false);
    const auto relax = solve_lp_relaxation(p);
    const auto full = solve_with("reference", p);
    CHECK(relax.status == full.status);
    if (relax.status == SolveStatus::optimal) CHECK(std::abs(relax.objective - full.objective) <= 1e-9);
  }
}

TEST_CASE("random mixed-binary programs match enumeration on every backend") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const auto p = random_milp(rng, 4 + trial % 5, 2, 4);
    const auto expected = oracle::binary_enumeration(p, inner_lp);
    CAPTURE(trial);
    for (const auto& backend : builtin_backends) {
      CAPTURE(backend);
      const auto s = solve_with(backend, p);
      if (!expected) {
        CHECK(s.status == SolveStatus::infeasible);
        continue;
      }
      REQUIRE(s.status == SolveStatus::optimal);
      CHECK(std::abs(s.objective - *expected) <= 1e-6);
      CHECK(check_point(p, s.values).ok(1e-7, 1e-9));
      // Improving incumbents only.
      const auto& h = s.stats.incumbent_history;
      for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] >= h[i - 1]);
      CHECK(s.stats.best_bound >= s.objective - 1e-9);
      CHECK(s.stats.gap <= 1e-6);
    }
  }
}

TEST_CASE("solves are deterministic") {
  std::mt19937 rng(3);
  const auto p = random_milp(rng, 10, 3, 6);
  for (const auto& backend : builtin_backends) {
    const auto a = solve_with(backend, p);
    const auto b = solve_with(backend, p);
    CHECK(a.status == b.status);
    CHECK(a.values == b.values);
    CHECK(a.stats.nodes == b.stats.nodes);
  }
}

TEST_CASE("node limit returns the incumbent when one exists") {
  std::mt19937 rng(11);
  const auto p = random_milp(rng, 12, 2, 6);
  SolveOptions options;
  options.node_limit = 1;
  const auto s = solve_with("reference", p, options);
  CHECK(s.status == SolveStatus::limit_hit);
  CHECK(s.stats.nodes == 1);
  if (!s.values.empty()) CHECK(check_point(p, s.values).ok(1e-7, 1e-9));
}

TEST_CASE("unknown backend name is rejected") {
  MilpProblem p;
  p.add_variable("x", 0.0, 1.0);
  CHECK_THROWS_AS(solve_with("nope", p), UnknownBackendError);
}

TEST_CASE("registered backends are dispatched by name") {
  struct Fixed : Backend {
    MilpSolution solve(const MilpProblem&, const SolveOptions&) const override {
      MilpSolution s;
      s.status = SolveStatus::optimal;
      s.objective = 42.0;
      return s;
    }
  };
  register_backend("fixed-test", std::make_shared<Fixed>());
  MilpProblem p;
  p.add_variable("x", 0.0, 1.0);
  const auto s = solve_with("fixed-test", p);
  CHECK(s.objective == 42.0);
  CHECK(s.stats.backend == "fixed-test");
}

TEST_CASE("problem invariants are enforced") {
  MilpProblem p;
  CHECK_THROWS_AS(p.add_variable("x", 0.0, std::numeric_limits<double>::infinity()), gridshed::ValidationError);
  CHECK_THROWS_AS(p.add_variable("b", 0.0, 2.0, VarType::binary), gridshed::ValidationError);
  p.add_variable("x", 0.0, 1.0);
  CHECK_THROWS_AS(p.add_variable("x", 0.0, 1.0), gridshed::ValidationError);
  CHECK_THROWS_AS(p.add_constraint("bad", {{5, 1.0}}, RowSense::less_equal, 1.0), gridshed::ValidationError);
  SolveOptions o;
  o.relative_gap = -1.0;
  CHECK_THROWS_AS(solve(p, o), gridshed::ValidationError);
}

TEST_CASE("LP dump is stable text") {
  MilpProblem p;
  auto x = p.add_variable("x", 0.0, 2.5);
  auto b = p.add_binary("b");
  p.add_constraint("link", {{x, 1.0}, {b, -2.5}}, RowSense::less_equal, 0.0);
  p.add_constraint("fix", {{x, 0.1}}, RowSense::equal, 0.2);
  p.set_objective(ObjectiveSense::maximize, {{x, 1.0}, {b, -0.3}}, 1.5);
  const std::string expected =
      "\\ gridshed problem: 2 variables, 2 constraints\n"
      "Maximize\n"
      " obj: 1 x - 0.3 b + 1.5\n"
      "Subject To\n"
      " link: 1 x - 2.5 b <= 0\n"
      " fix: 0.1 x = 0.2\n"
      "Bounds\n"
      " 0 <= x <= 2.5\n"
      "Binaries\n"
      " b\n"
      "End\n";
  CHECK(write_lp(p) == expected);
  CHECK(write_lp(p) == write_lp(MilpProblem(p)));
}
