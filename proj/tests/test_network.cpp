#include <doctest.h>

#include <queue>
#include <set>
#include <random>

#include "corpus.hpp"
#include "gridshed/network.hpp"

using namespace gridshed;

namespace {

const char* two_bus_case = R"({
  "format_version": 1,
  "name": "two_bus",
  "base_mva": 100.0,
  "areas": [{"id": 1, "name": "a"}],
  "buses": [{"id": 1, "name": "b1", "area_id": 1}, {"id": 2, "name": "b2", "area_id": 1}],
  "lines": [{"id": 1, "from_bus": 1, "to_bus": 2, "susceptance_pu": 10.0, "thermal_limit_mw": 100.0,
             "voltage_kv": 230.0, "length_km": 0.0}],
  "generators": [{"id": 1, "bus": 1, "p_min_mw": 0.0, "p_max_mw": 100.0}],
  "loads": [{"id": 1, "bus": 2, "demand_mw": 50.0, "weight": 1.0}]
})";

// Same grid as two_bus_case in MATPOWER form.
const char* two_bus_matpower = R"(function mpc = two_bus
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;
  2 1 50 0 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
  1 0 0 0 0 1 100 1 100 0 0 0 0 0 0 0 0 0 0 0 0;
];
mpc.branch = [
  1 2 0 0.1 0 100 100 100 0 0 1 -360 360;
];
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

NetworkData path5_data() {
  NetworkData d;
  d.name = "path";
  d.areas = {{1, "a"}};
  for (int i = 1; i <= 5; ++i) d.buses.push_back({i, "b", std::nullopt, 1});
  for (int i = 1; i <= 4; ++i) d.lines.push_back({i, i, i + 1, 10.0, 100.0, 230.0, 10.0});
  d.generators.push_back({1, 1, 0.0, 100.0});
  d.loads.push_back({1, 5, 10.0, 1.0});
  return d;
}

// Breadth-first search over energized lines with both ends energized.
std::vector<std::vector<int>> bfs_islands(const Network& n, const EnergizationState& s) {
  std::map<int, std::vector<int>> adj;
  for (const auto& l : n.lines()) {
    if (s.lines.at(l.id) && s.buses.at(l.from_bus) && s.buses.at(l.to_bus)) {
      adj[l.from_bus].push_back(l.to_bus);
      adj[l.to_bus].push_back(l.from_bus);
    }
  }
  std::set<int> seen;
  std::vector<std::vector<int>> out;
  for (const auto& b : n.buses()) {
    if (!s.buses.at(b.id) || seen.count(b.id)) continue;
    std::vector<int> comp;
    std::queue<int> q;
    q.push(b.id);
    seen.insert(b.id);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      comp.push_back(u);
      for (int v : adj[u]) {
        if (seen.insert(v).second) q.push(v);
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(comp);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("two-bus case document maps field by field") {
  const auto n = parse_case(two_bus_case);
  CHECK(n.buses().size() == 2);
  CHECK(n.lines().size() == 1);
  CHECK(n.generators().size() == 1);
  CHECK(n.loads().size() == 1);
  CHECK(n.lines()[0].susceptance_pu == 10.0);
  CHECK(n.loads()[0].demand_mw == 50.0);
  CHECK(n.loads_at(n.bus_index(2)).size() == 1);
  CHECK(n.generators_at(n.bus_index(1)).size() == 1);
  CHECK(n.lines_at(n.bus_index(1)).size() == 1);
  CHECK(validate(n).empty());
}

TEST_CASE("dangling bus reference names the line and the bus") {
  const auto text = replace(two_bus_case, "\"to_bus\": 2", "\"to_bus\": 99");
  try {
    parse_case(text);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("line 1") != std::string::npos);
    CHECK(what.find("99") != std::string::npos);
  }
}

TEST_CASE("malformed and unversioned documents are parse errors") {
  CHECK_THROWS_AS(parse_case("{"), ParseError);
  CHECK_THROWS_AS(parse_case(replace(two_bus_case, "\"format_version\": 1", "\"format_version\": 2")), ParseError);
  CHECK_THROWS_AS(parse_case(replace(two_bus_case, "\"demand_mw\": 50.0", "\"demand_mw\": \"x\"")), ParseError);
}

TEST_CASE("duplicate ids and nonpositive limits are rejected by name") {
  CHECK_THROWS_WITH_AS(parse_case(replace(two_bus_case, "{\"id\": 2, \"name\": \"b2\"", "{\"id\": 1, \"name\": \"b2\"")),
                       doctest::Contains("duplicate bus 1"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_case(replace(two_bus_case, "\"thermal_limit_mw\": 100.0", "\"thermal_limit_mw\": 0.0")),
                       doctest::Contains("line 1"), ValidationError);
}

TEST_CASE("case serialization round-trips over the corpus") {
  std::vector<corpus::Instance> all = corpus::small();
  all.push_back(corpus::load(corpus::data_dir() / "rts73", "rts73"));
  for (const auto& c : all) {
    CAPTURE(c.name);
    const auto text = serialize_case(c.network);
    const auto again = parse_case(text);
    CHECK(again == c.network);
    CHECK(serialize_case(again) == text);
  }
}

TEST_CASE("MATPOWER subset and canonical format agree on the two-bus grid") {
  auto imported = parse_matpower_subset(two_bus_matpower);
  auto canonical = parse_case(two_bus_case);
  const auto& a = imported.network;
  REQUIRE(a.buses().size() == 2);
  REQUIRE(a.lines().size() == 1);
  CHECK(a.lines()[0].susceptance_pu == doctest::Approx(canonical.lines()[0].susceptance_pu));
  CHECK(a.lines()[0].thermal_limit_mw == canonical.lines()[0].thermal_limit_mw);
  CHECK(a.lines()[0].from_bus == 1);
  CHECK(a.lines()[0].to_bus == 2);
  CHECK(a.generators()[0].p_max_mw == canonical.generators()[0].p_max_mw);
  CHECK(a.generators()[0].bus == 1);
  CHECK(a.loads()[0].demand_mw == canonical.loads()[0].demand_mw);
  CHECK(a.loads()[0].bus == 2);
  CHECK(a.base_mva() == canonical.base_mva());
}

TEST_CASE("MATPOWER branch with zero reactance is a parse error") {
  const auto text = replace(two_bus_matpower, "1 2 0 0.1 0", "1 2 0 0 0");
  CHECK_THROWS_AS(parse_matpower_subset(text), ParseError);
}

TEST_CASE("MATPOWER HVDC table is ignored with a warning") {
  std::string text = two_bus_matpower;
  text += "mpc.dcline = [\n  1 2 1 10 10 0 0 1 1 0 100 -100 100 -100 100 0 0;\n];\n";
  const auto imported = parse_matpower_subset(text);
  CHECK(imported.network.lines().size() == 1);
  bool warned = false;
  for (const auto& w : imported.warnings) warned = warned || w.find("HVDC") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("MATPOWER case without a branch matrix is a parse error") {
  const auto text = replace(two_bus_matpower, "mpc.branch", "mpc.unused");
  CHECK_THROWS_AS(parse_matpower_subset(text), ParseError);
}

TEST_CASE("validate reports single broken rules") {
  CHECK(validate(parse_case(two_bus_case)).empty());
  {
    auto d = parse_case(two_bus_case).data();
    d.generators[0].p_min_mw = 150.0;
    const auto v = validate(Network(d));
    REQUIRE(v.size() == 1);
    CHECK(v[0].entity == "gen");
    CHECK(v[0].id == 1);
  }
  {
    auto d = parse_case(two_bus_case).data();
    d.loads[0].weight = 0.0;
    const auto v = validate(Network(d));
    REQUIRE(v.size() == 1);
    CHECK(v[0].entity == "load");
  }
}

TEST_CASE("triangle islands") {
  const auto c = corpus::small("triangle");
  auto s = EnergizationState::all_on(c.network);
  auto islands = energized_islands(c.network, s);
  REQUIRE(islands.size() == 1);
  CHECK(islands[0].buses == std::vector<int>{1, 2, 3});
  for (auto& [id, on] : s.lines) on = false;
  islands = energized_islands(c.network, s);
  CHECK(islands.size() == 3);
  for (const auto& i : islands) CHECK(i.buses.size() == 1);
}

TEST_CASE("path islands split at the cut line") {
  const Network n(path5_data());
  for (int cut = 1; cut <= 4; ++cut) {
    auto s = EnergizationState::all_on(n);
    s.lines[cut] = false;
    const auto islands = energized_islands(n, s);
    REQUIRE(islands.size() == 2);
    CHECK(islands[0].buses.size() == static_cast<std::size_t>(cut));
    CHECK(islands[1].buses.size() == static_cast<std::size_t>(5 - cut));
  }
}

TEST_CASE("islands partition the energized buses and match BFS") {
  std::mt19937 rng(11);
  std::bernoulli_distribution coin(0.7);
  for (const auto& c : corpus::small()) {
    CAPTURE(c.name);
    for (int trial = 0; trial < 20; ++trial) {
      auto s = EnergizationState::all_on(c.network);
      for (auto& [id, on] : s.buses) on = coin(rng);
      for (auto& [id, on] : s.lines) on = coin(rng);
      const auto islands = energized_islands(c.network, s);
      std::vector<std::vector<int>> got;
      std::set<int> buses, lines;
      for (const auto& i : islands) {
        got.push_back(i.buses);
        for (int b : i.buses) CHECK(buses.insert(b).second);
        lines.insert(i.lines.begin(), i.lines.end());
      }
      std::sort(got.begin(), got.end());
      CHECK(got == bfs_islands(c.network, s));
      std::set<int> energized_buses, energized_lines;
      for (const auto& [id, on] : s.buses) {
        if (on) energized_buses.insert(id);
      }
      for (const auto& l : c.network.lines()) {
        if (s.lines.at(l.id) && s.buses.at(l.from_bus) && s.buses.at(l.to_bus)) energized_lines.insert(l.id);
      }
      CHECK(buses == energized_buses);
      CHECK(lines == energized_lines);
    }
  }
}

TEST_CASE("islands need a complete state") {
  const auto c = corpus::small("triangle");
  auto s = EnergizationState::all_on(c.network);
  s.lines.erase(2);
  CHECK_THROWS_AS(energized_islands(c.network, s), Error);
}
