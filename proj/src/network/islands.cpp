#include <algorithm>
#include <numeric>

#include "gridshed/network.hpp"

namespace gridshed {

namespace {

template <class Map>
auto require(const Map& map, int id, std::string_view kind) {
  auto it = map.find(id);
  if (it == map.end()) {
    throw Error("energization state has no entry for " + std::string(kind) + " " + std::to_string(id));
  }
  return it->second;
}

}  // namespace

std::vector<Island> energized_islands(const Network& network, const EnergizationState& state) {
  const auto buses = network.buses();
  const auto lines = network.lines();

  std::vector<bool> bus_on(buses.size());
  for (std::size_t i = 0; i < buses.size(); ++i) bus_on[i] = require(state.buses, buses[i].id, "bus");
  std::vector<bool> line_on(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) line_on[i] = require(state.lines, lines[i].id, "line");
  for (const auto& g : network.generators()) require(state.generators, g.id, "gen");
  for (const auto& d : network.loads()) require(state.loads, d.id, "load");

  // Breadth-first search from each unvisited energized bus, visiting buses in id order.
  std::vector<std::size_t> order(buses.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return buses[a].id < buses[b].id; });

  std::vector<bool> seen(buses.size(), false);
  std::vector<Island> islands;
  std::vector<std::size_t> queue;
  for (auto start : order) {
    if (!bus_on[start] || seen[start]) continue;
    Island island;
    queue.assign(1, start);
    seen[start] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto b = queue[head];
      island.buses.push_back(buses[b].id);
      for (auto g : network.generators_at(b)) {
        const auto& gen = network.generators()[g];
        if (state.generators.at(gen.id)) island.generators.push_back(gen.id);
      }
      for (auto d : network.loads_at(b)) {
        const auto& load = network.loads()[d];
        if (state.loads.at(load.id) > 0.0) island.loads.push_back(load.id);
      }
      for (auto l : network.lines_at(b)) {
        if (!line_on[l]) continue;
        const auto& line = lines[l];
        const auto f = network.bus_index(line.from_bus);
        const auto t = network.bus_index(line.to_bus);
        if (f == npos_index || t == npos_index || !bus_on[f] || !bus_on[t]) continue;
        if (b == f) island.lines.push_back(line.id);  // record each line once, from its from-end
        const auto other = (b == f) ? t : f;
        if (!seen[other]) {
          seen[other] = true;
          queue.push_back(other);
        }
      }
    }
    std::sort(island.buses.begin(), island.buses.end());
    std::sort(island.lines.begin(), island.lines.end());
    std::sort(island.generators.begin(), island.generators.end());
    std::sort(island.loads.begin(), island.loads.end());
    islands.push_back(std::move(island));
  }
  return islands;
}

}  // namespace gridshed
