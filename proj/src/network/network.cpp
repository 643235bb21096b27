#include "gridshed/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gridshed {

Network::Network(NetworkData data) : data_(std::move(data)) {
  for (std::size_t i = 0; i < data_.areas.size(); ++i) area_index_.try_emplace(data_.areas[i].id, i);
  for (std::size_t i = 0; i < data_.buses.size(); ++i) bus_index_.try_emplace(data_.buses[i].id, i);
  for (std::size_t i = 0; i < data_.lines.size(); ++i) line_index_.try_emplace(data_.lines[i].id, i);
  for (std::size_t i = 0; i < data_.generators.size(); ++i)
    generator_index_.try_emplace(data_.generators[i].id, i);
  for (std::size_t i = 0; i < data_.loads.size(); ++i) load_index_.try_emplace(data_.loads[i].id, i);

  const auto nb = data_.buses.size();
  loads_at_.assign(nb, {});
  generators_at_.assign(nb, {});
  lines_at_.assign(nb, {});
  for (std::size_t i = 0; i < data_.loads.size(); ++i) {
    if (auto b = bus_index(data_.loads[i].bus); b != npos_index) loads_at_[b].push_back(i);
  }
  for (std::size_t i = 0; i < data_.generators.size(); ++i) {
    if (auto b = bus_index(data_.generators[i].bus); b != npos_index) generators_at_[b].push_back(i);
  }
  for (std::size_t i = 0; i < data_.lines.size(); ++i) {
    const auto& line = data_.lines[i];
    auto f = bus_index(line.from_bus);
    auto t = bus_index(line.to_bus);
    if (f != npos_index) lines_at_[f].push_back(i);
    if (t != npos_index && t != f) lines_at_[t].push_back(i);
  }
}

std::size_t Network::lookup(const std::map<int, std::size_t>& index, int id) {
  auto it = index.find(id);
  return it == index.end() ? npos_index : it->second;
}

bool Network::contains(const ComponentRef& ref) const {
  switch (ref.kind) {
    case ComponentKind::bus:
      return bus_index(ref.id) != npos_index;
    case ComponentKind::line:
      return line_index(ref.id) != npos_index;
    case ComponentKind::generator:
      return generator_index(ref.id) != npos_index;
    case ComponentKind::load:
      return load_index(ref.id) != npos_index;
  }
  return false;
}

std::size_t Network::component_count() const {
  return data_.buses.size() + data_.lines.size() + data_.generators.size() + data_.loads.size();
}

std::vector<ComponentRef> Network::components() const {
  std::vector<ComponentRef> out;
  out.reserve(component_count());
  for (const auto& b : data_.buses) out.push_back({ComponentKind::bus, b.id});
  for (const auto& l : data_.lines) out.push_back({ComponentKind::line, l.id});
  for (const auto& g : data_.generators) out.push_back({ComponentKind::generator, g.id});
  for (const auto& d : data_.loads) out.push_back({ComponentKind::load, d.id});
  return out;
}

double Network::total_demand_mw() const {
  double total = 0.0;
  for (const auto& d : data_.loads) total += d.demand_mw;
  return total;
}

double Network::total_weighted_demand_mw() const {
  double total = 0.0;
  for (const auto& d : data_.loads) total += d.weight * d.demand_mw;
  return total;
}

namespace {

class ViolationSink {
 public:
  void add(std::string entity, int id, std::string rule, std::string message) {
    out.push_back({std::move(entity), id, std::move(rule), std::move(message)});
  }
  std::vector<Violation> out;
};

std::string label(std::string_view entity, int id) { return std::string(entity) + " " + std::to_string(id); }

template <class T>
void check_duplicates(const std::vector<T>& items, std::string_view entity, ViolationSink& sink) {
  std::set<int> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) {
      sink.add(std::string(entity), item.id, "duplicate_id", "duplicate " + label(entity, item.id));
    }
  }
}

}  // namespace

std::vector<Violation> validate(const Network& network) {
  const auto& data = network.data();
  ViolationSink sink;

  if (!(std::isfinite(data.base_mva) && data.base_mva > 0.0)) {
    sink.add("network", 0, "nonpositive_base_mva", "base_mva must be positive");
  }

  check_duplicates(data.areas, "area", sink);
  check_duplicates(data.buses, "bus", sink);
  check_duplicates(data.lines, "line", sink);
  check_duplicates(data.generators, "gen", sink);
  check_duplicates(data.loads, "load", sink);

  auto bus_exists = [&](int id) { return network.bus_index(id) != npos_index; };

  for (const auto& bus : data.buses) {
    if (network.area_index(bus.area_id) == npos_index) {
      sink.add("bus", bus.id, "dangling_area",
               label("bus", bus.id) + " references undeclared area " + std::to_string(bus.area_id));
    }
    if (bus.coord && !(std::isfinite(bus.coord->latitude_deg) && std::isfinite(bus.coord->longitude_deg))) {
      sink.add("bus", bus.id, "nonfinite_coord", label("bus", bus.id) + " has a non-finite coordinate");
    }
  }

  for (const auto& line : data.lines) {
    const auto name = label("line", line.id);
    for (int end : {line.from_bus, line.to_bus}) {
      if (!bus_exists(end)) {
        sink.add("line", line.id, "dangling_bus", name + " references missing bus " + std::to_string(end));
      }
    }
    if (line.from_bus == line.to_bus) {
      sink.add("line", line.id, "self_loop", name + " connects bus " + std::to_string(line.from_bus) + " to itself");
    }
    if (!(std::isfinite(line.susceptance_pu) && line.susceptance_pu > 0.0)) {
      sink.add("line", line.id, "nonpositive_susceptance", name + " susceptance must be positive");
    }
    if (!(std::isfinite(line.thermal_limit_mw) && line.thermal_limit_mw > 0.0)) {
      sink.add("line", line.id, "nonpositive_thermal_limit", name + " thermal limit must be positive");
    }
    if (!(std::isfinite(line.voltage_kv) && line.voltage_kv > 0.0)) {
      sink.add("line", line.id, "nonpositive_voltage", name + " voltage must be positive");
    }
    if (!(std::isfinite(line.length_km) && line.length_km >= 0.0)) {
      sink.add("line", line.id, "negative_length", name + " length must be nonnegative");
    }
  }

  for (const auto& gen : data.generators) {
    const auto name = label("gen", gen.id);
    if (!bus_exists(gen.bus)) {
      sink.add("gen", gen.id, "dangling_bus", name + " references missing bus " + std::to_string(gen.bus));
    }
    if (!(std::isfinite(gen.p_min_mw) && std::isfinite(gen.p_max_mw) && gen.p_min_mw >= 0.0 &&
          gen.p_min_mw <= gen.p_max_mw)) {
      sink.add("gen", gen.id, "generator_limits", name + " needs 0 <= p_min <= p_max");
    }
  }

  for (const auto& load : data.loads) {
    const auto name = label("load", load.id);
    if (!bus_exists(load.bus)) {
      sink.add("load", load.id, "dangling_bus", name + " references missing bus " + std::to_string(load.bus));
    }
    if (!(std::isfinite(load.demand_mw) && load.demand_mw >= 0.0)) {
      sink.add("load", load.id, "negative_demand", name + " demand must be nonnegative");
    }
    if (!(std::isfinite(load.weight) && load.weight > 0.0)) {
      sink.add("load", load.id, "nonpositive_weight", name + " weight must be positive");
    }
  }
  return std::move(sink.out);
}

EnergizationState EnergizationState::all_on(const Network& network) {
  EnergizationState s;
  for (const auto& b : network.buses()) s.buses[b.id] = true;
  for (const auto& l : network.lines()) s.lines[l.id] = true;
  for (const auto& g : network.generators()) s.generators[g.id] = true;
  for (const auto& d : network.loads()) s.loads[d.id] = 1.0;
  return s;
}

EnergizationState EnergizationState::all_off(const Network& network) {
  EnergizationState s;
  for (const auto& b : network.buses()) s.buses[b.id] = false;
  for (const auto& l : network.lines()) s.lines[l.id] = false;
  for (const auto& g : network.generators()) s.generators[g.id] = false;
  for (const auto& d : network.loads()) s.loads[d.id] = 0.0;
  return s;
}

}  // namespace gridshed
