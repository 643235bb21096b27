#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridshed/component.hpp"

namespace gridshed {

struct GeoCoord {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;

  bool operator==(const GeoCoord&) const = default;
};

struct Area {
  int id = 0;
  std::string name;

  bool operator==(const Area&) const = default;
};

struct Bus {
  int id = 0;
  std::string name;
  std::optional<GeoCoord> coord;
  int area_id = 0;

  bool operator==(const Bus&) const = default;
};

/// DC branch. Flow from `from_bus` to `to_bus` is susceptance_pu * (theta_from - theta_to) * base_mva.
struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double susceptance_pu = 0.0;  // 1 / x, positive magnitude
  double thermal_limit_mw = 0.0;
  double voltage_kv = 0.0;
  double length_km = 0.0;

  bool operator==(const Line&) const = default;
};

struct Generator {
  int id = 0;
  int bus = 0;
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;

  bool operator==(const Generator&) const = default;
};

struct Load {
  int id = 0;
  int bus = 0;
  double demand_mw = 0.0;
  double weight = 1.0;

  bool operator==(const Load&) const = default;
};

/// Raw grid description before indexing.
struct NetworkData {
  std::string name;
  double base_mva = 100.0;
  std::vector<Area> areas;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Load> loads;

  bool operator==(const NetworkData&) const = default;
};

/// One broken invariant. `entity` is "bus", "line", "gen", "load", "area" or "network".
struct Violation {
  std::string entity;
  int id = 0;
  std::string rule;
  std::string message;
};

inline constexpr std::size_t npos_index = static_cast<std::size_t>(-1);

/// Immutable, indexed grid. Construction never throws on rule violations;
/// use validate() (parse_case does) to reject bad data. Unresolvable
/// references are left out of the incidence sets.
class Network {
 public:
  Network() = default;
  explicit Network(NetworkData data);

  const NetworkData& data() const { return data_; }
  const std::string& name() const { return data_.name; }
  double base_mva() const { return data_.base_mva; }

  std::span<const Area> areas() const { return data_.areas; }
  std::span<const Bus> buses() const { return data_.buses; }
  std::span<const Line> lines() const { return data_.lines; }
  std::span<const Generator> generators() const { return data_.generators; }
  std::span<const Load> loads() const { return data_.loads; }

  std::size_t bus_index(int id) const { return lookup(bus_index_, id); }
  std::size_t line_index(int id) const { return lookup(line_index_, id); }
  std::size_t generator_index(int id) const { return lookup(generator_index_, id); }
  std::size_t load_index(int id) const { return lookup(load_index_, id); }
  std::size_t area_index(int id) const { return lookup(area_index_, id); }
  bool contains(const ComponentRef& ref) const;

  /// Incidence sets by bus position: indices into loads(), generators(), lines().
  std::span<const std::size_t> loads_at(std::size_t bus) const { return loads_at_[bus]; }
  std::span<const std::size_t> generators_at(std::size_t bus) const { return generators_at_[bus]; }
  std::span<const std::size_t> lines_at(std::size_t bus) const { return lines_at_[bus]; }

  std::size_t component_count() const;
  /// Every component, ordered buses, lines, generators, loads.
  std::vector<ComponentRef> components() const;
  double total_demand_mw() const;
  double total_weighted_demand_mw() const;

  bool operator==(const Network& other) const { return data_ == other.data_; }

 private:
  static std::size_t lookup(const std::map<int, std::size_t>& index, int id);

  NetworkData data_;
  std::map<int, std::size_t> bus_index_, line_index_, generator_index_, load_index_, area_index_;
  std::vector<std::vector<std::size_t>> loads_at_, generators_at_, lines_at_;
};

/// Every broken type invariant, in a fixed order. Empty iff the network is valid.
std::vector<Violation> validate(const Network& network);

/// Rule violations found while loading a case; what() names the first one.
class CaseValidationError : public ValidationError {
 public:
  explicit CaseValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Parses the canonical JSON case document (format_version 1) and validates it.
/// Throws ParseError on malformed text and CaseValidationError listing every violation.
Network parse_case(std::string_view text);

/// Canonical JSON text with stable field order; parse_case(serialize_case(n)) == n.
std::string serialize_case(const Network& network);

struct MatpowerOptions {
  /// Used for lines whose buses carry no base kV.
  double default_voltage_kv = 230.0;
};

struct MatpowerImport {
  Network network;
  std::vector<std::string> warnings;
};

/// Reads the bus/gen/branch matrices of a MATPOWER case. Optional extension
/// tables `mpc.bus_coord = [bus lat lon]` and `mpc.branch_length_km = [km]`
/// supply geography. Everything else is ignored and reported in `warnings`.
MatpowerImport parse_matpower_subset(std::string_view text, const MatpowerOptions& options = {});

/// Per-component energization. Loads carry the served fraction x_d in [0, 1].
struct EnergizationState {
  std::map<int, bool> buses;
  std::map<int, bool> lines;
  std::map<int, bool> generators;
  std::map<int, double> loads;

  static EnergizationState all_on(const Network& network);
  static EnergizationState all_off(const Network& network);
};

/// Connected component of the energized network. Ids are sorted ascending.
struct Island {
  std::vector<int> buses;
  std::vector<int> lines;
  std::vector<int> generators;
  std::vector<int> loads;  // loads with served fraction > 0
};

/// Partitions the energized buses into islands joined by energized lines.
/// A line joins two buses only when it and both endpoints are energized.
/// Islands are ordered by their smallest bus id. Throws Error when `state`
/// misses a component.
std::vector<Island> energized_islands(const Network& network, const EnergizationState& state);

}  // namespace gridshed
