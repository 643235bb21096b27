#include <json.hpp>

#include "gridshed/network.hpp"
#include "json_util.hpp"

namespace gridshed {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using detail::get_field;
using detail::get_optional_field;

Area read_area(const json& j, const std::string& where) {
  return {get_field<int>(j, "id", where), get_optional_field<std::string>(j, "name", where).value_or("")};
}

Bus read_bus(const json& j, const std::string& where) {
  Bus bus;
  bus.id = get_field<int>(j, "id", where);
  bus.name = get_optional_field<std::string>(j, "name", where).value_or("");
  bus.area_id = get_field<int>(j, "area_id", where);
  if (auto it = j.find("coord"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
      throw ParseError(where + ".coord must be [latitude, longitude]");
    }
    bus.coord = GeoCoord{(*it)[0].get<double>(), (*it)[1].get<double>()};
  }
  return bus;
}

Line read_line(const json& j, const std::string& where) {
  Line line;
  line.id = get_field<int>(j, "id", where);
  line.from_bus = get_field<int>(j, "from_bus", where);
  line.to_bus = get_field<int>(j, "to_bus", where);
  line.susceptance_pu = get_field<double>(j, "susceptance_pu", where);
  line.thermal_limit_mw = get_field<double>(j, "thermal_limit_mw", where);
  line.voltage_kv = get_field<double>(j, "voltage_kv", where);
  line.length_km = get_optional_field<double>(j, "length_km", where).value_or(0.0);
  return line;
}

Generator read_generator(const json& j, const std::string& where) {
  return {get_field<int>(j, "id", where), get_field<int>(j, "bus", where), get_field<double>(j, "p_min_mw", where),
          get_field<double>(j, "p_max_mw", where)};
}

Load read_load(const json& j, const std::string& where) {
  return {get_field<int>(j, "id", where), get_field<int>(j, "bus", where), get_field<double>(j, "demand_mw", where),
          get_optional_field<double>(j, "weight", where).value_or(1.0)};
}

template <class T, class Reader>
std::vector<T> read_section(const json& doc, const char* key, Reader reader) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ParseError(std::string("case document is missing section '") + key + "'");
  if (!it->is_array()) throw ParseError(std::string("section '") + key + "' must be an array");
  std::vector<T> out;
  out.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& item = (*it)[i];
    const auto where = std::string(key) + "[" + std::to_string(i) + "]";
    if (!item.is_object()) throw ParseError(where + " must be an object");
    out.push_back(reader(item, where));
  }
  return out;
}

}  // namespace

namespace {

std::string first_violation(const std::vector<Violation>& violations) {
  if (violations.empty()) return "case is invalid";
  std::string message = violations.front().message;
  if (violations.size() > 1) message += " (and " + std::to_string(violations.size() - 1) + " more)";
  return message;
}

}  // namespace

CaseValidationError::CaseValidationError(std::vector<Violation> violations)
    : ValidationError(first_violation(violations)), violations_(std::move(violations)) {}

Network parse_case(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed case document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("case document must be a JSON object");
  const auto version = get_field<int>(doc, "format_version", "case");
  if (version != 1) throw ParseError("unsupported case format_version " + std::to_string(version));

  NetworkData data;
  data.name = get_optional_field<std::string>(doc, "name", "case").value_or("");
  data.base_mva = get_field<double>(doc, "base_mva", "case");
  data.areas = read_section<Area>(doc, "areas", read_area);
  data.buses = read_section<Bus>(doc, "buses", read_bus);
  data.lines = read_section<Line>(doc, "lines", read_line);
  data.generators = read_section<Generator>(doc, "generators", read_generator);
  data.loads = read_section<Load>(doc, "loads", read_load);

  Network network(std::move(data));
  if (auto violations = validate(network); !violations.empty()) throw CaseValidationError(std::move(violations));
  return network;
}

std::string serialize_case(const Network& network) {
  const auto& data = network.data();
  ordered_json doc;
  doc["format_version"] = 1;
  doc["name"] = data.name;
  doc["base_mva"] = data.base_mva;

  auto& areas = doc["areas"] = ordered_json::array();
  for (const auto& a : data.areas) areas.push_back({{"id", a.id}, {"name", a.name}});

  auto& buses = doc["buses"] = ordered_json::array();
  for (const auto& b : data.buses) {
    ordered_json j = {{"id", b.id}, {"name", b.name}, {"area_id", b.area_id}};
    if (b.coord) j["coord"] = {b.coord->latitude_deg, b.coord->longitude_deg};
    buses.push_back(std::move(j));
  }

  auto& lines = doc["lines"] = ordered_json::array();
  for (const auto& l : data.lines) {
    lines.push_back({{"id", l.id},
                     {"from_bus", l.from_bus},
                     {"to_bus", l.to_bus},
                     {"susceptance_pu", l.susceptance_pu},
                     {"thermal_limit_mw", l.thermal_limit_mw},
                     {"voltage_kv", l.voltage_kv},
                     {"length_km", l.length_km}});
  }

  auto& gens = doc["generators"] = ordered_json::array();
  for (const auto& g : data.generators) {
    gens.push_back({{"id", g.id}, {"bus", g.bus}, {"p_min_mw", g.p_min_mw}, {"p_max_mw", g.p_max_mw}});
  }

  auto& loads = doc["loads"] = ordered_json::array();
  for (const auto& d : data.loads) {
    loads.push_back({{"id", d.id}, {"bus", d.bus}, {"demand_mw", d.demand_mw}, {"weight", d.weight}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace gridshed
