#include "gridshed/risk.hpp"

#include <cmath>
#include <json.hpp>

#include "json_util.hpp"

namespace gridshed {

double RiskTable::risk(const ComponentRef& ref) const {
  auto it = entries_.find(ref);
  if (it == entries_.end()) throw Error("risk table has no entry for " + to_string(ref));
  return it->second.value;
}

const std::vector<ExposureTerm>& RiskTable::terms(const ComponentRef& ref) const {
  auto it = entries_.find(ref);
  if (it == entries_.end()) throw Error("risk table has no entry for " + to_string(ref));
  return it->second.terms;
}

std::vector<ComponentRisk> RiskTable::entries() const {
  std::vector<ComponentRisk> out;
  out.reserve(entries_.size());
  for (const auto& [ref, entry] : entries_) out.push_back({ref, entry.value});
  return out;
}

double default_line_kappa(double voltage_kv) { return voltage_kv >= 230.0 ? 1.0 : 2.0; }

Exposure line_exposure(const Line& line, const std::vector<std::pair<int, double>>& area_lengths,
                       double km_per_segment) {
  if (!(km_per_segment > 0.0)) throw ValidationError("km_per_segment must be positive");
  double total = 0.0;
  for (const auto& [area, km] : area_lengths) {
    if (!(km >= 0.0)) throw ValidationError("line " + std::to_string(line.id) + " has a negative segment length");
    total += km;
  }
  if (std::abs(total - line.length_km) > 1e-6) {
    throw ValidationError("line " + std::to_string(line.id) + " geography covers " + std::to_string(total) +
                          " km but the line is " + std::to_string(line.length_km) + " km long");
  }
  Exposure exposure{{ComponentKind::line, line.id}, {}};
  const double kappa = default_line_kappa(line.voltage_kv);
  for (const auto& [area, km] : area_lengths) {
    if (km == 0.0) continue;
    exposure.terms.push_back({area, kappa, km / km_per_segment});
  }
  return exposure;
}

ComponentRisk component_risk(const Exposure& exposure, const std::map<int, double>& area_rho) {
  double value = 0.0;
  for (const auto& term : exposure.terms) {
    auto it = area_rho.find(term.area_id);
    if (it == area_rho.end()) {
      throw ValidationError(to_string(exposure.component) + " lies in area " + std::to_string(term.area_id) +
                            " which has no risk value");
    }
    value += term.kappa * term.weight * it->second;
  }
  return {exposure.component, value};
}

ComponentRisk component_risk(const Exposure& exposure, const std::vector<AreaRisk>& area_risks) {
  std::map<int, double> rho;
  for (const auto& a : area_risks) rho[a.area_id] = a.rho;
  return component_risk(exposure, rho);
}

namespace {

int point_bus(const Network& network, const ComponentRef& ref) {
  switch (ref.kind) {
    case ComponentKind::bus:
      return ref.id;
    case ComponentKind::generator:
      return network.generators()[network.generator_index(ref.id)].bus;
    case ComponentKind::load:
      return network.loads()[network.load_index(ref.id)].bus;
    case ComponentKind::line:
      break;
  }
  return 0;
}

Exposure default_exposure(const Network& network, const ComponentRef& ref,
                          double km_per_segment = default_km_per_segment) {
  if (ref.kind != ComponentKind::line) {
    const auto& bus = network.buses()[network.bus_index(point_bus(network, ref))];
    return {ref, {{bus.area_id, 1.0, 1.0}}};
  }
  const auto& line = network.lines()[network.line_index(ref.id)];
  const int from_area = network.buses()[network.bus_index(line.from_bus)].area_id;
  const int to_area = network.buses()[network.bus_index(line.to_bus)].area_id;
  std::vector<std::pair<int, double>> split;
  if (from_area == to_area) {
    split.emplace_back(from_area, line.length_km);
  } else {
    split.emplace_back(from_area, line.length_km / 2.0);
    split.emplace_back(to_area, line.length_km - line.length_km / 2.0);
  }
  return line_exposure(line, split, km_per_segment);
}

void check_exposure(const Exposure& e) {
  for (const auto& t : e.terms) {
    if (!(t.kappa >= 0.0) || !std::isfinite(t.kappa)) {
      throw ValidationError(to_string(e.component) + " has a negative ignition factor");
    }
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) {
      throw ValidationError(to_string(e.component) + " has a negative exposure weight");
    }
  }
  if (e.component.kind != ComponentKind::line && (e.terms.size() != 1 || e.terms.front().weight != 1.0)) {
    throw ValidationError(to_string(e.component) + " is a point component and needs exactly one term of weight 1");
  }
}

}  // namespace

RiskTable build_risk_table(const Network& network, const std::vector<AreaRisk>& area_risks,
                           const std::vector<Exposure>& exposures, bool use_defaults) {
  RiskTable table;
  for (const auto& a : area_risks) {
    if (!(a.rho >= 0.0) || !std::isfinite(a.rho)) {
      throw ValidationError("area " + std::to_string(a.area_id) + " has a negative risk value");
    }
    table.area_rho_[a.area_id] = a.rho;
  }

  std::map<ComponentRef, const Exposure*> given;
  for (const auto& e : exposures) {
    if (!network.contains(e.component)) {
      throw ValidationError("exposure given for unknown component " + to_string(e.component));
    }
    given[e.component] = &e;
  }

  for (const auto& ref : network.components()) {
    Exposure exposure;
    if (auto it = given.find(ref); it != given.end()) {
      exposure = *it->second;
    } else if (use_defaults) {
      exposure = default_exposure(network, ref);
    } else {
      throw ValidationError("no risk exposure for " + to_string(ref));
    }
    check_exposure(exposure);
    auto risk = component_risk(exposure, table.area_rho_);
    table.entries_[ref] = {risk.value, std::move(exposure.terms)};
  }
  return table;
}

RiskBreakdown risk_breakdown(const Network& network, const RiskTable& table, const EnergizationState& state) {
  auto on = [](const std::map<int, bool>& m, int id, std::string_view kind) {
    auto it = m.find(id);
    if (it == m.end()) throw Error("energization state has no entry for " + std::string(kind) + " " + std::to_string(id));
    return it->second;
  };
  RiskBreakdown out;
  for (const auto& d : network.loads()) {
    auto it = state.loads.find(d.id);
    if (it == state.loads.end()) throw Error("energization state has no entry for load " + std::to_string(d.id));
    const double x = it->second;
    if (!(x >= 0.0 && x <= 1.0)) {
      throw Error("served fraction of load " + std::to_string(d.id) + " is outside [0, 1]");
    }
    out.load += x * table.load(d.id);
  }
  for (const auto& g : network.generators()) {
    if (on(state.generators, g.id, "gen")) out.generator += table.generator(g.id);
  }
  for (const auto& l : network.lines()) {
    if (on(state.lines, l.id, "line")) out.line += table.line(l.id);
  }
  for (const auto& b : network.buses()) {
    if (on(state.buses, b.id, "bus")) out.bus += table.bus(b.id);
  }
  return out;
}

double total_system_risk(const Network& network, const RiskTable& table, const EnergizationState& state) {
  return risk_breakdown(network, table, state).total();
}

double area_risk_total(const RiskTable& table, const Network& network, int area_id) {
  const auto rho = table.area_rho().find(area_id);
  if (network.area_index(area_id) == npos_index && rho == table.area_rho().end()) {
    throw ValidationError("unknown area " + std::to_string(area_id));
  }
  if (rho == table.area_rho().end()) return 0.0;
  double total = 0.0;
  for (const auto& ref : network.components()) {
    for (const auto& term : table.terms(ref)) {
      if (term.area_id == area_id) total += term.kappa * term.weight * rho->second;
    }
  }
  return total;
}

std::vector<Exposure> assemble_exposures(const Network& network, const RiskInput& input) {
  std::map<ComponentRef, Exposure> out;
  for (const auto& [line_id, segments] : input.line_geography) {
    const auto idx = network.line_index(line_id);
    if (idx == npos_index) throw ValidationError("line geography names unknown line " + std::to_string(line_id));
    out[{ComponentKind::line, line_id}] = line_exposure(network.lines()[idx], segments, input.km_per_segment);
  }
  for (const auto& ov : input.kappa_overrides) {
    if (!network.contains(ov.component)) {
      throw ValidationError("kappa override names unknown component " + to_string(ov.component));
    }
    if (!(ov.kappa >= 0.0)) throw ValidationError("kappa override for " + to_string(ov.component) + " is negative");
    if (ov.component.kind != ComponentKind::line) {
      out[ov.component] = Exposure{ov.component, {{ov.area_id, ov.kappa, 1.0}}};
      continue;
    }
    auto it = out.find(ov.component);
    if (it == out.end()) {
      if (!input.use_defaults) {
        throw ValidationError("kappa override for " + to_string(ov.component) + " needs line geography");
      }
      it = out.emplace(ov.component, default_exposure(network, ov.component, input.km_per_segment)).first;
    }
    bool matched = false;
    for (auto& term : it->second.terms) {
      if (term.area_id == ov.area_id) {
        term.kappa = ov.kappa;
        matched = true;
      }
    }
    if (!matched) {
      throw ValidationError("kappa override for " + to_string(ov.component) + " names area " +
                            std::to_string(ov.area_id) + " which the line does not cross");
    }
  }
  if (input.use_defaults) {
    for (const auto& line : network.lines()) {
      const ComponentRef ref{ComponentKind::line, line.id};
      if (!out.count(ref)) out.emplace(ref, default_exposure(network, ref, input.km_per_segment));
    }
  }
  std::vector<Exposure> result;
  result.reserve(out.size());
  for (auto& [ref, e] : out) result.push_back(std::move(e));
  return result;
}

RiskTable build_risk_table(const Network& network, const RiskInput& input) {
  return build_risk_table(network, input.area_risks, assemble_exposures(network, input), input.use_defaults);
}

RiskInput parse_risk_document(std::string_view text) {
  using nlohmann::json;
  using detail::get_field;
  using detail::get_optional_field;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed risk document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("risk document must be a JSON object");
  const auto version = get_field<int>(doc, "format_version", "risk");
  if (version != 1) throw ParseError("unsupported risk format_version " + std::to_string(version));

  RiskInput input;
  input.km_per_segment = get_optional_field<double>(doc, "km_per_segment", "risk").value_or(default_km_per_segment);
  input.use_defaults = get_optional_field<bool>(doc, "use_defaults", "risk").value_or(true);

  auto array = [&](const char* key) -> const json& {
    static const json empty = json::array();
    auto it = doc.find(key);
    if (it == doc.end()) return empty;
    if (!it->is_array()) throw ParseError(std::string("section '") + key + "' must be an array");
    return *it;
  };

  const auto& areas = array("area_risks");
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const auto where = "area_risks[" + std::to_string(i) + "]";
    input.area_risks.push_back({get_field<int>(areas[i], "area_id", where), get_field<double>(areas[i], "rho", where)});
  }
  const auto& overrides = array("kappa_overrides");
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    const auto where = "kappa_overrides[" + std::to_string(i) + "]";
    const auto kind_text = get_field<std::string>(overrides[i], "kind", where);
    auto kind = parse_component_kind(kind_text);
    if (!kind) throw ParseError(where + ".kind '" + kind_text + "' is not a component kind");
    input.kappa_overrides.push_back({{*kind, get_field<int>(overrides[i], "id", where)},
                                     get_field<int>(overrides[i], "area_id", where),
                                     get_field<double>(overrides[i], "kappa", where)});
  }
  const auto& geography = array("line_geography");
  for (std::size_t i = 0; i < geography.size(); ++i) {
    const auto where = "line_geography[" + std::to_string(i) + "]";
    const int line_id = get_field<int>(geography[i], "line_id", where);
    auto segments = geography[i].find("segments");
    if (segments == geography[i].end() || !segments->is_array()) throw ParseError(where + ".segments must be an array");
    auto& out = input.line_geography[line_id];
    for (std::size_t k = 0; k < segments->size(); ++k) {
      const auto w = where + ".segments[" + std::to_string(k) + "]";
      out.emplace_back(get_field<int>((*segments)[k], "area_id", w), get_field<double>((*segments)[k], "km", w));
    }
  }
  return input;
}

std::string serialize_risk_document(const RiskInput& input) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["km_per_segment"] = input.km_per_segment;
  doc["use_defaults"] = input.use_defaults;
  auto& areas = doc["area_risks"] = nlohmann::ordered_json::array();
  for (const auto& a : input.area_risks) areas.push_back({{"area_id", a.area_id}, {"rho", a.rho}});
  auto& overrides = doc["kappa_overrides"] = nlohmann::ordered_json::array();
  for (const auto& o : input.kappa_overrides) {
    overrides.push_back({{"kind", std::string(to_string(o.component.kind))},
                         {"id", o.component.id},
                         {"area_id", o.area_id},
                         {"kappa", o.kappa}});
  }
  auto& geography = doc["line_geography"] = nlohmann::ordered_json::array();
  for (const auto& [line_id, segments] : input.line_geography) {
    nlohmann::ordered_json segs = nlohmann::ordered_json::array();
    for (const auto& [area, km] : segments) segs.push_back({{"area_id", area}, {"km", km}});
    geography.push_back({{"line_id", line_id}, {"segments", std::move(segs)}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace gridshed
