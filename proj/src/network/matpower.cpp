#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "gridshed/network.hpp"

namespace gridshed {

namespace {

using Matrix = std::vector<std::vector<double>>;

// Column positions of the standard MATPOWER layout (zero based).
namespace bus_col {
constexpr std::size_t id = 0, pd = 2, area = 6, base_kv = 9;
}
namespace gen_col {
constexpr std::size_t bus = 0, status = 7, pmax = 8, pmin = 9;
}
namespace branch_col {
constexpr std::size_t from = 0, to = 1, x = 3, rate_a = 5, status = 10;
}

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  bool in_string = false;
  for (char c : text) {
    if (c == '\n') {
      in_comment = false;
      in_string = false;
      out.push_back(c);
      continue;
    }
    if (in_comment) continue;
    if (c == '\'') in_string = !in_string;
    if (c == '%' && !in_string) {
      in_comment = true;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

struct Assignment {
  std::string body;
  char bracket = 0;  // '[', '{' or 0 for a scalar
};

// Collects every `mpc.<field> = ...;` assignment of the case file.
std::map<std::string, Assignment> collect_assignments(const std::string& text) {
  std::map<std::string, Assignment> out;
  std::size_t pos = 0;
  while ((pos = text.find("mpc.", pos)) != std::string::npos) {
    std::size_t p = pos + 4;
    std::size_t name_end = p;
    while (name_end < text.size() && (std::isalnum(static_cast<unsigned char>(text[name_end])) || text[name_end] == '_'))
      ++name_end;
    std::string name = text.substr(p, name_end - p);
    std::size_t eq = name_end;
    while (eq < text.size() && std::isspace(static_cast<unsigned char>(text[eq]))) ++eq;
    if (name.empty() || eq >= text.size() || text[eq] != '=') {
      pos = name_end;
      continue;
    }
    std::size_t v = eq + 1;
    while (v < text.size() && std::isspace(static_cast<unsigned char>(text[v]))) ++v;
    Assignment a;
    if (v < text.size() && (text[v] == '[' || text[v] == '{')) {
      const char open = text[v];
      const char close = open == '[' ? ']' : '}';
      auto end = text.find(close, v + 1);
      if (end == std::string::npos) throw ParseError("unterminated matrix mpc." + name);
      a.body = text.substr(v + 1, end - v - 1);
      a.bracket = open;
      pos = end + 1;
    } else {
      auto end = text.find(';', v);
      if (end == std::string::npos) end = text.find('\n', v);
      if (end == std::string::npos) end = text.size();
      a.body = text.substr(v, end - v);
      pos = end;
    }
    out[name] = std::move(a);
  }
  return out;
}

double parse_number(std::string_view token, const std::string& where) {
  if (token == "Inf" || token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-Inf" || token == "-inf") return -std::numeric_limits<double>::infinity();
  if (token == "NaN" || token == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::string s(token);
  char* end = nullptr;
  double value = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ParseError("bad number '" + s + "' in " + where);
  return value;
}

Matrix parse_matrix(const std::string& body, const std::string& name) {
  Matrix rows;
  std::vector<double> row;
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) {
      row.push_back(parse_number(token, "mpc." + name));
      token.clear();
    }
  };
  auto flush_row = [&] {
    flush_token();
    if (!row.empty()) rows.push_back(std::move(row));
    row.clear();
  };
  for (char c : body) {
    if (c == ';' || c == '\n') {
      flush_row();
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      flush_token();
    } else {
      token.push_back(c);
    }
  }
  flush_row();
  return rows;
}

std::vector<std::string> parse_cell_strings(const std::string& body) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = body.find('\'', pos)) != std::string::npos) {
    auto end = body.find('\'', pos + 1);
    if (end == std::string::npos) break;
    out.push_back(body.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

const Matrix& require_matrix(const std::map<std::string, Matrix>& tables, const std::string& name) {
  auto it = tables.find(name);
  if (it == tables.end()) throw ParseError("MATPOWER case is missing matrix mpc." + name);
  return it->second;
}

void require_columns(const Matrix& m, std::size_t columns, const std::string& name) {
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (m[r].size() < columns) {
      throw ParseError("mpc." + name + " row " + std::to_string(r + 1) + " has " + std::to_string(m[r].size()) +
                       " columns, need at least " + std::to_string(columns));
    }
  }
}

int as_id(double v, const std::string& where) {
  if (!std::isfinite(v) || v != std::floor(v)) throw ParseError("non-integer id in " + where);
  return static_cast<int>(v);
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

MatpowerImport parse_matpower_subset(std::string_view text, const MatpowerOptions& options) {
  const auto clean = strip_comments(text);
  const auto assignments = collect_assignments(clean);

  std::vector<std::string> warnings;
  std::map<std::string, Matrix> tables;
  const std::set<std::string> consumed = {"bus", "gen", "branch", "baseMVA", "bus_name", "bus_coord",
                                          "branch_length_km", "version"};
  for (const auto& [name, a] : assignments) {
    if (a.bracket == '[') tables[name] = parse_matrix(a.body, name);
    if (consumed.count(name) == 0) {
      if (name == "dcline") {
        warnings.push_back("HVDC lines (mpc.dcline) are not modeled and were ignored");
      } else {
        warnings.push_back("unsupported field mpc." + name + " ignored");
      }
    }
  }

  NetworkData data;
  if (auto it = assignments.find("baseMVA"); it != assignments.end()) {
    data.base_mva = parse_number(std::string(it->second.body.begin(),
                                             std::find_if(it->second.body.begin(), it->second.body.end(),
                                                          [](char c) { return c == ';' || std::isspace(static_cast<unsigned char>(c)); })),
                                 "mpc.baseMVA");
  } else {
    throw ParseError("MATPOWER case is missing mpc.baseMVA");
  }

  const auto& bus = require_matrix(tables, "bus");
  const auto& gen = require_matrix(tables, "gen");
  const auto& branch = require_matrix(tables, "branch");
  require_columns(bus, bus_col::base_kv + 1, "bus");
  require_columns(gen, gen_col::pmin + 1, "gen");
  require_columns(branch, branch_col::status + 1, "branch");

  std::vector<std::string> names;
  if (auto it = assignments.find("bus_name"); it != assignments.end()) names = parse_cell_strings(it->second.body);
  if (!names.empty() && names.size() != bus.size()) {
    warnings.push_back("mpc.bus_name length does not match mpc.bus; names ignored");
    names.clear();
  }

  std::map<int, GeoCoord> coords;
  if (auto it = tables.find("bus_coord"); it != tables.end()) {
    require_columns(it->second, 3, "bus_coord");
    for (const auto& row : it->second) coords[as_id(row[0], "mpc.bus_coord")] = {row[1], row[2]};
  }

  std::map<int, double> base_kv;
  std::set<int> area_ids;
  for (std::size_t r = 0; r < bus.size(); ++r) {
    const auto& row = bus[r];
    Bus b;
    b.id = as_id(row[bus_col::id], "mpc.bus");
    b.name = names.empty() ? "bus " + std::to_string(b.id) : names[r];
    b.area_id = as_id(row[bus_col::area], "mpc.bus area");
    if (auto c = coords.find(b.id); c != coords.end()) b.coord = c->second;
    area_ids.insert(b.area_id);
    base_kv[b.id] = row[bus_col::base_kv];
    data.buses.push_back(std::move(b));

    const double pd = row[bus_col::pd];
    if (pd > 0.0) {
      data.loads.push_back({static_cast<int>(data.loads.size()) + 1, data.buses.back().id, pd, 1.0});
    } else if (pd < 0.0) {
      warnings.push_back("negative demand at bus " + std::to_string(data.buses.back().id) + " ignored");
    }
  }
  for (int a : area_ids) data.areas.push_back({a, "area " + std::to_string(a)});

  for (std::size_t r = 0; r < gen.size(); ++r) {
    const auto& row = gen[r];
    const int id = static_cast<int>(r) + 1;
    if (row[gen_col::status] <= 0.0) {
      warnings.push_back("out-of-service generator row " + std::to_string(id) + " skipped");
      continue;
    }
    double pmin = row[gen_col::pmin];
    if (pmin < 0.0) {
      warnings.push_back("generator row " + std::to_string(id) + " has negative Pmin " + format_number(pmin) +
                         "; clamped to 0");
      pmin = 0.0;
    }
    data.generators.push_back({id, as_id(row[gen_col::bus], "mpc.gen"), pmin, row[gen_col::pmax]});
  }

  double total_capacity = 0.0;
  for (const auto& g : data.generators) total_capacity += std::max(g.p_max_mw, 0.0);

  std::vector<double> lengths;
  if (auto it = tables.find("branch_length_km"); it != tables.end()) {
    for (const auto& row : it->second) lengths.push_back(row.empty() ? 0.0 : row[0]);
    if (lengths.size() != branch.size()) {
      warnings.push_back("mpc.branch_length_km length does not match mpc.branch; lengths ignored");
      lengths.clear();
    }
  }

  for (std::size_t r = 0; r < branch.size(); ++r) {
    const auto& row = branch[r];
    const int id = static_cast<int>(r) + 1;
    if (row[branch_col::status] <= 0.0) {
      warnings.push_back("out-of-service branch row " + std::to_string(id) + " skipped");
      continue;
    }
    const double x = row[branch_col::x];
    if (x == 0.0) throw ParseError("branch row " + std::to_string(id) + " has zero reactance (infinite susceptance)");
    Line line;
    line.id = id;
    line.from_bus = as_id(row[branch_col::from], "mpc.branch");
    line.to_bus = as_id(row[branch_col::to], "mpc.branch");
    line.susceptance_pu = 1.0 / x;
    line.thermal_limit_mw = row[branch_col::rate_a];
    if (line.thermal_limit_mw <= 0.0) {
      // rateA = 0 means unlimited; no flow can exceed the total generation capacity.
      line.thermal_limit_mw = total_capacity > 0.0 ? total_capacity : 9999.0;
      warnings.push_back("branch row " + std::to_string(id) + " has no rate A; limited to " +
                         format_number(line.thermal_limit_mw) + " MW");
    }
    double kv_from = base_kv.count(line.from_bus) ? base_kv[line.from_bus] : 0.0;
    double kv_to = base_kv.count(line.to_bus) ? base_kv[line.to_bus] : 0.0;
    double kv = std::min(kv_from, kv_to);
    if (kv <= 0.0) kv = std::max(kv_from, kv_to);
    if (kv <= 0.0) {
      kv = options.default_voltage_kv;
      warnings.push_back("branch row " + std::to_string(id) + " has no base kV; using " + format_number(kv) + " kV");
    }
    line.voltage_kv = kv;
    line.length_km = lengths.empty() ? 0.0 : lengths[r];
    data.lines.push_back(line);
  }

  Network network(std::move(data));
  if (auto violations = validate(network); !violations.empty()) throw CaseValidationError(std::move(violations));
  return {std::move(network), std::move(warnings)};
}

}  // namespace gridshed
