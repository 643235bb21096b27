#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridshed/component.hpp"
#include "gridshed/network.hpp"

namespace gridshed {

/// Wildfire risk value of one map area (the relative scale 0, 1, 2, 4 in practice).
struct AreaRisk {
  int area_id = 0;
  double rho = 0.0;
};

/// One (area, ignition factor, weight) contribution to a component's risk.
struct ExposureTerm {
  int area_id = 0;
  double kappa = 1.0;
  double weight = 1.0;  // segment count for lines, 1 for point components

  bool operator==(const ExposureTerm&) const = default;
};

struct Exposure {
  ComponentRef component;
  std::vector<ExposureTerm> terms;
};

struct ComponentRisk {
  ComponentRef component;
  double value = 0.0;
};

/// Risk of every component of a network plus the per-area split used by
/// area totals. Immutable once built.
class RiskTable {
 public:
  RiskTable() = default;

  double risk(const ComponentRef& ref) const;
  bool contains(const ComponentRef& ref) const { return entries_.count(ref) != 0; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<ExposureTerm>& terms(const ComponentRef& ref) const;
  std::vector<ComponentRisk> entries() const;

  double bus(int id) const { return risk({ComponentKind::bus, id}); }
  double line(int id) const { return risk({ComponentKind::line, id}); }
  double generator(int id) const { return risk({ComponentKind::generator, id}); }
  double load(int id) const { return risk({ComponentKind::load, id}); }

  const std::map<int, double>& area_rho() const { return area_rho_; }

 private:
  friend RiskTable build_risk_table(const Network&, const std::vector<AreaRisk>&, const std::vector<Exposure>&, bool);

  struct Entry {
    double value = 0.0;
    std::vector<ExposureTerm> terms;
  };
  std::map<ComponentRef, Entry> entries_;
  std::map<int, double> area_rho_;
};

/// Default ignition factor of a line by voltage class: 1 at 230 kV and above, 2 below.
double default_line_kappa(double voltage_kv);

inline constexpr double default_km_per_segment = 10.0;

/// Splits a line's length over the areas it crosses; weight = km / km_per_segment
/// (fractional segments allowed). Throws ValidationError when the lengths do not
/// add up to the line length.
Exposure line_exposure(const Line& line, const std::vector<std::pair<int, double>>& area_lengths,
                       double km_per_segment = default_km_per_segment);

/// R_e = sum over terms of kappa * weight * rho. Throws ValidationError on unknown areas.
ComponentRisk component_risk(const Exposure& exposure, const std::map<int, double>& area_rho);
ComponentRisk component_risk(const Exposure& exposure, const std::vector<AreaRisk>& area_risks);

/// Builds the risk of every component. Components without an explicit exposure get
/// the default rule when `use_defaults` is set: point components take their bus's
/// area with kappa 1; lines split their length evenly between the endpoint areas
/// with the voltage-class kappa. Throws ValidationError when a component stays uncovered.
RiskTable build_risk_table(const Network& network, const std::vector<AreaRisk>& area_risks,
                           const std::vector<Exposure>& exposures, bool use_defaults = true);

/// R_Fire split by component kind. total() adds the parts in a fixed order and
/// is what total_system_risk returns, so the parts sum to it exactly.
struct RiskBreakdown {
  double bus = 0.0;
  double line = 0.0;
  double generator = 0.0;
  double load = 0.0;
  double total() const { return load + generator + line + bus; }
};
RiskBreakdown risk_breakdown(const Network& network, const RiskTable& table, const EnergizationState& state);

/// R_Fire for an energization state, loads weighted by their served fraction.
double total_system_risk(const Network& network, const RiskTable& table, const EnergizationState& state);

/// Sum of component risk attributed to an area; lines contribute the terms lying in it.
double area_risk_total(const RiskTable& table, const Network& network, int area_id);

/// Override of one exposure term's kappa.
struct KappaOverride {
  ComponentRef component;
  int area_id = 0;
  double kappa = 1.0;
};

/// Parsed risk input document (area risks, kappa overrides, line geography).
struct RiskInput {
  std::vector<AreaRisk> area_risks;
  std::vector<KappaOverride> kappa_overrides;
  std::map<int, std::vector<std::pair<int, double>>> line_geography;  // line id -> (area, km)
  double km_per_segment = default_km_per_segment;
  bool use_defaults = true;
};

RiskInput parse_risk_document(std::string_view text);
std::string serialize_risk_document(const RiskInput& input);

/// Exposures for every component, applying line geography, defaults and overrides.
std::vector<Exposure> assemble_exposures(const Network& network, const RiskInput& input);

/// Merges a risk document with its case: assemble_exposures + build_risk_table.
RiskTable build_risk_table(const Network& network, const RiskInput& input);

}  // namespace gridshed
