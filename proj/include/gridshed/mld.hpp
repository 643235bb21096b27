#pragma once

#include <set>
#include <string>

#include "gridshed/ops.hpp"

namespace gridshed {

using ForcedOffSet = std::set<ComponentRef>;

enum class HeuristicKind { area, transmission };
std::string to_string(HeuristicKind kind);
HeuristicKind parse_heuristic_kind(std::string_view text);

/// Every component located in an area whose total risk is at least `threshold`.
/// Lines enter when any of their exposure terms lies in a triggered area.
ForcedOffSet area_heuristic(const Network& network, const RiskTable& risk, double threshold);

/// Lines with risk at least `threshold`. Never buses, generators or loads.
ForcedOffSet transmission_heuristic(const Network& network, const RiskTable& risk, double threshold);

/// Maximum weighted load delivery with every member of `forced_off` de-energized.
/// Risk does not enter the objective; r_fire is reported for the resulting plan.
ShutoffPlan solve_mld(const Network& network, const RiskTable& risk, const ForcedOffSet& forced_off,
                      const SolverSettings& solver = {});

/// Switches off every energized island that serves no load, repeating until nothing changes.
ShutoffPlan prune_dead_islands(const Network& network, const RiskTable& risk, ShutoffPlan plan);

/// Heuristic forced-off set, then solve_mld, then prune_dead_islands.
ShutoffPlan run_heuristic_pipeline(const Network& network, const RiskTable& risk, HeuristicKind kind,
                                   double threshold, const SolverSettings& solver = {});

}  // namespace gridshed
