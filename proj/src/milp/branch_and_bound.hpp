#pragma once

#include <string>

#include "gridshed/milp.hpp"

namespace gridshed::milp::detail {

inline constexpr std::size_t npos_index = static_cast<std::size_t>(-1);

enum class Strategy {
  cold_primal,  // every node re-solved from the row-activity basis
  warm_dual,    // children start from the parent's optimal basis; depth-first plunge
};

MilpSolution solve_relaxation(const MilpProblem& problem, const SolveOptions& options);
MilpSolution branch_and_bound(const MilpProblem& problem, const SolveOptions& options, Strategy strategy,
                              std::string backend_name);

}  // namespace gridshed::milp::detail
