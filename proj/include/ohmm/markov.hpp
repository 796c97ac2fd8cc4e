#pragma once

#include <span>
#include <vector>

#include "ohmm/matrix.hpp"

namespace ohmm {

struct StationaryResult {
  std::vector<double> pi;
  bool unique = true;  ///< false for chains with several closed classes
};

/// Solves pi Q = pi, sum(pi) = 1 by replacing one balance equation with the
/// normalization constraint. When that system is singular the chain has no
/// unique stationary law and the minimum-norm solution of the full stacked
/// system is returned with unique = false.
StationaryResult stationary_distribution(const TransitionMatrix& q);

/// Allocation-free variant for the streaming hot path; `out` has size m.
/// Returns the uniqueness flag.
bool stationary_distribution_into(const TransitionMatrix& q, std::span<double> out);

}  // namespace ohmm
