#pragma once

#include "nilm/numerics.hpp"

#include <cstddef>
#include <vector>

namespace nilm {

// Exhaustive search is capped at this many appliances (2^25 states).
inline constexpr std::size_t kCoMaxAppliances = 25;

// Total power of a state assignment: dot(states, rated_powers).
double aggregate_power(const Vector& states, const Vector& rated_powers_w);

// Combinatorial optimization disaggregation: the binary state vector s that
// minimizes |p_agg - s . rated_powers| over all 2^N assignments. Ties are
// broken toward fewer ON appliances, then lexicographically smallest states.
Vector co_disaggregate(double p_agg_w, const Vector& rated_powers_w);

// Runs co_disaggregate on the mean power of each window.
std::vector<Vector> co_predict_series(const std::vector<Vector>& windows_w,
                                      const Vector& rated_powers_w);

}  // namespace nilm
