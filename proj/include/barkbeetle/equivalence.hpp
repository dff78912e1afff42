// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "barkbeetle/victim_tree.hpp"

namespace barkbeetle {

struct EquivalenceReport {
  std::size_t samples = 0;
  std::size_t mismatches = 0;
  /// Largest |t_a - t_b| over paired nodes; empty when the two trees do not
  /// align node-for-node (different shape or features).
  std::optional<double> max_threshold_gap;
};

/// Compares predictions on `samples` inputs drawn uniformly from the feature
/// box. Throws ValidationError if the feature specs differ.
EquivalenceReport functionally_equivalent(const VictimTree& a, const VictimTree& b,
                                          std::size_t samples, std::uint64_t seed);

/// Walks both trees in lockstep; empty if the structures diverge.
std::optional<double> aligned_threshold_gap(const VictimTree& a, const VictimTree& b);

/// Number of mismatching points on the full grid {min + k*step} over the
/// feature box. Points between consecutive thresholds of either tree behave
/// identically, so one representative per cell of the combined threshold
/// arrangement is evaluated and weighted by its point count.
std::uint64_t grid_mismatches(const VictimTree& a, const VictimTree& b, double step);

}  // namespace barkbeetle
