// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "barkbeetle/victim_tree.hpp"

namespace barkbeetle {

struct GenSpec {
  int depth = 5;
  int n_features = 5;
  /// Nodes per root-to-leaf path that reuse a feature already on the path.
  int duplicates_per_path = 0;
  Task task = Task::kRegression;
  /// Minimum distance between a threshold and the bounds of its cell.
  double min_threshold_gap = 0.005;
  std::uint64_t seed = 0;
  /// Thresholds are multiples of 1 / threshold_denominator.
  std::int64_t threshold_denominator = 1000;
  double range_min = 0.0;
  double range_max = 10.0;

  void validate() const;
  static GenSpec from_json(std::string_view document);
  std::string to_json() const;
};

/// Complete binary tree of spec.depth in which every path carries exactly
/// spec.duplicates_per_path reused features. Reused features get strictly
/// nested thresholds.
VictimTree gen_complete(const GenSpec& spec);

/// Random tree with exactly `leaves` leaves. A spine of length
/// min(depth_max, leaves - 1) fixes the depth; remaining leaves come from
/// random splits. Uses spec.n_features, task, gap, seed, denominator, and
/// range; spec.depth and duplicates_per_path are ignored.
VictimTree gen_random(int leaves, int depth_max, const GenSpec& spec);

}  // namespace barkbeetle
