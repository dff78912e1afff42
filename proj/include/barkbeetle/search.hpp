// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <cstdint>
#include <optional>

#include "barkbeetle/oracle.hpp"

namespace barkbeetle {

/// One threshold search along a single feature.
///
/// The baseline label is observed on the `flag` side of the threshold:
/// flag 0 means x[feature] < t yields `baseline` (search from the low end),
/// flag 1 means x[feature] >= t yields it (search from the high end). The
/// true threshold always lies in the half-open bracket (low, high].
struct SearchRequest {
  Input x;
  LeafLabel baseline;
  /// When set, a probe shows the baseline only if its path node count
  /// matches too (labels that repeat across leaves).
  std::optional<int> baseline_beta;
  int feature = 0;
  /// When set, every probe is a fault run forcing `flag` at this position.
  std::optional<int> fault_position;
  double low = 0.0;
  double high = 0.0;
  int flag = kLeft;
  double epsilon = 1e-3;
  /// If nonzero, the reported threshold is the multiple of 1/snap_denominator
  /// inside the final bracket when one exists.
  std::int64_t snap_denominator = 0;
};

/// Fault-assisted binary search. Verifies the far end of the bracket first
/// (one extra query) and throws NoThresholdInRangeError if it still shows
/// the baseline label. Returns t with |t - true threshold| < epsilon using at
/// most ceil(log2((high - low) / epsilon)) + 1 oracle calls.
double fault_assisted_search(Oracle& oracle, const SearchRequest& request);

/// The bisection loop alone, without the bracket check.
double bisect_threshold(Oracle& oracle, const SearchRequest& request);

/// Picks the representative of (low, high]: the grid point k/denominator
/// inside it if there is exactly one, otherwise `fallback`.
double snap_to_grid(double low, double high, std::int64_t denominator, double fallback);

}  // namespace barkbeetle
