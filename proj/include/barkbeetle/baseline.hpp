// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "barkbeetle/extractor.hpp"
#include "barkbeetle/oracle.hpp"

namespace barkbeetle {

/// Half-open interval [low, high); a missing side is unbounded.
struct Interval {
  std::optional<double> low;
  std::optional<double> high;

  bool contains(double v) const { return (!low || v >= *low) && (!high || v < *high); }
};

/// Input region that maps to one leaf, as seen from outside the tree.
struct LeafConstraintBox {
  std::vector<Interval> intervals;
  LeafLabel label;
  int beta = 0;

  bool contains(std::span<const double> x) const;
  /// Number of bounded interval sides.
  int constraint_count() const;
};

struct BaselineResult {
  std::vector<LeafConstraintBox> boxes;
  QueryLedger ledger;
};

/// Top-down, fault-free extraction: from a random start input, measures the
/// label-preserving interval along every feature, registers the leaf's box,
/// and queues inputs just outside each bound. Leaves are keyed by
/// (label, path node count) and explored in FIFO order.
BaselineResult baseline_extract(Oracle& oracle, const ExtractionConfig& config, std::uint64_t seed);

/// Label of the first box containing x.
std::optional<LeafLabel> predict(const std::vector<LeafConstraintBox>& boxes,
                                 std::span<const double> x);

}  // namespace barkbeetle
