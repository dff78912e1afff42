// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <cstdint>
#include <span>

#include "barkbeetle/types.hpp"

namespace barkbeetle {

/// Target of one injected fault: the comparison at `node_index` along the
/// current traversal (0 = root) is forced to `force_direction`.
struct FaultSpec {
  int node_index = 0;
  int force_direction = kLeft;
};

/// What one run reveals: the leaf label and, through the side channel, the
/// number of internal nodes evaluated.
struct Observation {
  LeafLabel label;
  int beta = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct QueryLedger {
  std::uint64_t normal_queries = 0;
  /// Successfully faulted inferences.
  std::uint64_t fault_runs = 0;
  /// Every glitch trial, including failed ones.
  std::uint64_t glitch_attempts = 0;
  std::uint64_t side_channel_probes = 0;

  /// Inferences the attacker requested: normal queries plus fault runs.
  /// Side-channel probes observe a run and are reported separately.
  std::uint64_t total_queries() const { return normal_queries + fault_runs; }

  friend bool operator==(const QueryLedger&, const QueryLedger&) = default;
};

/// The attacker-facing black box. Exposes labels, faulted labels, and the
/// node count of a traversal; never features, thresholds, or directions.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual LeafLabel infer(std::span<const double> x) = 0;
  virtual LeafLabel fault_infer(std::span<const double> x, FaultSpec fault) = 0;
  /// A fault run observed through the side channel as well: counts as one
  /// fault run and one side-channel probe.
  virtual Observation fault_observe(std::span<const double> x, FaultSpec fault) = 0;
  /// Number of internal nodes evaluated for x (the timing side channel).
  virtual int probe_path(std::span<const double> x) = 0;
  virtual QueryLedger ledger() const = 0;
};

}  // namespace barkbeetle
