// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "barkbeetle/baseline.hpp"
#include "barkbeetle/equivalence.hpp"
#include "barkbeetle/extractor.hpp"
#include "barkbeetle/simulated_oracle.hpp"
#include "barkbeetle/victim_tree.hpp"

namespace barkbeetle {

enum class Attack { kBarkBeetle, kBaseline };

std::string to_string(Attack attack);
Attack attack_from_string(const std::string& name);

/// Rebuilds a VictimTree (and so re-runs its validation) from a recovery.
VictimTree to_victim_tree(const RecoveredTree& tree, Task task);

struct AttackOptions {
  Attack attack = Attack::kBarkBeetle;
  double epsilon = 1e-3;
  GlitchModel glitch;
  /// Start-input seed for the baseline; also reported.
  std::uint64_t seed = 0;
  /// Unset: round(1 / epsilon). Zero disables snapping.
  std::optional<std::int64_t> snap_denominator;
  std::uint64_t max_queries = 0;
  /// Random inputs for the equivalence check; 0 skips it.
  std::size_t equivalence_samples = 10000;

  std::int64_t effective_snap() const;
};

struct TreeStats {
  int leaves = 0;
  int depth = 0;
  int features = 0;
};

struct RunReport {
  Attack attack = Attack::kBarkBeetle;
  TreeStats tree_stats;
  QueryLedger ledger;
  /// Recovered paths (BarkBeetle) or leaf boxes (baseline).
  int paths = 0;
  /// Recovered internal nodes (BarkBeetle) or bounded box sides (baseline).
  int constraints = 0;
  std::optional<EquivalenceReport> equivalence;
  double wall_time = 0.0;
  std::string config_json;

  /// Keys are sorted; `wall_time` is omitted when include_timing is false.
  std::string to_json(bool include_timing = true) const;
};

struct AttackOutcome {
  RunReport report;
  std::optional<VictimTree> recovered;
  std::vector<LeafConstraintBox> boxes;
};

/// Runs one attack against a fresh SimulatedOracle for `truth`.
AttackOutcome run_attack(const VictimTree& truth, const AttackOptions& options);

/// Mismatch count of baseline boxes against the victim on random inputs.
EquivalenceReport boxes_equivalent(const VictimTree& truth,
                                   const std::vector<LeafConstraintBox>& boxes,
                                   std::size_t samples, std::uint64_t seed);

enum class SweepMode { kDepth, kDuplicates };

struct SweepOptions {
  SweepMode mode = SweepMode::kDepth;
  int from = 1;
  int to = 8;
  int features = 14;
  /// Tree depth for the duplicate sweep.
  int depth = 8;
  double epsilon = 1e-3;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct SweepRow {
  int parameter = 0;
  std::uint64_t total_queries = 0;
  std::uint64_t fault_runs = 0;
};

/// One gen_complete tree and BarkBeetle run per parameter value, all with
/// the same seed. Rows are returned in parameter order.
std::vector<SweepRow> run_sweep(const SweepOptions& options);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace barkbeetle
