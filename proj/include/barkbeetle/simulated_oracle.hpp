// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "barkbeetle/oracle.hpp"
#include "barkbeetle/victim_tree.hpp"

namespace barkbeetle {

/// Reliability of a single glitch. In deterministic mode every attempt lands.
struct GlitchModel {
  enum class Mode { kDeterministic, kProbabilistic };

  Mode mode = Mode::kDeterministic;
  double success_prob = 1.0;
  int max_attempts = 64;
  std::uint64_t seed = 0;

  static GlitchModel deterministic() { return {}; }
  static GlitchModel probabilistic(double p, std::uint64_t seed, int max_attempts = 64);

  /// {"mode":"deterministic"|"probabilistic","success_prob":p,"max_attempts":n,"seed":s}
  static GlitchModel from_json(std::string_view document);
  std::string to_json() const;

  void validate() const;
};

/// Victim device simulator. Single-threaded: owns mutable counters and an RNG.
class SimulatedOracle final : public Oracle {
 public:
  explicit SimulatedOracle(VictimTree tree, GlitchModel glitch = GlitchModel::deterministic());

  LeafLabel infer(std::span<const double> x) override;
  /// Retries failed glitches transparently (each failed attempt executes an
  /// un-faulted inference that is discarded) and throws
  /// GlitchExhaustedError after max_attempts. Throws FaultOutOfRangeError,
  /// without consuming an attempt, if the traversal has no node at
  /// fault.node_index.
  LeafLabel fault_infer(std::span<const double> x, FaultSpec fault) override;
  Observation fault_observe(std::span<const double> x, FaultSpec fault) override;
  int probe_path(std::span<const double> x) override;
  QueryLedger ledger() const override { return ledger_; }

  const VictimTree& tree() const { return tree_; }
  const GlitchModel& glitch_model() const { return glitch_; }

 private:
  TracedPath glitch(std::span<const double> x, FaultSpec fault);

  VictimTree tree_;
  GlitchModel glitch_;
  std::mt19937_64 rng_;
  QueryLedger ledger_;
};

}  // namespace barkbeetle
