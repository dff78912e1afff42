// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "barkbeetle/oracle.hpp"
#include "barkbeetle/search.hpp"
#include "barkbeetle/types.hpp"

namespace barkbeetle {

struct ExtractionConfig {
  /// Search granularity; also the nudge used to step across a threshold.
  double epsilon = 1e-3;
  std::vector<FeatureSpec> features;
  /// Features known to be integer valued; their nudge is max(epsilon, 1).
  std::vector<int> integer_features;
  /// Safety budget on iterator rounds; 0 selects 4 * (paths known so far).
  int max_rounds = 0;
  /// Stop with BudgetExceededError past this many total queries; 0 = none.
  std::uint64_t max_queries = 0;
  /// Thresholds are reported as k / snap_denominator when such a point lies
  /// in the final search bracket; 0 keeps the raw bisection point.
  std::int64_t snap_denominator = 0;

  void validate() const;
  double nudge(int feature) const;
  int dimension() const { return static_cast<int>(features.size()); }
};

/// Attacker's view of one node on a path: V = (s, t, br). Feature and
/// threshold are write-once.
class RecoveredNode {
 public:
  RecoveredNode() = default;
  explicit RecoveredNode(int br) : br_(br) {}

  const std::optional<int>& feature() const { return feature_; }
  const std::optional<double>& threshold() const { return threshold_; }
  int br() const { return br_; }
  bool recovered() const { return feature_ && threshold_; }

  void set_feature(int feature);
  void set_threshold(double threshold);
  void set_br(int br) { br_ = br; }

 private:
  std::optional<int> feature_;
  std::optional<double> threshold_;
  int br_ = kLeft;
};

struct RecoveredPath {
  std::vector<RecoveredNode> nodes;
  LeafLabel label;
  bool complete = false;

  int beta() const { return static_cast<int>(nodes.size()); }
  int duplicate_count() const;  // nodes minus distinct features
};

/// Working bounds of one feature on one path. `*_from_path` marks bounds
/// inherited from a node on the copied prefix (as opposed to the declared
/// feature range).
struct FeatureRange {
  double low = 0.0;
  double high = 0.0;
  bool low_from_path = false;
  bool high_from_path = false;
};

/// Everything needed to recover the unknown suffix of one path.
struct PathWork {
  RecoveredPath path;
  /// Input reaching the path's leaf, sitting at the baseline corner of the
  /// leaf's cell (low corner in the left subtree, high corner in the right).
  Input witness;
  /// 0: path lies in the root's left subtree, 1: right subtree.
  int flag = kLeft;
  /// Nodes [0, first_open) were copied from a parent path and are known.
  int first_open = 0;
  /// S_DF: features that occur more than once on the open suffix or also
  /// occur on the known prefix.
  std::vector<int> duplicates;
  std::vector<FeatureRange> ranges;
};

/// Seeds ranges for a path from the declared feature box and the known prefix.
std::vector<FeatureRange> prefix_ranges(const ExtractionConfig& config, const RecoveredPath& path,
                                        int prefix_length);

/// First-occurrence discovery: finds every feature on the open suffix,
/// recovers unique ones, and queues duplicated ones in work.duplicates.
void discover_first_features(Oracle& oracle, const ExtractionConfig& config, PathWork& work);

/// Bottom-up recovery of every occurrence of the features in
/// work.duplicates. Leaves the whole path recovered or throws
/// ExtractionStalledError.
void discover_duplicate_features(Oracle& oracle, const ExtractionConfig& config, PathWork& work);

struct ExtractionState {
  std::vector<RecoveredPath> paths;
  /// X-bar: one witness input per path.
  std::vector<Input> baseline_inputs;
  std::vector<int> lr_path;
  /// 1 while a path still has siblings to branch into; only ever drops to 0.
  std::vector<int> paths_status;
  std::vector<int> start_node;
  std::vector<int> candidates;
  /// S_DF and feature ranges as seeded for each path.
  std::vector<std::vector<int>> duplicates;
  std::vector<std::vector<FeatureRange>> feature_ranges;
  /// (label, beta) of every registered path.
  std::set<std::pair<LeafLabel, int>> keys;
  int rounds = 0;

  int pending() const;
  std::string dump() const;
};

/// One sweep of the tree iterator: every candidate path branches at each
/// node from its start node onward, and each new path is recovered.
void recover_tree_iteration(Oracle& oracle, const ExtractionConfig& config, ExtractionState& state);

struct RecoveredTreeNode {
  int id = 0;
  int feature = 0;
  double threshold = 0.0;
  int left = 0;
  int right = 0;
};

struct RecoveredLeaf {
  int id = 0;
  LeafLabel label;
};

/// Paths merged into one binary tree. Ids: internal nodes first in
/// breadth-first order, then leaves.
struct RecoveredTree {
  std::vector<FeatureSpec> features;
  std::vector<RecoveredTreeNode> nodes;
  std::vector<RecoveredLeaf> leaves;
  int root = 0;
};

/// Merges recovered paths on shared prefixes. Two path nodes are the same
/// tree node when they sit at the same position and their features match
/// and thresholds differ by less than 2 * epsilon; anything else on a shared
/// prefix is an AssemblyError.
RecoveredTree assemble_tree(const std::vector<RecoveredPath>& paths,
                            const std::vector<FeatureSpec>& features, double epsilon);

struct ExtractionResult {
  RecoveredTree tree;
  ExtractionState state;
  QueryLedger ledger;
};

/// Full bottom-up extraction starting from the leftmost and rightmost paths.
ExtractionResult extract_tree(Oracle& oracle, const ExtractionConfig& config);

/// Oracle decorator that enforces ExtractionConfig::max_queries.
class BudgetedOracle final : public Oracle {
 public:
  BudgetedOracle(Oracle& inner, std::uint64_t max_queries) : inner_(inner), max_(max_queries) {}

  LeafLabel infer(std::span<const double> x) override;
  LeafLabel fault_infer(std::span<const double> x, FaultSpec fault) override;
  Observation fault_observe(std::span<const double> x, FaultSpec fault) override;
  int probe_path(std::span<const double> x) override { return inner_.probe_path(x); }
  QueryLedger ledger() const override { return inner_.ledger(); }

 private:
  void check() const;

  Oracle& inner_;
  std::uint64_t max_;
};

}  // namespace barkbeetle
