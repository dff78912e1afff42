// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "barkbeetle/types.hpp"

namespace barkbeetle {

struct VictimNode {
  int id = 0;
  int feature = 0;
  double threshold = 0.0;
  int left = 0;
  int right = 0;

  friend bool operator==(const VictimNode&, const VictimNode&) = default;
};

struct VictimLeaf {
  int id = 0;
  LeafLabel label;

  friend bool operator==(const VictimLeaf&, const VictimLeaf&) = default;
};

/// Internal nodes visited by one inference, root first.
struct TracedPath {
  std::vector<int> node_ids;
  std::vector<int> directions;
  int leaf_id = 0;
  LeafLabel label;

  int beta() const { return static_cast<int>(node_ids.size()); }
};

/// Comparison override used to simulate a fault: the node at `position`
/// along the traversal takes `direction` regardless of its comparison.
struct BranchOverride {
  int position = 0;
  int direction = kLeft;
};

/// Ground-truth decision tree. Immutable once constructed; the constructor
/// validates every structural invariant and leaf identifiability.
class VictimTree {
 public:
  VictimTree(Task task, std::vector<FeatureSpec> features, std::vector<VictimNode> nodes,
             std::vector<VictimLeaf> leaves, int root);

  Task task() const { return task_; }
  const std::vector<FeatureSpec>& features() const { return features_; }
  const std::vector<VictimNode>& nodes() const { return nodes_; }
  const std::vector<VictimLeaf>& leaves() const { return leaves_; }
  int root() const { return root_; }

  int dimension() const { return static_cast<int>(features_.size()); }
  /// alpha: number of leaves (= number of root-to-leaf paths).
  int leaf_count() const { return static_cast<int>(leaves_.size()); }
  /// h: largest number of internal nodes on any root-to-leaf path.
  int depth() const { return depth_; }

  bool is_leaf(int id) const;
  const VictimNode& node(int id) const;
  const VictimLeaf& leaf(int id) const;
  /// Number of internal nodes between the root and the given leaf.
  int leaf_depth(int leaf_id) const;

  /// Every root-to-leaf path, enumerated left to right.
  std::vector<TracedPath> paths() const;

  friend bool operator==(const VictimTree& a, const VictimTree& b);

 private:
  struct Slot {
    bool leaf = false;
    int index = 0;  // into nodes_ or leaves_
  };
  struct Flat {
    int feature = 0;
    double threshold = 0.0;
    Slot child[2];
  };

  friend TracedPath trace(const VictimTree&, std::span<const double>,
                          std::optional<BranchOverride>);
  friend LeafLabel infer(const VictimTree&, std::span<const double>);

  void build_index();
  void check_identifiability() const;

  Task task_;
  std::vector<FeatureSpec> features_;
  std::vector<VictimNode> nodes_;
  std::vector<VictimLeaf> leaves_;
  int root_;

  std::vector<Flat> flat_;
  Slot root_slot_;
  std::vector<std::pair<int, Slot>> by_id_;  // sorted by id
  std::vector<int> leaf_depth_;              // parallel to leaves_
  int depth_ = 0;
};

/// Label of the leaf reached by evaluating x_i < t at each node (ties go right).
LeafLabel infer(const VictimTree& tree, std::span<const double> x);

/// Full traversal record. With an override, the comparison at that path
/// position is replaced and the remaining nodes are evaluated normally.
/// Throws FaultOutOfRangeError if the override position is not reached.
TracedPath trace(const VictimTree& tree, std::span<const double> x,
                 std::optional<BranchOverride> override = std::nullopt);

}  // namespace barkbeetle
