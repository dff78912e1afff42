// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/victim_tree.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "barkbeetle/errors.hpp"

namespace barkbeetle {

VictimTree::VictimTree(Task task, std::vector<FeatureSpec> features,
                       std::vector<VictimNode> nodes, std::vector<VictimLeaf> leaves, int root)
    : task_(task),
      features_(std::move(features)),
      nodes_(std::move(nodes)),
      leaves_(std::move(leaves)),
      root_(root) {
  validate_feature_specs(features_);
  build_index();
  check_identifiability();
}

void VictimTree::build_index() {
  const int d = dimension();
  std::map<int, Slot> ids;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!ids.emplace(nodes_[i].id, Slot{false, static_cast<int>(i)}).second) {
      throw ValidationError("duplicate node id " + std::to_string(nodes_[i].id));
    }
  }
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    if (!ids.emplace(leaves_[i].id, Slot{true, static_cast<int>(i)}).second) {
      throw ValidationError("duplicate node id " + std::to_string(leaves_[i].id));
    }
    const bool regression_label = leaves_[i].label.is_regression();
    if (regression_label != (task_ == Task::kRegression)) {
      throw ValidationError("leaf " + std::to_string(leaves_[i].id) +
                            " label kind does not match task");
    }
  }
  if (leaves_.empty()) throw ValidationError("tree has no leaves");

  auto root_it = ids.find(root_);
  if (root_it == ids.end()) throw ValidationError("root id " + std::to_string(root_) + " not found");

  std::map<int, int> parents;
  flat_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const VictimNode& n = nodes_[i];
    if (n.feature < 0 || n.feature >= d) {
      throw ValidationError("node " + std::to_string(n.id) + " feature index out of range");
    }
    const FeatureSpec& spec = features_[n.feature];
    if (!(n.threshold >= spec.min && n.threshold <= spec.max)) {
      throw ValidationError("node " + std::to_string(n.id) + " threshold outside feature range");
    }
    if (n.left == n.right) {
      throw ValidationError("node " + std::to_string(n.id) + " has identical children");
    }
    flat_[i].feature = n.feature;
    flat_[i].threshold = n.threshold;
    const int children[2] = {n.left, n.right};
    for (int side = 0; side < 2; ++side) {
      auto it = ids.find(children[side]);
      if (it == ids.end()) {
        throw ValidationError("node " + std::to_string(n.id) + " has dangling child " +
                              std::to_string(children[side]));
      }
      if (!parents.emplace(children[side], n.id).second) {
        throw ValidationError("node " + std::to_string(children[side]) + " has two parents");
      }
      flat_[i].child[side] = it->second;
    }
  }
  if (parents.count(root_)) throw ValidationError("root has a parent");
  if (parents.size() + 1 != ids.size()) {
    throw ValidationError("tree is not connected: some nodes are unreachable from the root");
  }
  root_slot_ = root_it->second;
  by_id_.assign(ids.begin(), ids.end());

  // Single parents plus a parentless root reaching everything is a tree; the
  // walk below also rejects cycles that bypass the root.
  leaf_depth_.assign(leaves_.size(), -1);
  std::vector<std::pair<Slot, int>> stack{{root_slot_, 0}};
  std::size_t visited = 0;
  depth_ = 0;
  while (!stack.empty()) {
    auto [slot, depth] = stack.back();
    stack.pop_back();
    if (++visited > ids.size()) throw ValidationError("tree contains a cycle");
    if (slot.leaf) {
      leaf_depth_[slot.index] = depth;
      depth_ = std::max(depth_, depth);
      continue;
    }
    stack.push_back({flat_[slot.index].child[1], depth + 1});
    stack.push_back({flat_[slot.index].child[0], depth + 1});
  }
  if (visited != ids.size()) throw ValidationError("tree contains a cycle");
}

void VictimTree::check_identifiability() const {
  if (task_ == Task::kRegression) {
    std::set<double> seen;
    for (const VictimLeaf& leaf : leaves_) {
      if (!seen.insert(leaf.label.value()).second) {
        throw IdentifiabilityError("regression leaf value " + leaf.label.to_string() +
                                   " is not unique");
      }
    }
    return;
  }
  std::set<std::pair<std::int64_t, int>> seen;
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    if (!seen.emplace(leaves_[i].label.class_id(), leaf_depth_[i]).second) {
      throw IdentifiabilityError("unsupported classification tree: class " +
                                 leaves_[i].label.to_string() + " appears twice at path length " +
                                 std::to_string(leaf_depth_[i]));
    }
  }
}

bool VictimTree::is_leaf(int id) const {
  auto it = std::lower_bound(by_id_.begin(), by_id_.end(), id,
                             [](const auto& entry, int key) { return entry.first < key; });
  if (it == by_id_.end() || it->first != id) throw ValidationError("unknown id " + std::to_string(id));
  return it->second.leaf;
}

const VictimNode& VictimTree::node(int id) const {
  for (const auto& [key, slot] : by_id_) {
    if (key == id && !slot.leaf) return nodes_[slot.index];
  }
  throw ValidationError("no internal node with id " + std::to_string(id));
}

const VictimLeaf& VictimTree::leaf(int id) const {
  for (const auto& [key, slot] : by_id_) {
    if (key == id && slot.leaf) return leaves_[slot.index];
  }
  throw ValidationError("no leaf with id " + std::to_string(id));
}

int VictimTree::leaf_depth(int leaf_id) const {
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    if (leaves_[i].id == leaf_id) return leaf_depth_[i];
  }
  throw ValidationError("no leaf with id " + std::to_string(leaf_id));
}

std::vector<TracedPath> VictimTree::paths() const {
  std::vector<TracedPath> out;
  TracedPath current;
  auto walk = [&](auto&& self, Slot slot) -> void {
    if (slot.leaf) {
      current.leaf_id = leaves_[slot.index].id;
      current.label = leaves_[slot.index].label;
      out.push_back(current);
      return;
    }
    current.node_ids.push_back(nodes_[slot.index].id);
    for (int side = 0; side < 2; ++side) {
      current.directions.push_back(side);
      self(self, flat_[slot.index].child[side]);
      current.directions.pop_back();
    }
    current.node_ids.pop_back();
  };
  walk(walk, root_slot_);
  return out;
}

bool operator==(const VictimTree& a, const VictimTree& b) {
  if (a.task_ != b.task_ || a.features_ != b.features_ || a.root_ != b.root_) return false;
  auto sorted_nodes = [](std::vector<VictimNode> v) {
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    return v;
  };
  auto sorted_leaves = [](std::vector<VictimLeaf> v) {
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    return v;
  };
  return sorted_nodes(a.nodes_) == sorted_nodes(b.nodes_) &&
         sorted_leaves(a.leaves_) == sorted_leaves(b.leaves_);
}

namespace {

void check_dimension(const VictimTree& tree, std::span<const double> x) {
  if (static_cast<int>(x.size()) != tree.dimension()) {
    throw DimensionError("input has " + std::to_string(x.size()) + " values, tree expects " +
                         std::to_string(tree.dimension()));
  }
}

}  // namespace

LeafLabel infer(const VictimTree& tree, std::span<const double> x) {
  check_dimension(tree, x);
  VictimTree::Slot slot = tree.root_slot_;
  while (!slot.leaf) {
    const auto& n = tree.flat_[slot.index];
    slot = n.child[x[n.feature] < n.threshold ? kLeft : kRight];
  }
  return tree.leaves_[slot.index].label;
}

TracedPath trace(const VictimTree& tree, std::span<const double> x,
                 std::optional<BranchOverride> override) {
  check_dimension(tree, x);
  TracedPath path;
  VictimTree::Slot slot = tree.root_slot_;
  while (!slot.leaf) {
    const auto& n = tree.flat_[slot.index];
    int dir = x[n.feature] < n.threshold ? kLeft : kRight;
    if (override && override->position == path.beta()) dir = override->direction;
    path.node_ids.push_back(tree.nodes_[slot.index].id);
    path.directions.push_back(dir);
    slot = n.child[dir];
  }
  if (override && override->position >= path.beta()) {
    throw FaultOutOfRangeError("fault position " + std::to_string(override->position) +
                               " beyond traversal of " + std::to_string(path.beta()) + " nodes");
  }
  path.leaf_id = tree.leaves_[slot.index].id;
  path.label = tree.leaves_[slot.index].label;
  return path;
}

}  // namespace barkbeetle
