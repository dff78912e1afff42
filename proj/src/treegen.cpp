// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/treegen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>

#include <json.hpp>

#include "barkbeetle/errors.hpp"

namespace barkbeetle {

using nlohmann::json;

void GenSpec::validate() const {
  if (depth < 1) throw GenerationError("depth must be at least 1");
  if (n_features < 1) throw GenerationError("n_features must be at least 1");
  if (duplicates_per_path < 0 || duplicates_per_path > depth - 1) {
    throw GenerationError("duplicates_per_path must lie in [0, depth - 1]");
  }
  if (!(min_threshold_gap > 0.0)) throw GenerationError("min_threshold_gap must be positive");
  if (threshold_denominator < 1) throw GenerationError("threshold_denominator must be positive");
  if (!(range_min < range_max)) throw GenerationError("range_min must be below range_max");
}

GenSpec GenSpec::from_json(std::string_view document) {
  GenSpec s;
  try {
    const json j = json::parse(document);
    s.depth = j.value("depth", s.depth);
    s.n_features = j.value("n_features", s.n_features);
    s.duplicates_per_path = j.value("duplicates_per_path", s.duplicates_per_path);
    s.task = task_from_string(j.value("task", to_string(s.task)));
    s.min_threshold_gap = j.value("min_threshold_gap", s.min_threshold_gap);
    s.seed = j.value("seed", s.seed);
    s.threshold_denominator = j.value("threshold_denominator", s.threshold_denominator);
    s.range_min = j.value("range_min", s.range_min);
    s.range_max = j.value("range_max", s.range_max);
  } catch (const json::exception& e) {
    throw ParseError("gen_spec", e.what());
  }
  s.validate();
  return s;
}

std::string GenSpec::to_json() const {
  return json{{"depth", depth},
              {"n_features", n_features},
              {"duplicates_per_path", duplicates_per_path},
              {"task", to_string(task)},
              {"min_threshold_gap", min_threshold_gap},
              {"seed", seed},
              {"threshold_denominator", threshold_denominator},
              {"range_min", range_min},
              {"range_max", range_max}}
      .dump();
}

namespace {

struct Cell {
  double low;
  double high;
};

// Builds nodes/leaves with ids assigned in creation order.
class Builder {
 public:
  Builder(const GenSpec& spec, std::mt19937_64& rng) : spec_(spec), rng_(rng) {}

  // Grid threshold inside the central `band` of the cell, at least the gap
  // away from both bounds.
  std::optional<double> draw(const Cell& c, double band) {
    const double w = c.high - c.low;
    const double margin = std::max(spec_.min_threshold_gap, band * w);
    const double n = static_cast<double>(spec_.threshold_denominator);
    const auto k_lo = static_cast<std::int64_t>(std::ceil((c.low + margin) * n));
    const auto k_hi = static_cast<std::int64_t>(std::floor((c.high - margin) * n));
    for (std::int64_t a = k_lo, b = k_hi; a <= b;) {
      const std::int64_t k = std::uniform_int_distribution<std::int64_t>(a, b)(rng_);
      const double t = static_cast<double>(k) / n;
      // Rounding at the ends can violate the gap by an ulp; shrink and retry.
      if (t - c.low >= spec_.min_threshold_gap && c.high - t >= spec_.min_threshold_gap) return t;
      if (k == a) ++a; else --b;
    }
    return std::nullopt;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  const GenSpec& spec_;
  std::mt19937_64& rng_;
};

std::vector<FeatureSpec> feature_box(const GenSpec& spec) {
  std::vector<FeatureSpec> features;
  for (int i = 0; i < spec.n_features; ++i) features.push_back({i, spec.range_min, spec.range_max});
  return features;
}

// Distinct regression values, or class ids unique within each leaf depth.
std::vector<LeafLabel> make_labels(const GenSpec& spec, const std::vector<int>& depths,
                                   std::mt19937_64& rng) {
  std::vector<LeafLabel> labels;
  if (spec.task == Task::kClassification) {
    std::map<int, std::int64_t> next;
    for (int dpt : depths) labels.push_back(LeafLabel::classification(next[dpt]++));
    return labels;
  }
  std::set<double> used;
  std::uniform_int_distribution<int> pick(0, 999999);
  while (labels.size() < depths.size()) {
    const double v = pick(rng) / 1000.0;
    if (used.insert(v).second) labels.push_back(LeafLabel::regression(v));
  }
  return labels;
}

constexpr double kNewBand = 0.3;
constexpr double kNestedBand = 0.45;

}  // namespace

VictimTree gen_complete(const GenSpec& spec) {
  spec.validate();
  const int distinct = spec.depth - spec.duplicates_per_path;
  if (spec.n_features < distinct) {
    throw GenerationError("need at least " + std::to_string(distinct) + " features for depth " +
                          std::to_string(spec.depth) + " with " +
                          std::to_string(spec.duplicates_per_path) + " duplicates per path");
  }
  std::mt19937_64 rng(spec.seed);
  Builder builder(spec, rng);

  std::vector<VictimNode> nodes;
  std::vector<int> leaf_slots;  // node index * 2 + side
  std::vector<int> leaf_depths;

  struct Frame {
    int level;
    std::vector<std::optional<Cell>> cells;  // set once the feature is on the path
    int parent_slot;                         // -1 for the root
  };
  std::vector<Frame> stack{{0, std::vector<std::optional<Cell>>(spec.n_features), -1}};
  const Cell full{spec.range_min, spec.range_max};

  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    std::vector<int> used;
    std::vector<int> unused;
    for (int f = 0; f < spec.n_features; ++f) (fr.cells[f] ? used : unused).push_back(f);
    const int remaining = spec.depth - fr.level;
    const int need_new = distinct - static_cast<int>(used.size());

    bool fresh;
    if (need_new == remaining || used.empty()) {
      fresh = true;
    } else if (need_new == 0) {
      fresh = false;
    } else {
      fresh = std::bernoulli_distribution(static_cast<double>(need_new) / remaining)(rng);
    }

    int feature = -1;
    std::optional<double> t;
    if (fresh) {
      feature = unused[std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng)];
      t = builder.draw(full, kNewBand);
    } else {
      std::shuffle(used.begin(), used.end(), rng);
      for (int f : used) {
        t = builder.draw(*fr.cells[f], kNestedBand);
        if (t) {
          feature = f;
          break;
        }
      }
    }
    if (!t) throw GenerationError("threshold gap too large for the requested nesting");

    const int id = static_cast<int>(nodes.size());
    nodes.push_back({id, feature, *t, -1, -1});
    if (fr.parent_slot >= 0) {
      VictimNode& parent = nodes[fr.parent_slot / 2];
      (fr.parent_slot % 2 == 0 ? parent.left : parent.right) = id;
    }
    const Cell cell = fr.cells[feature].value_or(full);
    for (int side = 1; side >= 0; --side) {
      if (fr.level + 1 == spec.depth) {
        if (side == 1) {
          leaf_slots.push_back(id * 2);
          leaf_slots.push_back(id * 2 + 1);
          leaf_depths.push_back(spec.depth);
          leaf_depths.push_back(spec.depth);
        }
        continue;
      }
      Frame child{fr.level + 1, fr.cells, id * 2 + side};
      child.cells[feature] = side == 0 ? Cell{cell.low, *t} : Cell{*t, cell.high};
      stack.push_back(std::move(child));
    }
  }

  const std::vector<LeafLabel> labels = make_labels(spec, leaf_depths, rng);
  std::vector<VictimLeaf> leaves;
  for (std::size_t i = 0; i < leaf_slots.size(); ++i) {
    const int id = static_cast<int>(nodes.size() + i);
    VictimNode& parent = nodes[leaf_slots[i] / 2];
    (leaf_slots[i] % 2 == 0 ? parent.left : parent.right) = id;
    leaves.push_back({id, labels[i]});
  }
  return VictimTree(spec.task, feature_box(spec), std::move(nodes), std::move(leaves), 0);
}

VictimTree gen_random(int leaf_count, int depth_max, const GenSpec& spec) {
  GenSpec base = spec;
  base.depth = std::max(1, depth_max);
  base.duplicates_per_path = 0;
  base.validate();
  if (leaf_count < 2) throw GenerationError("a random tree needs at least 2 leaves");
  if (depth_max < 1 || (depth_max < 31 && leaf_count > (1 << depth_max))) {
    throw GenerationError(std::to_string(leaf_count) + " leaves do not fit in depth " +
                          std::to_string(depth_max));
  }
  std::mt19937_64 rng(spec.seed);
  Builder builder(spec, rng);
  const Cell full{spec.range_min, spec.range_max};
  constexpr double kBand = 0.2;

  // Open leaves of the growing tree.
  struct Open {
    int parent_slot;  // node index * 2 + side, -1 for the root
    int depth;
    std::vector<Cell> cells;
  };
  std::vector<VictimNode> nodes;
  std::vector<Open> open{{-1, 0, std::vector<Cell>(spec.n_features, full)}};

  auto split = [&](std::size_t which) -> bool {
    Open leaf = open[which];
    std::vector<int> order(spec.n_features);
    for (int f = 0; f < spec.n_features; ++f) order[f] = f;
    std::shuffle(order.begin(), order.end(), rng);
    for (int f : order) {
      const std::optional<double> t = builder.draw(leaf.cells[f], kBand);
      if (!t) continue;
      const int id = static_cast<int>(nodes.size());
      nodes.push_back({id, f, *t, -1, -1});
      if (leaf.parent_slot >= 0) {
        VictimNode& parent = nodes[leaf.parent_slot / 2];
        (leaf.parent_slot % 2 == 0 ? parent.left : parent.right) = id;
      }
      Open left{id * 2, leaf.depth + 1, leaf.cells};
      Open right{id * 2 + 1, leaf.depth + 1, leaf.cells};
      left.cells[f].high = *t;
      right.cells[f].low = *t;
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(which));
      open.push_back(std::move(left));
      open.push_back(std::move(right));
      return true;
    }
    return false;
  };

  const int spine = std::min(depth_max, leaf_count - 1);
  for (int level = 0; level < spine; ++level) {
    // The deepest open leaf is always the last one pushed; alternate sides.
    const std::size_t which = open.size() - 1 - (level % 2 == 1 && open.size() > 1 ? 1 : 0);
    if (!split(which)) throw GenerationError("threshold gap too large for depth " +
                                             std::to_string(depth_max));
  }
  while (static_cast<int>(open.size()) < leaf_count) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < open.size(); ++i) {
      if (open[i].depth < depth_max) eligible.push_back(i);
    }
    bool grown = false;
    std::shuffle(eligible.begin(), eligible.end(), rng);
    for (std::size_t i : eligible) {
      if (split(i)) {
        grown = true;
        break;
      }
    }
    if (!grown) throw GenerationError("no leaf can be split further");
  }

  std::vector<int> depths;
  for (const Open& o : open) depths.push_back(o.depth);
  const std::vector<LeafLabel> labels = make_labels(spec, depths, rng);
  std::vector<VictimLeaf> leaves;
  for (std::size_t i = 0; i < open.size(); ++i) {
    const int id = static_cast<int>(nodes.size() + i);
    VictimNode& parent = nodes[open[i].parent_slot / 2];
    (open[i].parent_slot % 2 == 0 ? parent.left : parent.right) = id;
    leaves.push_back({id, labels[i]});
  }
  return VictimTree(spec.task, feature_box(spec), std::move(nodes), std::move(leaves), 0);
}

}  // namespace barkbeetle
