// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <set>

#include <json.hpp>

#include "barkbeetle/errors.hpp"

namespace barkbeetle {

using nlohmann::json;

void ExtractionConfig::validate() const {
  validate_feature_specs(features);
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("epsilon must be positive and finite");
  }
  for (const FeatureSpec& f : features) {
    if (!(epsilon < f.max - f.min)) {
      throw ValidationError("epsilon must be smaller than the range of feature " +
                            std::to_string(f.index));
    }
  }
  for (int f : integer_features) {
    if (f < 0 || f >= dimension()) throw ValidationError("integer feature index out of range");
  }
  if (max_rounds < 0) throw ValidationError("max_rounds must be non-negative");
  if (snap_denominator < 0) throw ValidationError("snap_denominator must be non-negative");
}

double ExtractionConfig::nudge(int feature) const {
  const bool integral =
      std::find(integer_features.begin(), integer_features.end(), feature) != integer_features.end();
  return integral ? std::max(epsilon, 1.0) : epsilon;
}

void RecoveredNode::set_feature(int feature) {
  if (feature_ && *feature_ != feature) {
    throw ExtractionStalledError("node feature already recovered as " + std::to_string(*feature_));
  }
  feature_ = feature;
}

void RecoveredNode::set_threshold(double threshold) {
  if (threshold_) throw ExtractionStalledError("node threshold already recovered");
  threshold_ = threshold;
}

int RecoveredPath::duplicate_count() const {
  std::set<int> distinct;
  for (const RecoveredNode& n : nodes) {
    if (n.feature()) distinct.insert(*n.feature());
  }
  return beta() - static_cast<int>(distinct.size());
}

int ExtractionState::pending() const {
  return static_cast<int>(std::count(candidates.begin(), candidates.end(), 1));
}

namespace {

json path_json(const RecoveredPath& p) {
  json nodes = json::array();
  for (const RecoveredNode& n : p.nodes) {
    json v;
    v["feature"] = n.feature() ? json(*n.feature()) : json(nullptr);
    v["threshold"] = n.threshold() ? json(*n.threshold()) : json(nullptr);
    v["br"] = n.br();
    nodes.push_back(std::move(v));
  }
  return json{{"label", p.label.to_string()}, {"complete", p.complete}, {"nodes", nodes}};
}

// Low corner of the cell along feature f: just above a prefix bound, or
// below the whole feature box.
double lower_corner(const ExtractionConfig& c, int f, const FeatureRange& r) {
  return r.low_from_path ? r.low + c.nudge(f) : c.features[f].min - 1.0;
}

double upper_corner(const ExtractionConfig& c, int f, const FeatureRange& r) {
  return r.high_from_path ? r.high - c.nudge(f) : c.features[f].max + 1.0;
}

double far_corner(const ExtractionConfig& c, int f, const FeatureRange& r, int flag) {
  return flag == kLeft ? upper_corner(c, f, r) : lower_corner(c, f, r);
}

// Input just across threshold t from the baseline side.
double across(const ExtractionConfig& c, int f, double t, int flag) {
  return flag == kLeft ? t + c.nudge(f) : t - c.nudge(f);
}

// Observes runs as leaf identities. Regression labels are unique per leaf;
// class labels repeat, so the side-channel node count joins the comparison.
class Viewer {
 public:
  Viewer(Oracle& oracle, const LeafLabel& kind)
      : oracle_(oracle), with_beta_(!kind.is_regression()) {}

  Observation key(const LeafLabel& label, int beta) const {
    return {label, with_beta_ ? beta : -1};
  }
  Observation normal(const Input& x) {
    const LeafLabel label = oracle_.infer(x);
    return {label, with_beta_ ? oracle_.probe_path(x) : -1};
  }
  Observation faulted(const Input& x, FaultSpec fault) {
    if (with_beta_) return oracle_.fault_observe(x, fault);
    return {oracle_.fault_infer(x, fault), -1};
  }

 private:
  Oracle& oracle_;
  bool with_beta_;
};

Observation path_key(const Viewer& v, const RecoveredPath& path) {
  return v.key(path.label, path.beta());
}

SearchRequest make_request(const ExtractionConfig& c, const PathWork& w, int feature,
                           const Observation& baseline, double low, double high) {
  SearchRequest req;
  req.x = w.witness;
  req.baseline = baseline.label;
  if (baseline.beta >= 0) req.baseline_beta = baseline.beta;
  req.feature = feature;
  req.low = low;
  req.high = high;
  req.flag = w.flag;
  req.epsilon = c.epsilon;
  req.snap_denominator = c.snap_denominator;
  return req;
}

std::string work_dump(const PathWork& w) {
  json j = path_json(w.path);
  j["first_open"] = w.first_open;
  j["flag"] = w.flag;
  j["duplicates"] = w.duplicates;
  return j.dump();
}

// Per-feature cursor for the bottom-up duplicate walk.
struct DuplicateCursor {
  int feature = 0;
  Observation baseline;
  double threshold = 0.0;
  int loc = 0;
  bool done = false;
};

// Finds the open node owning cursor.threshold, scanning toward the root from
// the previously located node.
int locate(Oracle& oracle, Viewer& view, const ExtractionConfig& config, PathWork& work,
           const DuplicateCursor& cur, bool& marked) {
  RecoveredPath& path = work.path;
  Input cross = work.witness;
  cross[cur.feature] = across(config, cur.feature, cur.threshold, work.flag);
  std::optional<int> cross_beta;
  marked = false;
  for (int j = cur.loc - 1; j >= work.first_open; --j) {
    const RecoveredNode& node = path.nodes[j];
    if (node.threshold()) continue;
    if (node.feature()) {
      if (*node.feature() != cur.feature) continue;
      marked = true;
      return j;
    }
    if (!cross_beta) cross_beta = oracle.probe_path(cross);
    if (j >= *cross_beta) continue;
    if (view.faulted(cross, FaultSpec{j, work.flag}) == cur.baseline) return j;
  }
  return -1;
}

}  // namespace

std::vector<FeatureRange> prefix_ranges(const ExtractionConfig& config, const RecoveredPath& path,
                                        int prefix_length) {
  std::vector<FeatureRange> ranges;
  ranges.reserve(config.features.size());
  for (const FeatureSpec& f : config.features) ranges.push_back({f.min, f.max, false, false});
  for (int j = 0; j < prefix_length; ++j) {
    const RecoveredNode& n = path.nodes[j];
    FeatureRange& r = ranges[*n.feature()];
    const double t = *n.threshold();
    if (n.br() == kLeft) {
      if (!r.high_from_path || t < r.high) r.high = t;
      r.high_from_path = true;
    } else {
      if (!r.low_from_path || t > r.low) r.low = t;
      r.low_from_path = true;
    }
  }
  return ranges;
}

void discover_first_features(Oracle& oracle, const ExtractionConfig& config, PathWork& work) {
  RecoveredPath& path = work.path;
  const int beta = path.beta();
  if (work.first_open >= beta) return;
  Viewer view(oracle, path.label);
  const Observation here = path_key(view, path);

  std::vector<bool> skip(config.features.size(), false);
  for (int j = 0; j < work.first_open; ++j) skip[*path.nodes[j].feature()] = true;
  for (int f : work.duplicates) skip[f] = true;

  for (int f = 0; f < config.dimension(); ++f) {
    if (skip[f]) continue;
    Input probe = work.witness;
    probe[f] = work.flag == kLeft ? config.features[f].max + 1.0 : config.features[f].min - 1.0;
    const Observation moved = view.normal(probe);
    if (moved == here) continue;

    int first = -1;
    Observation faulted;
    for (int j = work.first_open; j < beta; ++j) {
      if (path.nodes[j].feature()) continue;
      faulted = view.faulted(probe, FaultSpec{j, work.flag});
      if (faulted != moved) {
        first = j;
        break;
      }
    }
    if (first < 0) {
      throw ExtractionStalledError("feature " + std::to_string(f) +
                                   " changes the label but owns no open node: " + work_dump(work));
    }
    path.nodes[first].set_feature(f);
    if (faulted != here) {
      work.duplicates.push_back(f);
      continue;
    }
    const FeatureSpec& spec = config.features[f];
    const SearchRequest req = make_request(config, work, f, here, spec.min, spec.max);
    path.nodes[first].set_threshold(fault_assisted_search(oracle, req));
  }
}

void discover_duplicate_features(Oracle& oracle, const ExtractionConfig& config, PathWork& work) {
  RecoveredPath& path = work.path;
  const int beta = path.beta();
  Viewer view(oracle, path.label);
  const Observation here = path_key(view, path);

  std::vector<DuplicateCursor> cursors;
  for (int f : work.duplicates) {
    const FeatureRange& r = work.ranges[f];
    const SearchRequest req = make_request(config, work, f, here, r.low, r.high);
    cursors.push_back({f, here, fault_assisted_search(oracle, req), beta, false});
  }

  const std::size_t limit = static_cast<std::size_t>(beta + 1) * (cursors.size() + 1);
  std::size_t rounds = 0;
  auto open = [&] {
    return std::any_of(cursors.begin(), cursors.end(), [](const auto& c) { return !c.done; });
  };
  while (open()) {
    if (++rounds > limit) throw ExtractionStalledError("duplicate walk stalled: " + work_dump(work));
    for (DuplicateCursor& cur : cursors) {
      if (cur.done) continue;
      const int f = cur.feature;

      bool marked = false;
      const int at = locate(oracle, view, config, work, cur, marked);
      if (at < 0) {
        throw ExtractionStalledError("no node owns threshold " + std::to_string(cur.threshold) +
                                     " of feature " + std::to_string(f) + ": " + work_dump(work));
      }
      path.nodes[at].set_feature(f);
      path.nodes[at].set_threshold(cur.threshold);
      cur.loc = at;
      if (marked) {
        // First-feature discovery already marked the topmost occurrence.
        cur.done = true;
        continue;
      }

      FeatureRange& r = work.ranges[f];
      (work.flag == kLeft ? r.low : r.high) = cur.threshold;
      Input far = work.witness;
      far[f] = far_corner(config, f, r, work.flag);
      if (cur.loc < oracle.probe_path(far) &&
          view.faulted(far, FaultSpec{cur.loc, work.flag}) == cur.baseline) {
        cur.done = true;
        continue;
      }

      SearchRequest req = make_request(config, work, f, cur.baseline, r.low, r.high);
      req.fault_position = cur.loc;
      const double next = fault_assisted_search(oracle, req);
      Input refresh = work.witness;
      refresh[f] = work.flag == kLeft ? next - config.nudge(f) : next + config.nudge(f);
      cur.baseline = view.normal(refresh);
      cur.threshold = next;
    }
  }

  for (int j = work.first_open; j < beta; ++j) {
    if (!path.nodes[j].recovered()) {
      throw ExtractionStalledError("node " + std::to_string(j) + " left unrecovered: " +
                                   work_dump(work));
    }
  }
  path.complete = true;
}

std::string ExtractionState::dump() const {
  json j;
  j["rounds"] = rounds;
  j["paths"] = json::array();
  for (std::size_t k = 0; k < paths.size(); ++k) {
    json p = path_json(paths[k]);
    p["lr"] = lr_path[k];
    p["status"] = paths_status[k];
    p["start_node"] = start_node[k];
    p["candidate"] = candidates[k];
    j["paths"].push_back(std::move(p));
  }
  return j.dump();
}

namespace {

void register_path(ExtractionState& state, PathWork work, std::vector<int> seeded_duplicates,
                   std::vector<FeatureRange> seeded_ranges, int start) {
  if (!state.keys.emplace(work.path.label, work.path.beta()).second) {
    throw IdentifiabilityError("two leaves share label " + work.path.label.to_string() +
                               " and path length " + std::to_string(work.path.beta()));
  }
  const int open = start < work.path.beta() ? 1 : 0;
  state.paths.push_back(std::move(work.path));
  state.baseline_inputs.push_back(std::move(work.witness));
  state.lr_path.push_back(work.flag);
  state.paths_status.push_back(open);
  state.start_node.push_back(start);
  state.candidates.push_back(open);
  state.duplicates.push_back(std::move(seeded_duplicates));
  state.feature_ranges.push_back(std::move(seeded_ranges));
}

void recover_suffix(Oracle& oracle, const ExtractionConfig& config, PathWork& work) {
  discover_first_features(oracle, config, work);
  discover_duplicate_features(oracle, config, work);
}

}  // namespace

void recover_tree_iteration(Oracle& oracle, const ExtractionConfig& config,
                            ExtractionState& state) {
  const std::size_t known = state.paths.size();
  for (std::size_t k = 0; k < known; ++k) {
    if (!state.candidates[k]) continue;
    const RecoveredPath parent = state.paths[k];
    const Input witness = state.baseline_inputs[k];
    const int flag = state.lr_path[k];

    for (int i = state.start_node[k]; i < parent.beta(); ++i) {
      const RecoveredNode& node = parent.nodes[i];
      const int f = *node.feature();

      PathWork work;
      work.flag = flag;
      work.first_open = i + 1;
      work.witness = witness;
      work.witness[f] = across(config, f, *node.threshold(), flag);
      work.path.label = oracle.infer(work.witness);
      const int beta = oracle.probe_path(work.witness);
      if (beta <= i) {
        throw ExtractionStalledError("crossing node " + std::to_string(i) +
                                     " ended the traversal early: " + state.dump());
      }
      work.path.nodes.assign(parent.nodes.begin(), parent.nodes.begin() + i + 1);
      work.path.nodes[i].set_br(1 - flag);
      work.path.nodes.resize(beta, RecoveredNode(flag));
      work.ranges = prefix_ranges(config, work.path, i + 1);

      if (beta > i + 1) {
        Viewer view(oracle, work.path.label);
        const Observation here = path_key(view, work.path);
        std::set<int> prefix_features;
        for (int j = 0; j <= i; ++j) prefix_features.insert(*work.path.nodes[j].feature());
        for (int g : prefix_features) {
          Input far = work.witness;
          far[g] = far_corner(config, g, work.ranges[g], flag);
          if (view.normal(far) != here) work.duplicates.push_back(g);
        }
      }
      std::vector<int> seeded = work.duplicates;
      std::vector<FeatureRange> ranges = work.ranges;
      recover_suffix(oracle, config, work);
      work.path.complete = true;
      register_path(state, std::move(work), std::move(seeded), std::move(ranges), i + 1);
    }
    state.candidates[k] = 0;
    state.paths_status[k] = 0;
  }
  ++state.rounds;
}

RecoveredTree assemble_tree(const std::vector<RecoveredPath>& paths,
                            const std::vector<FeatureSpec>& features, double epsilon) {
  struct Trie {
    bool leaf = false;
    int feature = 0;
    double threshold = 0.0;
    LeafLabel label;
    std::unique_ptr<Trie> child[2];
  };
  if (paths.empty()) throw AssemblyError("no paths to assemble");

  std::unique_ptr<Trie> root;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const RecoveredPath& p = paths[k];
    std::unique_ptr<Trie>* slot = &root;
    for (int j = 0; j <= p.beta(); ++j) {
      const bool at_leaf = j == p.beta();
      if (!*slot) {
        *slot = std::make_unique<Trie>();
        (*slot)->leaf = at_leaf;
        if (at_leaf) {
          (*slot)->label = p.label;
        } else {
          const RecoveredNode& n = p.nodes[j];
          if (!n.recovered()) {
            throw AssemblyError("path " + std::to_string(k) + " node " + std::to_string(j) +
                                " is not recovered");
          }
          (*slot)->feature = *n.feature();
          (*slot)->threshold = *n.threshold();
        }
      } else if ((*slot)->leaf != at_leaf) {
        throw AssemblyError("path " + std::to_string(k) + " disagrees on the shape at depth " +
                            std::to_string(j));
      } else if (at_leaf) {
        if ((*slot)->label != p.label) {
          throw AssemblyError("path " + std::to_string(k) + " reaches an occupied leaf");
        }
      } else {
        const RecoveredNode& n = p.nodes[j];
        if (!n.recovered() || *n.feature() != (*slot)->feature ||
            !(std::abs(*n.threshold() - (*slot)->threshold) <= 2.0 * epsilon)) {
          throw AssemblyError("path " + std::to_string(k) + " conflicts with a shared node at depth " +
                              std::to_string(j));
        }
      }
      if (at_leaf) break;
      slot = &(*slot)->child[p.nodes[j].br()];
    }
  }

  RecoveredTree tree;
  tree.features = features;
  // Breadth-first numbering: internal nodes first, then leaves.
  std::vector<const Trie*> order;
  std::deque<const Trie*> queue{root.get()};
  std::vector<const Trie*> leaves;
  while (!queue.empty()) {
    const Trie* t = queue.front();
    queue.pop_front();
    if (t->leaf) {
      leaves.push_back(t);
      continue;
    }
    order.push_back(t);
    for (const auto& c : t->child) {
      if (!c) throw AssemblyError("a recovered node is missing a subtree");
      queue.push_back(c.get());
    }
  }
  auto id_of = [&](const Trie* t) {
    if (t->leaf) {
      return static_cast<int>(order.size() +
                              (std::find(leaves.begin(), leaves.end(), t) - leaves.begin()));
    }
    return static_cast<int>(std::find(order.begin(), order.end(), t) - order.begin());
  };
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Trie* t = order[i];
    tree.nodes.push_back({static_cast<int>(i), t->feature, t->threshold, id_of(t->child[0].get()),
                          id_of(t->child[1].get())});
  }
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    tree.leaves.push_back({static_cast<int>(order.size() + i), leaves[i]->label});
  }
  tree.root = id_of(root.get());
  return tree;
}

void BudgetedOracle::check() const {
  if (max_ > 0 && inner_.ledger().total_queries() >= max_) {
    throw BudgetExceededError("query budget of " + std::to_string(max_) + " exhausted");
  }
}

LeafLabel BudgetedOracle::infer(std::span<const double> x) {
  check();
  return inner_.infer(x);
}

LeafLabel BudgetedOracle::fault_infer(std::span<const double> x, FaultSpec fault) {
  check();
  return inner_.fault_infer(x, fault);
}

Observation BudgetedOracle::fault_observe(std::span<const double> x, FaultSpec fault) {
  check();
  return inner_.fault_observe(x, fault);
}

ExtractionResult extract_tree(Oracle& target, const ExtractionConfig& config) {
  config.validate();
  BudgetedOracle oracle(target, config.max_queries);
  ExtractionState state;

  for (int flag : {kLeft, kRight}) {
    PathWork work;
    work.flag = flag;
    work.witness.resize(config.features.size());
    for (const FeatureSpec& f : config.features) {
      work.witness[f.index] = flag == kLeft ? f.min - 1.0 : f.max + 1.0;
    }
    work.path.label = oracle.infer(work.witness);
    const int beta = oracle.probe_path(work.witness);
    work.path.nodes.assign(beta, RecoveredNode(flag));
    work.ranges = prefix_ranges(config, work.path, 0);
    std::vector<FeatureRange> ranges = work.ranges;
    recover_suffix(oracle, config, work);
    register_path(state, std::move(work), {}, std::move(ranges), 1);
    if (beta == 0) break;  // a single leaf
  }

  while (state.pending() > 0) {
    const int limit = config.max_rounds > 0
                          ? config.max_rounds
                          : 4 * std::max<int>(2, static_cast<int>(state.paths.size()));
    if (state.rounds >= limit) {
      throw ExtractionStalledError("round budget of " + std::to_string(limit) +
                                   " exhausted: " + state.dump());
    }
    recover_tree_iteration(oracle, config, state);
  }

  ExtractionResult result;
  result.tree = assemble_tree(state.paths, config.features, config.epsilon);
  result.state = std::move(state);
  result.ledger = target.ledger();
  return result;
}

}  // namespace barkbeetle
