// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "barkbeetle/errors.hpp"
#include "barkbeetle/treegen.hpp"

namespace barkbeetle {

using nlohmann::json;

std::string to_string(Attack attack) {
  return attack == Attack::kBarkBeetle ? "barkbeetle" : "baseline";
}

Attack attack_from_string(const std::string& name) {
  if (name == "barkbeetle") return Attack::kBarkBeetle;
  if (name == "baseline") return Attack::kBaseline;
  throw ValidationError("unknown attack '" + name + "'");
}

VictimTree to_victim_tree(const RecoveredTree& tree, Task task) {
  std::vector<VictimNode> nodes;
  for (const RecoveredTreeNode& n : tree.nodes) {
    nodes.push_back({n.id, n.feature, n.threshold, n.left, n.right});
  }
  std::vector<VictimLeaf> leaves;
  for (const RecoveredLeaf& l : tree.leaves) leaves.push_back({l.id, l.label});
  return VictimTree(task, tree.features, std::move(nodes), std::move(leaves), tree.root);
}

std::int64_t AttackOptions::effective_snap() const {
  if (snap_denominator) return *snap_denominator;
  return std::llround(1.0 / epsilon);
}

std::string RunReport::to_json(bool include_timing) const {
  json j;
  j["attack"] = barkbeetle::to_string(attack);
  j["tree_stats"] = {{"leaves", tree_stats.leaves},
                     {"depth", tree_stats.depth},
                     {"features", tree_stats.features}};
  j["ledger"] = {{"normal_queries", ledger.normal_queries},
                 {"fault_runs", ledger.fault_runs},
                 {"glitch_attempts", ledger.glitch_attempts},
                 {"side_channel_probes", ledger.side_channel_probes},
                 {"total_queries", ledger.total_queries()}};
  j["total_queries"] = ledger.total_queries();
  j["fault_runs"] = ledger.fault_runs;
  j["glitch_attempts"] = ledger.glitch_attempts;
  j["side_channel_probes"] = ledger.side_channel_probes;
  j["paths"] = paths;
  j["constraints"] = constraints;
  if (equivalence) {
    j["equivalence"] = {{"samples", equivalence->samples},
                        {"mismatches", equivalence->mismatches},
                        {"max_threshold_gap", equivalence->max_threshold_gap
                                                  ? json(*equivalence->max_threshold_gap)
                                                  : json(nullptr)}};
  }
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  if (include_timing) j["wall_time"] = wall_time;
  return j.dump(2);
}

EquivalenceReport boxes_equivalent(const VictimTree& truth,
                                   const std::vector<LeafConstraintBox>& boxes,
                                   std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EquivalenceReport report;
  report.samples = samples;
  Input x(truth.dimension());
  for (std::size_t s = 0; s < samples; ++s) {
    for (const FeatureSpec& f : truth.features()) {
      x[f.index] = std::uniform_real_distribution<double>(f.min, f.max)(rng);
    }
    const std::optional<LeafLabel> got = predict(boxes, x);
    if (!got || *got != infer(truth, x)) ++report.mismatches;
  }
  return report;
}

AttackOutcome run_attack(const VictimTree& truth, const AttackOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  SimulatedOracle oracle(truth, options.glitch);

  ExtractionConfig config;
  config.epsilon = options.epsilon;
  config.features = truth.features();
  config.max_queries = options.max_queries;
  config.snap_denominator = options.effective_snap();

  AttackOutcome out;
  RunReport& report = out.report;
  report.attack = options.attack;
  report.tree_stats = {truth.leaf_count(), truth.depth(), truth.dimension()};

  if (options.attack == Attack::kBarkBeetle) {
    ExtractionResult result = extract_tree(oracle, config);
    report.ledger = result.ledger;
    report.paths = static_cast<int>(result.state.paths.size());
    report.constraints = static_cast<int>(result.tree.nodes.size());
    out.recovered = to_victim_tree(result.tree, truth.task());
    if (options.equivalence_samples > 0) {
      EquivalenceReport eq = functionally_equivalent(truth, *out.recovered,
                                                     options.equivalence_samples, options.seed);
      report.equivalence = eq;
    }
  } else {
    BaselineResult result = baseline_extract(oracle, config, options.seed);
    report.ledger = result.ledger;
    report.paths = static_cast<int>(result.boxes.size());
    for (const LeafConstraintBox& b : result.boxes) report.constraints += b.constraint_count();
    if (options.equivalence_samples > 0) {
      report.equivalence =
          boxes_equivalent(truth, result.boxes, options.equivalence_samples, options.seed);
    }
    out.boxes = std::move(result.boxes);
  }

  json cfg;
  cfg["attack"] = to_string(options.attack);
  cfg["epsilon"] = options.epsilon;
  cfg["seed"] = options.seed;
  cfg["snap_denominator"] = config.snap_denominator;
  cfg["max_queries"] = options.max_queries;
  cfg["glitch"] = json::parse(options.glitch.to_json());
  report.config_json = cfg.dump();
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

std::vector<SweepRow> run_sweep(const SweepOptions& options) {
  if (options.from > options.to) throw ValidationError("sweep range is empty");
  const int n = options.to - options.from + 1;
  std::vector<SweepRow> rows(n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        const int p = options.from + i;
        GenSpec spec;
        spec.n_features = options.features;
        spec.seed = options.seed;
        if (options.mode == SweepMode::kDepth) {
          spec.depth = p;
          spec.duplicates_per_path = 0;
        } else {
          spec.depth = options.depth;
          spec.duplicates_per_path = p;
        }
        const VictimTree tree = gen_complete(spec);
        AttackOptions attack;
        attack.epsilon = options.epsilon;
        attack.seed = options.seed;
        attack.equivalence_samples = 0;
        const RunReport report = run_attack(tree, attack).report;
        rows[i] = {p, report.ledger.total_queries(), report.ledger.fault_runs};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min(options.workers, n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "parameter,total_queries,fault_runs\n";
  for (const SweepRow& r : rows) {
    out << r.parameter << ',' << r.total_queries << ',' << r.fault_runs << '\n';
  }
  return out.str();
}

}  // namespace barkbeetle
