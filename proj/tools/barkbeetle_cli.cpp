// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors
//
// barkbeetle: generate victim trees, run extraction attacks, verify
// recoveries, and sweep tree parameters.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "barkbeetle/errors.hpp"
#include "barkbeetle/pipeline.hpp"
#include "barkbeetle/serialization.hpp"
#include "barkbeetle/treegen.hpp"

namespace bb = barkbeetle;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kInvalid = 2, kUnidentifiable = 3, kStalled = 4, kGlitch = 5 };

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BARKBEETLE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw bb::ValidationError("BARKBEETLE_SEED is not an unsigned integer");
    }
  }
  return 0;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bb::ValidationError("cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bb::ValidationError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json boxes_json(const std::vector<bb::LeafConstraintBox>& boxes) {
  json out = json::array();
  for (const bb::LeafConstraintBox& b : boxes) {
    json intervals = json::array();
    for (const bb::Interval& iv : b.intervals) {
      intervals.push_back({{"low", iv.low ? json(*iv.low) : json(nullptr)},
                           {"high", iv.high ? json(*iv.high) : json(nullptr)}});
    }
    json label = b.label.is_regression() ? json(b.label.value()) : json(b.label.class_id());
    out.push_back({{"label", label}, {"beta", b.beta}, {"intervals", intervals}});
  }
  return out;
}

struct GenArgs {
  int depth = 5;
  int features = 5;
  int dup = 0;
  std::optional<int> leaves;
  std::optional<int> depth_max;
  std::string task = "regression";
  double gap = 0.005;
  std::int64_t denominator = 1000;
  std::optional<std::uint64_t> seed;
  std::string spec_file;
  std::string output;
};

struct ExtractArgs {
  std::string tree;
  double epsilon = 1e-3;
  std::string glitch_mode = "deterministic";
  double glitch_p = 1.0;
  int max_attempts = 64;
  std::optional<std::uint64_t> seed;
  std::string attack = "barkbeetle";
  std::optional<std::int64_t> snap;
  std::uint64_t max_queries = 0;
  std::size_t samples = 10000;
  bool no_timing = false;
  std::string output;
  std::string recovered;
};

struct VerifyArgs {
  std::string truth;
  std::string recovered;
  std::size_t samples = 10000;
  std::optional<std::uint64_t> seed;
};

struct SweepArgs {
  std::string mode = "depth";
  int from = 1;
  int to = 8;
  int features = 14;
  int depth = 8;
  double epsilon = 1e-3;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string output;
};

void run_gen(const GenArgs& a) {
  bb::GenSpec spec;
  if (!a.spec_file.empty()) spec = bb::GenSpec::from_json(read_file(a.spec_file));
  else {
    spec.depth = a.depth;
    spec.n_features = a.features;
    spec.duplicates_per_path = a.dup;
    spec.task = bb::task_from_string(a.task);
    spec.min_threshold_gap = a.gap;
    spec.threshold_denominator = a.denominator;
  }
  if (a.seed || a.spec_file.empty()) spec.seed = resolve_seed(a.seed);
  const bb::VictimTree tree = a.leaves
                                  ? bb::gen_random(*a.leaves, a.depth_max.value_or(spec.depth), spec)
                                  : bb::gen_complete(spec);
  emit(bb::save(tree) + "\n", a.output);
}

void run_extract(const ExtractArgs& a) {
  const bb::VictimTree truth = bb::load_file(a.tree);
  bb::AttackOptions options;
  options.attack = bb::attack_from_string(a.attack);
  options.epsilon = a.epsilon;
  options.seed = resolve_seed(a.seed);
  options.snap_denominator = a.snap;
  options.max_queries = a.max_queries;
  options.equivalence_samples = a.samples;
  if (a.glitch_mode == "deterministic") {
    options.glitch = bb::GlitchModel::deterministic();
  } else if (a.glitch_mode == "probabilistic") {
    options.glitch = bb::GlitchModel::probabilistic(a.glitch_p, options.seed, a.max_attempts);
  } else {
    throw bb::ValidationError("unknown glitch mode '" + a.glitch_mode + "'");
  }
  options.glitch.validate();

  const bb::AttackOutcome out = bb::run_attack(truth, options);
  json report = json::parse(out.report.to_json(!a.no_timing));
  if (options.attack == bb::Attack::kBaseline) report["boxes"] = boxes_json(out.boxes);
  emit(report.dump(2) + "\n", a.output);
  if (!a.recovered.empty() && out.recovered) bb::save_file(*out.recovered, a.recovered);
}

void run_verify(const VerifyArgs& a) {
  const bb::VictimTree truth = bb::load_file(a.truth);
  const bb::VictimTree recovered = bb::load_file(a.recovered);
  const bb::EquivalenceReport r =
      bb::functionally_equivalent(truth, recovered, a.samples, resolve_seed(a.seed));
  json j{{"samples", r.samples},
         {"mismatches", r.mismatches},
         {"max_threshold_gap", r.max_threshold_gap ? json(*r.max_threshold_gap) : json(nullptr)}};
  std::cout << j.dump(2) << "\n";
}

void run_sweep(const SweepArgs& a) {
  bb::SweepOptions options;
  if (a.mode == "depth") options.mode = bb::SweepMode::kDepth;
  else if (a.mode == "dup") options.mode = bb::SweepMode::kDuplicates;
  else throw bb::ValidationError("unknown sweep mode '" + a.mode + "'");
  options.from = a.from;
  options.to = a.to;
  options.features = a.features;
  options.depth = a.depth;
  options.epsilon = a.epsilon;
  options.seed = resolve_seed(a.seed);
  options.workers = a.workers;
  emit(bb::sweep_csv(bb::run_sweep(options)), a.output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fault-injection extraction toolkit for decision trees"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* g = app.add_subcommand("gen", "Generate a victim tree");
  g->add_option("--depth", gen.depth, "Tree depth (complete trees; default depth_max)");
  g->add_option("--features", gen.features, "Number of features");
  g->add_option("--dup", gen.dup, "Duplicated features per path (complete trees)");
  g->add_option("--leaves", gen.leaves, "Leaf count; selects a random tree");
  g->add_option("--depth-max", gen.depth_max, "Depth bound for random trees");
  g->add_option("--task", gen.task, "regression or classification");
  g->add_option("--gap", gen.gap, "Minimum threshold distance to its cell bounds");
  g->add_option("--denominator", gen.denominator, "Thresholds are multiples of 1/denominator");
  g->add_option("--seed", gen.seed, "RNG seed (default: $BARKBEETLE_SEED or 0)");
  g->add_option("--spec", gen.spec_file, "GenSpec JSON file");
  g->add_option("-o,--output", gen.output, "Output tree file (default stdout)");

  ExtractArgs ex;
  CLI::App* e = app.add_subcommand("extract", "Run an attack against a tree");
  e->add_option("--tree", ex.tree, "Victim tree file")->required();
  e->add_option("--epsilon", ex.epsilon, "Search granularity");
  e->add_option("--glitch-mode", ex.glitch_mode, "deterministic or probabilistic");
  e->add_option("--glitch-p", ex.glitch_p, "Glitch success probability");
  e->add_option("--max-attempts", ex.max_attempts, "Glitch attempts per fault run");
  e->add_option("--seed", ex.seed, "RNG seed (default: $BARKBEETLE_SEED or 0)");
  e->add_option("--attack", ex.attack, "barkbeetle or baseline");
  e->add_option("--snap", ex.snap, "Threshold grid denominator (default round(1/epsilon), 0 off)");
  e->add_option("--max-queries", ex.max_queries, "Query budget (0 = unlimited)");
  e->add_option("--samples", ex.samples, "Equivalence samples");
  e->add_flag("--no-timing", ex.no_timing, "Omit wall_time from the report");
  e->add_option("-o,--output", ex.output, "Report file (default stdout)");
  e->add_option("--recovered", ex.recovered, "Write the recovered tree here");

  VerifyArgs ver;
  CLI::App* v = app.add_subcommand("verify", "Compare two trees on random inputs");
  v->add_option("--truth", ver.truth, "Reference tree")->required();
  v->add_option("--recovered", ver.recovered, "Tree under test")->required();
  v->add_option("--samples", ver.samples, "Random inputs");
  v->add_option("--seed", ver.seed, "RNG seed (default: $BARKBEETLE_SEED or 0)");

  SweepArgs sw;
  CLI::App* s = app.add_subcommand("sweep", "Query counts over depth or duplicate count");
  s->add_option("--mode", sw.mode, "depth or dup");
  s->add_option("--from", sw.from, "First parameter value");
  s->add_option("--to", sw.to, "Last parameter value");
  s->add_option("--features", sw.features, "Number of features");
  s->add_option("--depth", sw.depth, "Tree depth for the dup sweep");
  s->add_option("--epsilon", sw.epsilon, "Search granularity");
  s->add_option("--seed", sw.seed, "RNG seed (default: $BARKBEETLE_SEED or 0)");
  s->add_option("--workers", sw.workers, "Parallel rows");
  s->add_option("-o,--output", sw.output, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kInvalid;
  }

  try {
    if (*g) run_gen(gen);
    if (*e) run_extract(ex);
    if (*v) run_verify(ver);
    if (*s) run_sweep(sw);
  } catch (const bb::IdentifiabilityError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUnidentifiable;
  } catch (const bb::GlitchExhaustedError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kGlitch;
  } catch (const bb::ExtractionStalledError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kStalled;
  } catch (const bb::BudgetExceededError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kStalled;
  } catch (const bb::NoThresholdInRangeError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kStalled;
  } catch (const bb::AssemblyError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kStalled;
  } catch (const bb::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInvalid;
  } catch (const bb::ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInvalid;
  } catch (const bb::GenerationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInvalid;
  } catch (const bb::DimensionError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInvalid;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kOther;
  }
  return kOk;
}
