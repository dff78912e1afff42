// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/simulated_oracle.hpp"

#include <json.hpp>

#include "barkbeetle/errors.hpp"

namespace barkbeetle {

GlitchModel GlitchModel::probabilistic(double p, std::uint64_t seed, int max_attempts) {
  GlitchModel model;
  model.mode = Mode::kProbabilistic;
  model.success_prob = p;
  model.max_attempts = max_attempts;
  model.seed = seed;
  model.validate();
  return model;
}

void GlitchModel::validate() const {
  if (max_attempts < 1) throw ValidationError("glitch max_attempts must be >= 1");
  if (mode == Mode::kProbabilistic && !(success_prob > 0.0 && success_prob <= 1.0)) {
    throw ValidationError("glitch success_prob must lie in (0, 1]");
  }
}

GlitchModel GlitchModel::from_json(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("glitch", e.what());
  }
  GlitchModel model;
  const std::string mode = doc.value("mode", std::string("deterministic"));
  if (mode == "deterministic") {
    model.mode = Mode::kDeterministic;
  } else if (mode == "probabilistic") {
    model.mode = Mode::kProbabilistic;
  } else {
    throw ParseError("glitch.mode", "expected \"deterministic\" or \"probabilistic\"");
  }
  try {
    model.success_prob = doc.value("success_prob", 1.0);
    model.max_attempts = doc.value("max_attempts", 64);
    model.seed = doc.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::type_error& e) {
    throw ParseError("glitch", e.what());
  }
  model.validate();
  return model;
}

std::string GlitchModel::to_json() const {
  nlohmann::json doc{
      {"mode", mode == Mode::kDeterministic ? "deterministic" : "probabilistic"},
      {"success_prob", mode == Mode::kDeterministic ? 1.0 : success_prob},
      {"max_attempts", max_attempts},
      {"seed", seed}};
  return doc.dump();
}

SimulatedOracle::SimulatedOracle(VictimTree tree, GlitchModel glitch)
    : tree_(std::move(tree)), glitch_(glitch), rng_(glitch.seed) {
  glitch_.validate();
}

LeafLabel SimulatedOracle::infer(std::span<const double> x) {
  LeafLabel label = barkbeetle::infer(tree_, x);
  ++ledger_.normal_queries;
  return label;
}

TracedPath SimulatedOracle::glitch(std::span<const double> x, FaultSpec fault) {
  if (fault.node_index < 0) throw FaultOutOfRangeError("negative fault position");
  if (fault.force_direction != kLeft && fault.force_direction != kRight) {
    throw FaultOutOfRangeError("fault direction must be 0 or 1");
  }
  const TracedPath faulted = trace(tree_, x, BranchOverride{fault.node_index, fault.force_direction});

  if (glitch_.mode == GlitchModel::Mode::kDeterministic) {
    ++ledger_.glitch_attempts;
    ++ledger_.fault_runs;
    return faulted;
  }
  std::bernoulli_distribution lands(glitch_.success_prob);
  for (int attempt = 0; attempt < glitch_.max_attempts; ++attempt) {
    ++ledger_.glitch_attempts;
    if (lands(rng_)) {
      ++ledger_.fault_runs;
      return faulted;
    }
  }
  throw GlitchExhaustedError("glitch did not land within " +
                             std::to_string(glitch_.max_attempts) + " attempts");
}

LeafLabel SimulatedOracle::fault_infer(std::span<const double> x, FaultSpec fault) {
  return glitch(x, fault).label;
}

Observation SimulatedOracle::fault_observe(std::span<const double> x, FaultSpec fault) {
  const TracedPath p = glitch(x, fault);
  ++ledger_.side_channel_probes;
  return {p.label, p.beta()};
}

int SimulatedOracle::probe_path(std::span<const double> x) {
  const int beta = trace(tree_, x).beta();
  ++ledger_.side_channel_probes;
  return beta;
}

}  // namespace barkbeetle
