// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include <doctest.h>

#include "barkbeetle/errors.hpp"
#include "barkbeetle/simulated_oracle.hpp"
#include "support.hpp"

using namespace bbtest;

TEST_CASE("normal queries, fault runs and probes are counted separately") {
  SimulatedOracle o(nested_spine());
  CHECK(o.infer(Input{4.0, 0.0}) == LeafLabel::regression(113));
  CHECK(o.fault_infer(Input{4.0, 0.0}, {2, kLeft}) == LeafLabel::regression(112));
  CHECK(o.probe_path(Input{9.5, 0.0}) == 1);
  const QueryLedger l = o.ledger();
  CHECK(l.normal_queries == 1);
  CHECK(l.fault_runs == 1);
  CHECK(l.glitch_attempts == 1);
  CHECK(l.side_channel_probes == 1);
  CHECK(l.total_queries() == 2);
}

TEST_CASE("a fault beyond the traversal is rejected without consuming an attempt") {
  SimulatedOracle o(nested_spine(), GlitchModel::probabilistic(0.5, 1));
  CHECK_THROWS_AS(o.fault_infer(Input{9.5, 0.0}, {1, kLeft}), FaultOutOfRangeError);
  CHECK(o.ledger().glitch_attempts == 0);
  CHECK(o.ledger().fault_runs == 0);
}

TEST_CASE("deterministic glitches land on the first attempt") {
  SimulatedOracle o(toy_tree());
  for (int i = 0; i < 50; ++i) o.fault_infer(Input{1.0, 1.0, 1.0}, {i % 3, i % 2});
  CHECK(o.ledger().glitch_attempts == o.ledger().fault_runs);
  CHECK(o.ledger().fault_runs == 50);
}

TEST_CASE("probabilistic glitches need about 1/p attempts") {
  SimulatedOracle o(toy_tree(), GlitchModel::probabilistic(0.5, 42));
  for (int i = 0; i < 20000; ++i) o.fault_infer(Input{1.0, 1.0, 1.0}, {1, kRight});
  const double ratio =
      static_cast<double>(o.ledger().glitch_attempts) / static_cast<double>(o.ledger().fault_runs);
  CHECK(ratio > 1.9);
  CHECK(ratio < 2.1);
}

TEST_CASE("200 fault runs at p = 0.5 with a fixed seed") {
  SimulatedOracle o(toy_tree(), GlitchModel::probabilistic(0.5, 7, 1000));
  for (int i = 0; i < 200; ++i) o.fault_infer(Input{1.0, 1.0, 1.0}, {0, kLeft});
  const double ratio =
      static_cast<double>(o.ledger().glitch_attempts) / static_cast<double>(o.ledger().fault_runs);
  CHECK(o.ledger().fault_runs == 200);
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.3);
}

TEST_CASE("failed retries do not change the faulted label") {
  SimulatedOracle det(toy_tree());
  SimulatedOracle prob(toy_tree(), GlitchModel::probabilistic(0.2, 5, 1000));
  for (int pos = 0; pos < 3; ++pos) {
    for (int dir = 0; dir < 2; ++dir) {
      CHECK(det.fault_infer(Input{1.0, 1.0, 1.0}, {pos, dir}) ==
            prob.fault_infer(Input{1.0, 1.0, 1.0}, {pos, dir}));
    }
  }
}

TEST_CASE("glitch exhaustion") {
  SimulatedOracle o(toy_tree(), GlitchModel::probabilistic(1e-9, 1, 3));
  CHECK_THROWS_AS(o.fault_infer(Input{1.0, 1.0, 1.0}, {0, kRight}), GlitchExhaustedError);
  CHECK(o.ledger().glitch_attempts == 3);
  CHECK(o.ledger().fault_runs == 0);
}

TEST_CASE("same seed, same ledger") {
  auto run = [](std::uint64_t seed) {
    SimulatedOracle o(toy_tree(), GlitchModel::probabilistic(0.3, seed, 500));
    for (int i = 0; i < 300; ++i) o.fault_infer(Input{1.0, 1.0, 1.0}, {i % 3, kLeft});
    return o.ledger();
  };
  CHECK(run(9) == run(9));
  CHECK(run(9).glitch_attempts != run(10).glitch_attempts);
}

TEST_CASE("glitch model json and validation") {
  const GlitchModel g = GlitchModel::probabilistic(0.25, 17, 99);
  const GlitchModel back = GlitchModel::from_json(g.to_json());
  CHECK(back.mode == GlitchModel::Mode::kProbabilistic);
  CHECK(back.success_prob == 0.25);
  CHECK(back.max_attempts == 99);
  CHECK(back.seed == 17);
  CHECK_THROWS(GlitchModel::probabilistic(0.0, 1).validate());
  CHECK_THROWS(GlitchModel::probabilistic(1.5, 1).validate());
}

TEST_CASE("observed fault runs report the faulted path length") {
  SimulatedOracle o(nested_spine());
  const Observation ob = o.fault_observe(Input{4.0, 0.0}, {1, kRight});
  CHECK(ob.label == LeafLabel::regression(111));
  CHECK(ob.beta == 2);
  CHECK(o.ledger().fault_runs == 1);
  CHECK(o.ledger().side_channel_probes == 1);
}
