/**
 * Copyright 2026 The pushcen Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <algorithm>
#include <map>

#include "pushcen/errors.hpp"
#include "pushcen/sim.hpp"

using namespace pushcen;

namespace {

ExperimentConfig small_config(Method method = Method::kPushCen) {
  ExperimentConfig cfg;
  cfg.method = method;
  cfg.data.clients = 8;
  cfg.data.classes = 3;
  cfg.data.features = 6;
  cfg.data.samples_per_client = 40;
  cfg.model.kind = "softmax";
  cfg.topology.fanout = 3;
  cfg.schedule.events = 160;
  cfg.schedule.eval_intervals = 10;
  cfg.schedule.delayed_fraction = 0.25;
  cfg.trainer.clusters = 8;
  cfg.trainer.batch_size = 8;
  cfg.seed = 3;
  return cfg;
}

std::vector<ClientId> all_ids(std::size_t n) {
  std::vector<ClientId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<ClientId>(i);
  return ids;
}

}  // namespace

TEST_CASE("no activations inside the horizon") {
  ExperimentConfig cfg = small_config();
  cfg.schedule.events = 0;
  cfg.schedule.eval_intervals = 60;
  cfg.schedule.delayed_fraction = 0.0;
  const MetricsLog log = run(cfg);
  REQUIRE(log.rows.size() == 60);
  CHECK(log.activations == 0);
  CHECK(log.bytes == 0);
  for (const auto& r : log.rows) {
    CHECK(r.mean_acc == log.rows.front().mean_acc);
    CHECK(r.mean_loss == log.rows.front().mean_loss);
    CHECK(r.cum_bytes == 0);
    CHECK(r.consensus_error <= 1e-28);
  }
}

TEST_CASE("a lone client without peers trains like an independent learner") {
  ExperimentConfig cfg = small_config(Method::kIndependent);
  cfg.data.clients = 1;
  cfg.topology.fanout = 0;
  cfg.schedule.delayed_fraction = 0.0;
  const MetricsLog indep = run(cfg);

  cfg.method = Method::kPushCen;
  cfg.trainer.compress = false;
  cfg.trainer.lambda = 0.0;
  const MetricsLog push = run(cfg);
  CHECK(push.activations == indep.activations);
  CHECK(push.bytes == 0);
  CHECK(push.final_acc == indep.final_acc);
  REQUIRE(push.rows.size() == indep.rows.size());
  for (std::size_t i = 0; i < push.rows.size(); ++i) CHECK(push.rows[i].mean_loss == indep.rows[i].mean_loss);
}

TEST_CASE("runs are reproducible from the seed") {
  for (Method m : {Method::kPushCen, Method::kAsyncDFedAvg, Method::kIndependent}) {
    const ExperimentConfig cfg = small_config(m);
    const MetricsLog a = run(cfg);
    const MetricsLog b = run(cfg);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.staleness == b.staleness);
    CHECK(a.final_client_acc == b.final_client_acc);
  }
  ExperimentConfig other = small_config();
  other.seed = 4;
  CHECK(run(other).to_csv() != run(small_config()).to_csv());
}

TEST_CASE("metrics csv layout") {
  const MetricsLog log = run(small_config());
  const std::string csv = log.to_csv();
  CHECK(csv.rfind("time,mean_acc,mean_loss,E_con,Y_tot_drift,destroyed_mass,cum_bytes,max_staleness\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == log.rows.size() + 1);
  for (std::size_t i = 1; i < log.rows.size(); ++i) {
    CHECK(log.rows[i].time > log.rows[i - 1].time);
    CHECK(log.rows[i].cum_bytes >= log.rows[i - 1].cum_bytes);
  }
}

TEST_CASE("random gossip picks each peer with equal frequency") {
  TopologySpec spec;
  spec.fanout = 10;
  const std::size_t n = 21;
  const Topology topo(spec, n);
  const auto online = all_ids(n);
  Rng rng(12);
  std::map<ClientId, int> hits;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto out = sample_out_neighbors(topo, 4, online, rng);
    REQUIRE(out.size() == 10);
    std::vector<ClientId> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    for (ClientId j : out) ++hits[j];
  }
  CHECK(hits.count(4) == 0);
  for (const auto& [j, h] : hits) {
    CHECK(std::abs(static_cast<double>(h) / draws - 10.0 / 20.0) <= 0.01);
  }
}

TEST_CASE("out-degree is clamped to the online peers") {
  TopologySpec spec;
  spec.fanout = 1;
  const Topology two(spec, 2);
  Rng rng(1);
  const auto ids = all_ids(2);
  CHECK(sample_out_neighbors(two, 0, ids, rng) == std::vector<ClientId>{1});
  const std::vector<ClientId> alone = {0};
  CHECK(sample_out_neighbors(two, 0, alone, rng).empty());

  spec.fanout = 5;
  const Topology six(spec, 6);
  const std::vector<ClientId> online = {0, 2, 5};
  auto out = sample_out_neighbors(six, 2, online, rng);
  std::sort(out.begin(), out.end());
  CHECK(out == std::vector<ClientId>{0, 5});

  spec.fanout = 6;
  CHECK_THROWS_AS(Topology(spec, 6), ConfigError);
}

TEST_CASE("ring and fixed topologies") {
  TopologySpec ring;
  ring.kind = "ring";
  const Topology t(ring, 5);
  Rng rng(0);
  const auto ids = all_ids(5);
  CHECK(sample_out_neighbors(t, 4, ids, rng) == std::vector<ClientId>{0});
  CHECK(sample_out_neighbors(t, 1, ids, rng) == std::vector<ClientId>{2});
  const std::vector<ClientId> without_two = {0, 1, 3, 4};
  CHECK(sample_out_neighbors(t, 1, without_two, rng).empty());

  TopologySpec fixed;
  fixed.kind = "fixed";
  fixed.edges = ring_with_chords(6, {{0, 3}, {0, 4}});
  const Topology f(fixed, 6);
  CHECK(f.fanout() == 3);
  CHECK(f.adjacency()[0] == std::vector<ClientId>{1, 3, 4});

  CHECK(strongly_connected(3, {{0, 1}, {1, 2}, {2, 0}}));
  CHECK(!strongly_connected(3, {{0, 1}, {1, 2}}));
  fixed.edges = {{0, 1}, {1, 2}};
  CHECK_THROWS_AS(Topology(fixed, 3), ConfigError);
  fixed.edges = {{0, 0}};
  CHECK_THROWS_AS(Topology(fixed, 3), ConfigError);
}

TEST_CASE("round robin with instant delivery bounds staleness by N") {
  ExperimentConfig cfg = small_config();
  cfg.schedule.kind = "round_robin";
  cfg.schedule.delay_factor = 0.0;
  cfg.schedule.delayed_fraction = 0.0;
  cfg.schedule.staleness_cap = cfg.data.clients;
  const MetricsLog log = run(cfg);
  REQUIRE(!log.staleness.empty());
  const auto report = staleness_report(log, cfg.data.clients);
  CHECK(report.max <= cfg.data.clients);
  CHECK(log.activations == cfg.schedule.events);
}

TEST_CASE("staleness cap") {
  ExperimentConfig cfg = small_config();
  cfg.schedule.delay_factor = 3.0;
  const MetricsLog log = run(cfg);
  const auto report = staleness_report(log);
  CHECK(report.max > 1);
  std::uint64_t total = 0;
  for (const auto& [s, count] : report.histogram) total += count;
  CHECK(total == log.staleness.size());
  CHECK_THROWS_AS(staleness_report(log, 1), InvariantViolation);

  cfg.schedule.staleness_cap = 1;
  CHECK_THROWS_AS(run(cfg), InvariantViolation);
}

TEST_CASE("delayed clients join late and are never offered messages early") {
  ExperimentConfig cfg = small_config();
  cfg.schedule.delayed_fraction = 0.5;
  const MetricsLog log = run(cfg);
  std::size_t delayed = 0;
  for (std::size_t i = 0; i < cfg.data.clients; ++i) {
    if (log.delayed[i]) {
      ++delayed;
      CHECK(log.join_time[i] > 0.0);
    } else {
      CHECK(log.join_time[i] == 0.0);
    }
  }
  CHECK(delayed == 4);

  TopologySpec spec;
  spec.fanout = 7;
  const Topology topo(spec, 8);
  const std::vector<ClientId> online = {0, 1, 2, 3};
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    for (ClientId j : sample_out_neighbors(topo, 0, online, rng)) CHECK(j < 4);
  }
}

TEST_CASE("push-sum ledger stays balanced") {
  ExperimentConfig cfg = small_config();
  cfg.buffer_limit = 2;
  const MetricsLog log = run(cfg);
  CHECK(log.max_mass_drift <= 1e-10);
  CHECK(log.perturbation_checks == log.broadcasts);
  CHECK(log.perturbation_violations == 0);
  CHECK(log.evictions > 0);
  CHECK(log.rows.back().destroyed_mass > 0.0);
  CHECK(log.min_push_bytes > 0);
  CHECK(log.min_message_bytes == log.max_message_bytes);
}

TEST_CASE("retaining the full-precision model still meets the perturbation bound") {
  ExperimentConfig cfg = small_config();
  cfg.trainer.clusters = 2;
  cfg.trainer.retain_full_precision = true;
  cfg.strict = false;
  const MetricsLog log = run(cfg);
  CHECK(log.perturbation_checks > 0);
  CHECK(log.perturbation_violations == 0);
  CHECK(log.max_eps_c > 1e-3);
}

TEST_CASE("comparator methods") {
  const MetricsLog dfed = run(small_config(Method::kAsyncDFedAvg));
  CHECK(dfed.broadcasts > 0);
  CHECK(dfed.bytes > 0);
  const MetricsLog indep = run(small_config(Method::kIndependent));
  CHECK(indep.bytes == 0);
  CHECK(indep.deliveries == 0);
  CHECK(indep.activations > 0);
  const MetricsLog push = run(small_config());
  CHECK(push.max_message_bytes < dfed.max_message_bytes);
}

TEST_CASE("invalid experiment configurations") {
  ExperimentConfig cfg = small_config();
  cfg.topology.fanout = 8;
  CHECK_THROWS_AS(run(cfg), ConfigError);
  cfg = small_config();
  cfg.schedule.kind = "bursty";
  CHECK_THROWS_AS(run(cfg), ConfigError);
  cfg = small_config();
  cfg.schedule.join_mass = "half";
  CHECK_THROWS_AS(run(cfg), ConfigError);
  cfg = small_config();
  const auto shards = generate(cfg.data);
  cfg.data.clients = 9;
  CHECK_THROWS_AS(run(cfg, shards), ConfigError);
}
