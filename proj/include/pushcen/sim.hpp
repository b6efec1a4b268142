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

#ifndef PUSHCEN_SIM_HPP
#define PUSHCEN_SIM_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pushcen/config.hpp"
#include "pushcen/data.hpp"
#include "pushcen/pushsum.hpp"
#include "pushcen/rng.hpp"

namespace pushcen {

// Directed communication graph. "random" resamples `fanout` online peers per
// push; "ring" sends to the successor; "fixed" uses an explicit edge list.
class Topology {
 public:
  Topology(const TopologySpec& spec, std::size_t clients);

  const std::string& kind() const { return kind_; }
  std::size_t fanout() const { return fanout_; }
  const std::vector<std::vector<ClientId>>& adjacency() const { return out_; }

 private:
  friend std::vector<ClientId> sample_out_neighbors(const Topology&, ClientId, std::span<const ClientId>, Rng&);
  std::string kind_;
  std::size_t fanout_;
  std::vector<std::vector<ClientId>> out_;
};

bool strongly_connected(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

// Ring i -> i+1 plus the given chords.
std::vector<std::pair<std::uint32_t, std::uint32_t>> ring_with_chords(
    std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& chords);

// Out-neighbors of `client` for one push, restricted to the sorted `online`
// set. For random gossip: min(fanout, |online|-1) distinct peers without
// replacement.
std::vector<ClientId> sample_out_neighbors(const Topology& topology, ClientId client, std::span<const ClientId> online,
                                           Rng& rng);

// How a client folds its drained buffer into its state.
class AggregationStrategy {
 public:
  virtual ~AggregationStrategy() = default;
  virtual PushSumState apply(const PushSumState& state, std::span<const DecodedMessage> buffer) const = 0;
  virtual bool tracks_mass() const = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<AggregationStrategy> make_strategy(Method method);

struct MetricsRow {
  double time = 0.0;
  double mean_acc = 0.0;
  double mean_loss = 0.0;
  double consensus_error = 0.0;
  double y_drift = 0.0;
  double destroyed_mass = 0.0;
  std::uint64_t cum_bytes = 0;
  std::uint64_t max_staleness = 0;
};

struct StalenessReport {
  std::uint64_t max = 0;
  double mean = 0.0;
  std::map<std::uint64_t, std::uint64_t> histogram;
};

struct MetricsLog {
  std::vector<MetricsRow> rows;
  std::vector<std::uint64_t> staleness;

  std::vector<bool> delayed;
  std::vector<double> join_time;
  std::vector<double> running_max_acc;  // per client, over ticks while online
  std::vector<double> final_client_acc;
  double final_acc = 0.0;
  double final_acc_sd = 0.0;

  std::uint64_t activations = 0;
  std::uint64_t broadcasts = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t evictions = 0;
  std::uint64_t bytes = 0;
  std::uint64_t min_push_bytes = 0;  // per push = one payload x out-degree
  std::uint64_t max_push_bytes = 0;
  std::uint64_t min_message_bytes = 0;
  std::uint64_t max_message_bytes = 0;

  // Ledger and lemma checks.
  double max_mass_drift = 0.0;
  double min_node_mass = 0.0;
  double min_mass_share = 0.0;  // min over activations of s_i / Y_tot
  std::size_t perturbation_checks = 0;
  std::size_t perturbation_violations = 0;
  double max_perturbation = 0.0;
  double max_eps_c = 0.0;
  double max_aggregation_mismatch = 0.0;
  double max_reference_shift = 0.0;  // max ||wbar_t - wbar_0|| / ||wbar_0|| over ticks
  std::size_t lemma_steps = 0;
  std::size_t lemma_violations = 0;
  std::vector<double> consensus_trace;  // E_con after every activation when tracing

  std::string to_csv() const;
};

struct RunOptions {
  // Record E_con after every activation (costly; used by contraction tests).
  bool trace_consensus = false;
  // Give every client its own initial model instead of a shared one.
  bool distinct_init = false;
};

MetricsLog run(const ExperimentConfig& cfg, const RunOptions& options = {});
MetricsLog run(const ExperimentConfig& cfg, const std::vector<ClientShard>& shards, const RunOptions& options = {});

StalenessReport staleness_report(const MetricsLog& log, std::uint64_t cap = 0);

nlohmann::json run_manifest(const ExperimentConfig& cfg);

}  // namespace pushcen

#endif  // PUSHCEN_SIM_HPP
