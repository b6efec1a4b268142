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

#ifndef PUSHCEN_PUSHSUM_HPP
#define PUSHCEN_PUSHSUM_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "pushcen/params.hpp"
#include "pushcen/wcp.hpp"

namespace pushcen {

using ClientId = std::uint32_t;
using MessageId = std::uint64_t;

struct PushSumState {
  double mass = 1.0;
  ParamVector model;
  CentroidTable dictionary;
  PruneMask mask;
};

// A buffered message after implicit reconstruction at the receiver.
struct DecodedMessage {
  ParamVector model;
  CentroidTable tables;  // empty for dense (uncompressed) messages
  double share = 0.0;
  ClientId sender = 0;
};

// Mass-weighted push-sum aggregation:
//   S = s + sum(sigma_j),  w <- (s/S) w + sum (sigma_j/S) w_j,
// with the same convex weights applied slot-by-slot to the centroid
// dictionary. Returns the state unchanged for an empty buffer.
PushSumState aggregate(const PushSumState& state, std::span<const DecodedMessage> buffer);

// Unweighted neighbor averaging used by the Async-DFedAvg comparator. Mass is
// left untouched.
PushSumState aggregate_uniform(const PushSumState& state, std::span<const DecodedMessage> buffer);

struct MassSplit {
  double retained = 0.0;
  double share = 0.0;
};

// s <- s/(d+1); every out-neighbor receives the same share.
MassSplit split_mass(PushSumState& state, std::size_t out_degree);

struct PerturbationSample {
  double measured = 0.0;  // ||X_tot after - X_tot before||
  double bound = 0.0;     // (d/(d+1)) * y * eps_c
  double eps_c = 0.0;     // ||message model - retained model||
  std::size_t out_degree = 0;
  bool violated = false;
};

struct LedgerReference {
  ParamVector mean;  // X_tot / Y_tot
  double consensus_error = 0.0;
};

// Global accounting of node masses/numerators and in-flight message shares.
// No client could hold this; the simulator feeds it so that mass
// conservation and the compression perturbation of the numerator can be
// measured event by event.
class SystemLedger {
 public:
  explicit SystemLedger(LayoutPtr layout, double bound_slack = 1e-9);

  void on_join(ClientId client, double mass, const ParamVector& model);

  // Moves the shares of `consumed` into the client and checks that the
  // protocol's post-aggregation (mass, model) matches the moved totals.
  void on_aggregate(ClientId client, std::span<const MessageId> consumed, double mass_after,
                    const ParamVector& model_after);

  // Local model changed without any mass movement (training, re-encoding).
  void on_node_update(ClientId client, const ParamVector& model);

  PerturbationSample on_broadcast(ClientId sender, double retained_mass,
                                  std::span<const std::pair<MessageId, double>> shares,
                                  std::shared_ptr<const ParamVector> message_model,
                                  const ParamVector& retained_model);

  // A buffered share discarded by sender deduplication or overflow.
  void on_evict(MessageId id);

  double node_mass(ClientId client) const;
  double min_node_mass() const;
  double y_total() const;
  ParamVector x_total() const;
  double injected_mass() const { return injected_; }
  double destroyed_mass() const { return destroyed_; }
  // |Y_tot + destroyed - injected| / injected
  double mass_drift() const;

  LedgerReference reference(std::span<const ClientId> clients) const;

  std::size_t in_flight() const { return messages_.size(); }
  std::size_t violations() const { return violations_; }
  std::size_t broadcasts() const { return broadcasts_; }
  double max_aggregation_mismatch() const { return max_agg_mismatch_; }

 private:
  struct Node {
    double mass = 0.0;
    ParamVector model;
  };
  struct Share {
    double mass = 0.0;
    std::shared_ptr<const ParamVector> model;
  };

  Node& node(ClientId client);

  LayoutPtr layout_;
  double slack_;
  std::map<ClientId, Node> nodes_;
  std::map<MessageId, Share> messages_;
  double injected_ = 0.0;
  double destroyed_ = 0.0;
  std::size_t violations_ = 0;
  std::size_t broadcasts_ = 0;
  double max_agg_mismatch_ = 0.0;
};

}  // namespace pushcen

#endif  // PUSHCEN_PUSHSUM_HPP
