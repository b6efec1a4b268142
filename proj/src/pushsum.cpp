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

#include "pushcen/pushsum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pushcen/errors.hpp"

namespace pushcen {

namespace {

void check_shares(std::span<const DecodedMessage> buffer) {
  for (const auto& m : buffer) {
    if (!(m.share > 0.0) || !std::isfinite(m.share)) {
      throw ProtocolError("nonpositive mass share from sender " + std::to_string(m.sender));
    }
  }
}

}  // namespace

PushSumState aggregate(const PushSumState& state, std::span<const DecodedMessage> buffer) {
  if (buffer.empty()) return state;
  check_shares(buffer);
  double total = state.mass;
  for (const auto& m : buffer) total += m.share;

  PushSumState out = state;
  out.model.scale(state.mass / total);
  for (const auto& m : buffer) out.model.add_scaled(m.share / total, m.model);

  const bool mix_tables = !state.dictionary.layers.empty() &&
                          std::all_of(buffer.begin(), buffer.end(),
                                      [](const DecodedMessage& m) { return !m.tables.layers.empty(); });
  if (mix_tables) {
    auto& dict = out.dictionary.layers;
    for (auto& layer : dict) {
      for (double& v : layer) v *= state.mass / total;
    }
    for (const auto& m : buffer) {
      if (m.tables.num_layers() != dict.size()) throw StructuralError("centroid table layer count mismatch");
      const double weight = m.share / total;
      for (std::size_t l = 0; l < dict.size(); ++l) {
        if (m.tables.layers[l].size() != dict[l].size()) throw StructuralError("centroid table size mismatch");
        for (std::size_t k = 0; k < dict[l].size(); ++k) dict[l][k] += weight * m.tables.layers[l][k];
      }
    }
    for (auto& layer : dict) layer[0] = 0.0;
  }
  out.mass = total;
  return out;
}

PushSumState aggregate_uniform(const PushSumState& state, std::span<const DecodedMessage> buffer) {
  if (buffer.empty()) return state;
  PushSumState out = state;
  const double weight = 1.0 / static_cast<double>(buffer.size() + 1);
  out.model.scale(weight);
  for (const auto& m : buffer) out.model.add_scaled(weight, m.model);
  return out;
}

MassSplit split_mass(PushSumState& state, std::size_t out_degree) {
  if (!(state.mass > 0.0)) throw ProtocolError("cannot split a nonpositive mass");
  const double share = state.mass / static_cast<double>(out_degree + 1);
  state.mass = share;
  return {share, share};
}

SystemLedger::SystemLedger(LayoutPtr layout, double bound_slack) : layout_(std::move(layout)), slack_(bound_slack) {}

SystemLedger::Node& SystemLedger::node(ClientId client) {
  auto it = nodes_.find(client);
  if (it == nodes_.end()) throw InvariantViolation("ledger has no client " + std::to_string(client));
  return it->second;
}

void SystemLedger::on_join(ClientId client, double mass, const ParamVector& model) {
  if (nodes_.count(client) != 0) throw InvariantViolation("client joined twice: " + std::to_string(client));
  nodes_[client] = Node{mass, model};
  injected_ += mass;
}

void SystemLedger::on_aggregate(ClientId client, std::span<const MessageId> consumed, double mass_after,
                                const ParamVector& model_after) {
  Node& n = node(client);
  double mass = n.mass;
  ParamVector numerator = n.model;
  numerator.scale(n.mass);
  for (MessageId id : consumed) {
    auto it = messages_.find(id);
    if (it == messages_.end()) throw InvariantViolation("consumed unknown message " + std::to_string(id));
    mass += it->second.mass;
    numerator.add_scaled(it->second.mass, *it->second.model);
    messages_.erase(it);
  }
  if (std::abs(mass - mass_after) > 1e-12 * mass) {
    ++violations_;
    throw InvariantViolation("aggregation changed mass: ledger " + std::to_string(mass) + " vs state " +
                             std::to_string(mass_after));
  }
  ParamVector protocol = model_after;
  protocol.scale(mass_after);
  const double scale = std::max(1.0, numerator.norm());
  max_agg_mismatch_ = std::max(max_agg_mismatch_, std::sqrt(l2_dist_sq(protocol, numerator)) / scale);
  n.mass = mass_after;
  n.model = model_after;
}

void SystemLedger::on_node_update(ClientId client, const ParamVector& model) { node(client).model = model; }

PerturbationSample SystemLedger::on_broadcast(ClientId sender, double retained_mass,
                                              std::span<const std::pair<MessageId, double>> shares,
                                              std::shared_ptr<const ParamVector> message_model,
                                              const ParamVector& retained_model) {
  Node& n = node(sender);
  ++broadcasts_;
  const double mass_before = n.mass;
  ParamVector before = n.model;
  before.scale(mass_before);

  double mass_after = retained_mass;
  ParamVector after = retained_model;
  after.scale(retained_mass);
  for (const auto& [id, share] : shares) {
    if (messages_.count(id) != 0) throw InvariantViolation("duplicate message id " + std::to_string(id));
    messages_[id] = Share{share, message_model};
    mass_after += share;
    after.add_scaled(share, *message_model);
  }
  n.mass = retained_mass;
  n.model = retained_model;

  PerturbationSample sample;
  sample.out_degree = shares.size();
  sample.measured = std::sqrt(l2_dist_sq(after, before));
  sample.eps_c = shares.empty() ? 0.0 : std::sqrt(l2_dist_sq(*message_model, retained_model));
  const double d = static_cast<double>(shares.size());
  sample.bound = d / (d + 1.0) * mass_before * sample.eps_c;
  const bool mass_ok = std::abs(mass_after - mass_before) <= 1e-12 * mass_before;
  sample.violated = !mass_ok || sample.measured > sample.bound + slack_;
  if (sample.violated) ++violations_;
  return sample;
}

void SystemLedger::on_evict(MessageId id) {
  auto it = messages_.find(id);
  if (it == messages_.end()) throw InvariantViolation("evicted unknown message " + std::to_string(id));
  destroyed_ += it->second.mass;
  messages_.erase(it);
}

double SystemLedger::node_mass(ClientId client) const {
  auto it = nodes_.find(client);
  return it == nodes_.end() ? 0.0 : it->second.mass;
}

double SystemLedger::min_node_mass() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [id, n] : nodes_) m = std::min(m, n.mass);
  return m;
}

double SystemLedger::y_total() const {
  double y = 0.0;
  for (const auto& [id, n] : nodes_) y += n.mass;
  for (const auto& [id, s] : messages_) y += s.mass;
  return y;
}

ParamVector SystemLedger::x_total() const {
  ParamVector x(layout_);
  for (const auto& [id, n] : nodes_) x.add_scaled(n.mass, n.model);
  for (const auto& [id, s] : messages_) x.add_scaled(s.mass, *s.model);
  return x;
}

double SystemLedger::mass_drift() const {
  if (injected_ <= 0.0) return 0.0;
  return std::abs(y_total() + destroyed_ - injected_) / injected_;
}

LedgerReference SystemLedger::reference(std::span<const ClientId> clients) const {
  LedgerReference ref;
  ref.mean = x_total();
  const double y = y_total();
  if (!(y > 0.0)) throw InvariantViolation("total system mass is not positive");
  ref.mean.scale(1.0 / y);
  if (clients.empty()) return ref;
  double sum = 0.0;
  for (ClientId c : clients) {
    auto it = nodes_.find(c);
    if (it == nodes_.end()) throw InvariantViolation("reference over unknown client");
    sum += l2_dist_sq(it->second.model, ref.mean);
  }
  ref.consensus_error = sum / static_cast<double>(clients.size());
  return ref;
}

}  // namespace pushcen
