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

#include "pushcen/sim.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "pushcen/buffer.hpp"
#include "pushcen/errors.hpp"
#include "pushcen/model.hpp"
#include "pushcen/trainer.hpp"
#include "pushcen/wcp.hpp"

namespace pushcen {

Topology::Topology(const TopologySpec& spec, std::size_t clients)
    : kind_(spec.kind), fanout_(spec.fanout), out_(clients) {
  if (kind_ == "random") {
    if (clients > 0 && fanout_ > clients - 1) throw ConfigError("fanout exceeds N-1");
  } else if (kind_ == "ring") {
    fanout_ = clients > 1 ? 1 : 0;
    for (std::size_t i = 0; clients > 1 && i < clients; ++i) {
      out_[i].push_back(static_cast<ClientId>((i + 1) % clients));
    }
  } else if (kind_ == "fixed") {
    for (const auto& [a, b] : spec.edges) {
      if (a >= clients || b >= clients || a == b) throw ConfigError("bad edge in fixed topology");
      out_[a].push_back(b);
    }
    for (auto& adj : out_) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    if (!strongly_connected(clients, spec.edges)) throw ConfigError("fixed topology is not strongly connected");
    fanout_ = 0;
    for (const auto& adj : out_) fanout_ = std::max(fanout_, adj.size());
  } else {
    throw ConfigError("unknown topology kind '" + kind_ + "'");
  }
}

bool strongly_connected(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  if (n <= 1) return true;
  auto reach = [&](bool forward) {
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (const auto& [a, b] : edges) {
      if (a >= n || b >= n) return false;
      if (forward) {
        adj[a].push_back(b);
      } else {
        adj[b].push_back(a);
      }
    }
    std::vector<bool> seen(n, false);
    std::vector<std::uint32_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto u : adj[v]) {
        if (!seen[u]) {
          seen[u] = true;
          ++count;
          stack.push_back(u);
        }
      }
    }
    return count == n;
  };
  return reach(true) && reach(false);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> ring_with_chords(
    std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& chords) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>((i + 1) % n));
  }
  edges.insert(edges.end(), chords.begin(), chords.end());
  return edges;
}

std::vector<ClientId> sample_out_neighbors(const Topology& topology, ClientId client, std::span<const ClientId> online,
                                           Rng& rng) {
  std::vector<ClientId> out;
  if (topology.kind_ == "random") {
    if (topology.fanout_ == 0) return out;
    std::vector<ClientId> candidates;
    candidates.reserve(online.size());
    for (ClientId c : online) {
      if (c != client) candidates.push_back(c);
    }
    if (candidates.size() <= topology.fanout_) return candidates;
    std::sample(candidates.begin(), candidates.end(), std::back_inserter(out), topology.fanout_, rng);
    return out;
  }
  for (ClientId c : topology.out_.at(client)) {
    if (std::binary_search(online.begin(), online.end(), c)) out.push_back(c);
  }
  return out;
}

namespace {

class PushSumAggregation final : public AggregationStrategy {
 public:
  PushSumState apply(const PushSumState& s, std::span<const DecodedMessage> b) const override { return aggregate(s, b); }
  bool tracks_mass() const override { return true; }
  std::string name() const override { return "push-sum"; }
};

class UniformAggregation final : public AggregationStrategy {
 public:
  PushSumState apply(const PushSumState& s, std::span<const DecodedMessage> b) const override {
    return aggregate_uniform(s, b);
  }
  bool tracks_mass() const override { return false; }
  std::string name() const override { return "uniform"; }
};

class NoAggregation final : public AggregationStrategy {
 public:
  PushSumState apply(const PushSumState& s, std::span<const DecodedMessage>) const override { return s; }
  bool tracks_mass() const override { return false; }
  std::string name() const override { return "none"; }
};

}  // namespace

std::unique_ptr<AggregationStrategy> make_strategy(Method method) {
  switch (method) {
    case Method::kPushCen:
      return std::make_unique<PushSumAggregation>();
    case Method::kAsyncDFedAvg:
      return std::make_unique<UniformAggregation>();
    case Method::kIndependent:
      return std::make_unique<NoAggregation>();
  }
  throw ConfigError("unknown method");
}

namespace {

enum class EventKind : int { kJoin = 0, kDelivery = 1, kActivation = 2, kEval = 3 };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kActivation;
  std::uint64_t seq = 0;
  ClientId client = 0;
  std::size_t index = 0;
  BufferedMessage msg;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct Client {
  bool online = false;
  bool delayed = false;
  double join_time = 0.0;
  double rate = 1.0;
  PushSumState state;
  MessageBuffer buffer;
  Rng schedule_rng;
  Rng delay_rng;
  Rng neighbor_rng;
};

class Simulator {
 public:
  Simulator(const ExperimentConfig& cfg, const std::vector<ClientShard>& shards, const RunOptions& options)
      : cfg_(cfg),
        shards_(shards),
        options_(options),
        model_(make_model(cfg.model, cfg.data.features, cfg.data.classes)),
        strategy_(make_strategy(cfg.method)),
        topology_(cfg.topology, cfg.data.clients),
        ledger_(model_->layout()) {
    if (shards_.size() != cfg.data.clients) throw ConfigError("shard count does not match client count");
  }

  MetricsLog run();

 private:
  void push(Event e) {
    e.seq = next_seq_++;
    queue_.push(std::move(e));
  }
  double next_interval(Client& c);
  void schedule_first_activation(ClientId id, double join);
  void join(ClientId id, double time);
  void activate(ClientId id, double time);
  void deliver(Event& e);
  void evaluate(std::size_t index, double time);
  void check_mass();
  std::vector<ClientId> online_clients() const;
  [[noreturn]] void fail(const std::string& what) const;

  const ExperimentConfig& cfg_;
  const std::vector<ClientShard>& shards_;
  RunOptions options_;
  std::unique_ptr<Model> model_;
  std::unique_ptr<AggregationStrategy> strategy_;
  Topology topology_;
  SystemLedger ledger_;
  ParamVector initial_model_;
  std::vector<Client> clients_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_message_ = 0;
  double horizon_ = 0.0;
  double now_ = 0.0;
  ParamVector reference0_;
  bool have_reference0_ = false;
  MetricsLog log_;
};

void Simulator::fail(const std::string& what) const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), " [t=%.6f, activation %" PRIu64 ", seed %" PRIu64 "]", now_, log_.activations,
                cfg_.seed);
  throw InvariantViolation(what + buf);
}

double Simulator::next_interval(Client& c) {
  if (cfg_.schedule.kind == "round_robin") return static_cast<double>(clients_.size());
  std::exponential_distribution<double> exp(c.rate);
  return exp(c.schedule_rng);
}

void Simulator::schedule_first_activation(ClientId id, double join) {
  Client& c = clients_[id];
  double t = 0.0;
  if (cfg_.schedule.kind == "round_robin") {
    const double n = static_cast<double>(clients_.size());
    t = static_cast<double>(id) + 1.0;
    if (join > 0.0) t += n * std::ceil(std::max(0.0, join - t) / n);
    if (t <= join) t += n;
  } else {
    t = join + next_interval(c);
  }
  Event e;
  e.time = t;
  e.kind = EventKind::kActivation;
  e.client = id;
  push(std::move(e));
}

void Simulator::join(ClientId id, double time) {
  Client& c = clients_[id];
  double mass = 1.0;
  if (cfg_.schedule.join_mass == "mean" && strategy_->tracks_mass()) {
    std::size_t online = 0;
    for (const auto& other : clients_) online += other.online ? 1 : 0;
    if (online > 0) mass = ledger_.y_total() / static_cast<double>(online);
  }
  c.online = true;
  c.state.mass = mass;
  if (options_.distinct_init) {
    Rng rng = make_rng(cfg_.seed, {stream::kInit, std::uint64_t{id} + 1});
    c.state.model = model_->initial(rng);
  } else {
    c.state.model = initial_model_;
  }
  c.state.mask = PruneMask(model_->layout(), true);
  if (cfg_.trainer.compress) {
    c.state.dictionary = CentroidTable::zeros(model_->layout()->num_compressible(), cfg_.trainer.clusters);
  }
  ledger_.on_join(id, c.state.mass, c.state.model);
  schedule_first_activation(id, time);
}

std::vector<ClientId> Simulator::online_clients() const {
  std::vector<ClientId> out;
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    if (clients_[i].online) out.push_back(static_cast<ClientId>(i));
  }
  return out;
}

void Simulator::check_mass() {
  if (!strategy_->tracks_mass()) return;
  const double drift = ledger_.mass_drift();
  log_.max_mass_drift = std::max(log_.max_mass_drift, drift);
  if (cfg_.strict && drift > 1e-10) fail("total mass drifted by " + std::to_string(drift));
}

void Simulator::activate(ClientId id, double time) {
  Client& c = clients_[id];
  const std::uint64_t event = ++log_.activations;
  const std::string context = "client " + std::to_string(id) + ", activation " + std::to_string(event);

  // Aggregate the buffer.
  auto drained = c.buffer.drain();
  std::vector<DecodedMessage> decoded;
  std::vector<MessageId> consumed;
  decoded.reserve(drained.size());
  for (auto& m : drained) {
    const std::uint64_t stale = event - m.gen_event;
    log_.staleness.push_back(stale);
    if (cfg_.schedule.staleness_cap > 0 && stale > cfg_.schedule.staleness_cap) {
      fail("staleness " + std::to_string(stale) + " exceeds cap " + std::to_string(cfg_.schedule.staleness_cap));
    }
    DecodedMessage d;
    d.model = wcp_decode(*m.payload, model_->layout());
    if (!m.payload->dense) d.tables = m.payload->tables;
    d.share = m.share;
    d.sender = m.sender;
    decoded.push_back(std::move(d));
    consumed.push_back(m.id);
  }
  c.state = strategy_->apply(c.state, decoded);
  if (strategy_->tracks_mass() && !drained.empty()) {
    ledger_.on_aggregate(id, consumed, c.state.mass, c.state.model);
  }

  // Local update and the payload to send.
  CentroidPayload payload;
  const std::uint64_t seed = derive_seed(cfg_.seed, {stream::kTraining, id, event});
  if (cfg_.trainer.enabled) {
    LocalUpdateResult res = local_update(c.state, *model_, shards_[id].train, cfg_.trainer, seed, context);
    log_.lemma_steps += res.trace.steps;
    log_.lemma_violations += res.trace.contraction_violations + (res.trace.drift_ok ? 0 : 1);
    c.state.model = std::move(res.model);
    c.state.mask = std::move(res.mask);
    if (res.encoding) payload = std::move(res.encoding->payload);
  } else if (cfg_.trainer.compress) {
    const WcpOptions opts{cfg_.trainer.clusters, cfg_.trainer.lloyd_iters, cfg_.trainer.value_bits};
    const CentroidTable* warm = c.state.dictionary.layers.empty() ? nullptr : &c.state.dictionary;
    EncodeResult enc = wcp_encode(c.state.model, opts, warm, derive_seed(seed, {2}));
    if (!cfg_.trainer.retain_full_precision) c.state.model = enc.quantized;
    c.state.mask = enc.mask;
    payload = std::move(enc.payload);
  }
  if (!cfg_.trainer.compress) payload = dense_payload(c.state.model, cfg_.trainer.value_bits);
  if (strategy_->tracks_mass()) ledger_.on_node_update(id, c.state.model);

  // Split mass and push.
  const auto online = online_clients();
  const auto neighbors = sample_out_neighbors(topology_, id, online, c.neighbor_rng);
  if (!neighbors.empty()) {
    // Uniform averaging ignores mass; its messages carry a unit placeholder.
    const MassSplit split = strategy_->tracks_mass() ? split_mass(c.state, neighbors.size()) : MassSplit{c.state.mass, 1.0};
    const auto bytes = serialize(payload, split.share, id, event);
    WireMessage wire = deserialize(bytes);
    if (!(wire.payload == payload)) fail("wire round trip altered the payload");
    auto shared = std::make_shared<const CentroidPayload>(std::move(wire.payload));

    const std::uint64_t msg_bytes = bytes.size();
    const std::uint64_t push_bytes = msg_bytes * neighbors.size();
    log_.bytes += push_bytes;
    ++log_.broadcasts;
    if (log_.broadcasts == 1) {
      log_.min_push_bytes = log_.max_push_bytes = push_bytes;
      log_.min_message_bytes = log_.max_message_bytes = msg_bytes;
    }
    log_.min_push_bytes = std::min(log_.min_push_bytes, push_bytes);
    log_.max_push_bytes = std::max(log_.max_push_bytes, push_bytes);
    log_.min_message_bytes = std::min(log_.min_message_bytes, msg_bytes);
    log_.max_message_bytes = std::max(log_.max_message_bytes, msg_bytes);

    std::vector<std::pair<MessageId, double>> shares;
    const double mean_delay = cfg_.schedule.delay_factor / cfg_.schedule.base_rate;
    for (ClientId dest : neighbors) {
      Event e;
      e.kind = EventKind::kDelivery;
      e.client = dest;
      e.msg.id = next_message_++;
      e.msg.sender = id;
      e.msg.share = split.share;
      e.msg.gen_event = event;
      e.msg.payload = shared;
      double delay = 0.0;
      if (mean_delay > 0.0) {
        std::exponential_distribution<double> exp(1.0 / mean_delay);
        delay = exp(c.delay_rng);
      }
      e.time = time + delay;
      shares.emplace_back(e.msg.id, split.share);
      push(std::move(e));
    }
    if (strategy_->tracks_mass()) {
      auto message_model = std::make_shared<const ParamVector>(wcp_decode(*shared, model_->layout()));
      const PerturbationSample s = ledger_.on_broadcast(id, split.retained, shares, message_model, c.state.model);
      ++log_.perturbation_checks;
      log_.max_perturbation = std::max(log_.max_perturbation, s.measured);
      log_.max_eps_c = std::max(log_.max_eps_c, s.eps_c);
      if (s.violated) {
        ++log_.perturbation_violations;
        if (cfg_.strict) {
          fail("numerator perturbation " + std::to_string(s.measured) + " exceeds bound " + std::to_string(s.bound));
        }
      }
    }
  }
  if (strategy_->tracks_mass()) {
    // The protocol is invariant to a common rescaling of all masses, so the
    // floor applies to the node's share of the live system mass.
    const double live = ledger_.y_total();
    const double share = live > 0.0 ? c.state.mass / live : 0.0;
    log_.min_node_mass = std::min(log_.min_node_mass, c.state.mass);
    log_.min_mass_share = std::min(log_.min_mass_share, share);
    if (cfg_.strict && share < 1e-12) fail("push-sum mass share fell below 1e-12: " + std::to_string(share));
    check_mass();
    if (options_.trace_consensus) {
      const auto ids = online_clients();
      log_.consensus_trace.push_back(ledger_.reference(ids).consensus_error);
    }
  }

  Event next;
  next.time = time + next_interval(c);
  next.kind = EventKind::kActivation;
  next.client = id;
  push(std::move(next));
}

void Simulator::deliver(Event& e) {
  Client& c = clients_[e.client];
  if (!c.online) fail("delivery to offline client " + std::to_string(e.client));
  ++log_.deliveries;
  e.msg.arrival_event = log_.activations;
  auto evicted = c.buffer.insert(std::move(e.msg));
  for (const auto& m : evicted) {
    ++log_.evictions;
    if (strategy_->tracks_mass()) ledger_.on_evict(m.id);
  }
  check_mass();
}

void Simulator::evaluate(std::size_t index, double time) {
  (void)index;
  MetricsRow row;
  row.time = time;
  const auto online = online_clients();
  double acc = 0.0;
  double loss = 0.0;
  for (ClientId id : online) {
    const EvalResult r = local_eval(*model_, clients_[id].state.model, shards_[id].test);
    acc += r.accuracy;
    loss += r.loss;
    log_.running_max_acc[id] = std::max(log_.running_max_acc[id], r.accuracy);
    log_.final_client_acc[id] = r.accuracy;
  }
  if (!online.empty()) {
    row.mean_acc = acc / static_cast<double>(online.size());
    row.mean_loss = loss / static_cast<double>(online.size());
  }
  if (strategy_->tracks_mass()) {
    const LedgerReference ref = ledger_.reference(online);
    row.consensus_error = ref.consensus_error;
    row.y_drift = ledger_.mass_drift();
    row.destroyed_mass = ledger_.destroyed_mass();
    if (have_reference0_) {
      const double base = std::max(reference0_.norm(), 1e-300);
      log_.max_reference_shift = std::max(log_.max_reference_shift, std::sqrt(l2_dist_sq(ref.mean, reference0_)) / base);
    }
  } else if (!online.empty()) {
    ParamVector mean(model_->layout());
    for (ClientId id : online) mean.add_scaled(1.0 / static_cast<double>(online.size()), clients_[id].state.model);
    double e = 0.0;
    for (ClientId id : online) e += l2_dist_sq(clients_[id].state.model, mean);
    row.consensus_error = e / static_cast<double>(online.size());
  }
  row.cum_bytes = log_.bytes;
  row.max_staleness = log_.staleness.empty() ? 0 : *std::max_element(log_.staleness.begin(), log_.staleness.end());
  log_.rows.push_back(row);

  double sum = 0.0;
  double sq = 0.0;
  for (ClientId id : online) {
    sum += log_.final_client_acc[id];
    sq += log_.final_client_acc[id] * log_.final_client_acc[id];
  }
  if (!online.empty()) {
    const double n = static_cast<double>(online.size());
    log_.final_acc = sum / n;
    log_.final_acc_sd = std::sqrt(std::max(0.0, sq / n - log_.final_acc * log_.final_acc));
  }
}

MetricsLog Simulator::run() {
  const std::size_t n = cfg_.data.clients;
  const auto& sched = cfg_.schedule;
  clients_.resize(n);
  log_.delayed.assign(n, false);
  log_.join_time.assign(n, 0.0);
  log_.running_max_acc.assign(n, 0.0);
  log_.final_client_acc.assign(n, 0.0);
  log_.min_node_mass = std::numeric_limits<double>::infinity();
  log_.min_mass_share = std::numeric_limits<double>::infinity();

  Rng init_rng = make_rng(cfg_.seed, {stream::kInit});
  initial_model_ = model_->initial(init_rng);

  double total_rate = 0.0;
  const double log_spread = std::log(sched.rate_spread);
  for (std::size_t i = 0; i < n; ++i) {
    Client& c = clients_[i];
    c.schedule_rng = make_rng(cfg_.seed, {stream::kSchedule, i});
    c.delay_rng = make_rng(cfg_.seed, {stream::kDelay, i});
    c.neighbor_rng = make_rng(cfg_.seed, {stream::kNeighbors, i});
    c.buffer = MessageBuffer(cfg_.buffer_limit, cfg_.dedup);
    if (sched.kind == "poisson" && log_spread > 0.0) {
      std::uniform_real_distribution<double> u(-log_spread, log_spread);
      c.rate = sched.base_rate * std::exp(u(c.schedule_rng));
    } else {
      c.rate = sched.base_rate;
    }
    total_rate += c.rate;
  }
  horizon_ = sched.kind == "round_robin" ? static_cast<double>(sched.events)
                                          : static_cast<double>(sched.events) / total_rate;

  // Delayed clients and their join times do not depend on the method.
  Rng delayed_rng = make_rng(cfg_.seed, {stream::kDelayed});
  std::size_t delayed_count = static_cast<std::size_t>(std::llround(sched.delayed_fraction * static_cast<double>(n)));
  delayed_count = std::min(delayed_count, n > 0 ? n - 1 : 0);
  std::vector<ClientId> ids(n);
  std::iota(ids.begin(), ids.end(), ClientId{0});
  std::vector<ClientId> delayed;
  std::sample(ids.begin(), ids.end(), std::back_inserter(delayed), delayed_count, delayed_rng);
  std::uniform_real_distribution<double> join_u(0.0, sched.join_window * horizon_);
  for (ClientId id : delayed) {
    clients_[id].delayed = true;
    log_.delayed[id] = true;
    log_.join_time[id] = horizon_ > 0.0 ? join_u(delayed_rng) : 0.0;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (clients_[i].delayed) {
      Event e;
      e.time = log_.join_time[i];
      e.kind = EventKind::kJoin;
      e.client = static_cast<ClientId>(i);
      push(std::move(e));
    } else {
      join(static_cast<ClientId>(i), 0.0);
    }
  }
  if (strategy_->tracks_mass() && options_.trace_consensus) {
    log_.consensus_trace.push_back(ledger_.reference(online_clients()).consensus_error);
  }
  if (strategy_->tracks_mass()) {
    reference0_ = ledger_.reference({}).mean;
    have_reference0_ = true;
  }
  for (std::size_t k = 1; k <= sched.eval_intervals; ++k) {
    Event e;
    e.time = horizon_ * static_cast<double>(k) / static_cast<double>(sched.eval_intervals);
    e.kind = EventKind::kEval;
    e.index = k;
    push(std::move(e));
  }

  while (!queue_.empty()) {
    Event e = queue_.top();
    queue_.pop();
    if (e.time > horizon_) break;
    now_ = e.time;
    switch (e.kind) {
      case EventKind::kJoin:
        join(e.client, e.time);
        break;
      case EventKind::kDelivery:
        deliver(e);
        break;
      case EventKind::kActivation:
        activate(e.client, e.time);
        break;
      case EventKind::kEval:
        evaluate(e.index, e.time);
        break;
    }
  }
  if (strategy_->tracks_mass()) {
    log_.perturbation_violations = std::max(log_.perturbation_violations, ledger_.violations());
    log_.max_aggregation_mismatch = ledger_.max_aggregation_mismatch();
  }
  if (!std::isfinite(log_.min_node_mass)) log_.min_node_mass = 0.0;
  if (!std::isfinite(log_.min_mass_share)) log_.min_mass_share = 0.0;
  return std::move(log_);
}

}  // namespace

std::string MetricsLog::to_csv() const {
  std::string out = "time,mean_acc,mean_loss,E_con,Y_tot_drift,destroyed_mass,cum_bytes,max_staleness\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%" PRIu64 ",%" PRIu64 "\n", r.time,
                  r.mean_acc, r.mean_loss, r.consensus_error, r.y_drift, r.destroyed_mass, r.cum_bytes,
                  r.max_staleness);
    out += buf;
  }
  return out;
}

MetricsLog run(const ExperimentConfig& cfg, const std::vector<ClientShard>& shards, const RunOptions& options) {
  const ExperimentConfig resolved = resolve(cfg);
  validate(resolved);
  Simulator sim(resolved, shards, options);
  return sim.run();
}

MetricsLog run(const ExperimentConfig& cfg, const RunOptions& options) {
  const ExperimentConfig resolved = resolve(cfg);
  validate(resolved);
  const auto shards = generate(resolved.data);
  Simulator sim(resolved, shards, options);
  return sim.run();
}

StalenessReport staleness_report(const MetricsLog& log, std::uint64_t cap) {
  StalenessReport r;
  double sum = 0.0;
  for (std::uint64_t s : log.staleness) {
    r.max = std::max(r.max, s);
    sum += static_cast<double>(s);
    ++r.histogram[s];
  }
  if (!log.staleness.empty()) r.mean = sum / static_cast<double>(log.staleness.size());
  if (cap > 0 && r.max > cap) {
    throw InvariantViolation("max staleness " + std::to_string(r.max) + " exceeds cap " + std::to_string(cap));
  }
  return r;
}

nlohmann::json run_manifest(const ExperimentConfig& cfg) {
  const ExperimentConfig resolved = resolve(cfg);
  return nlohmann::json{{"version", kVersion},
                        {"seed", cfg.seed},
                        {"config_hash", config_hash(resolved)},
                        {"config", resolved},
                        {"requested", cfg}};
}

}  // namespace pushcen
