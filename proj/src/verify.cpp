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

#include "pushcen/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <random>
#include <set>

#include "pushcen/buffer.hpp"
#include "pushcen/errors.hpp"
#include "pushcen/experiment.hpp"
#include "pushcen/model.hpp"
#include "pushcen/rng.hpp"
#include "pushcen/sim.hpp"
#include "pushcen/trainer.hpp"
#include "pushcen/wcp.hpp"

namespace pushcen {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

template <typename Fn>
CheckResult guarded(const std::string& name, Fn&& body) {
  CheckResult r;
  r.name = name;
  const auto t0 = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

// Training and compression off, lossless 64-bit dense payloads and no
// eviction, so every message carries its sender's exact model.
ExperimentConfig pure_averaging(const VerifyOptions& opt) {
  ExperimentConfig cfg = opt.experiment;
  cfg.method = Method::kPushCen;
  cfg.seed = opt.seed;
  cfg.trainer.enabled = false;
  cfg.trainer.compress = false;
  cfg.trainer.value_bits = 64;
  cfg.schedule.delayed_fraction = 0.0;
  cfg.buffer_limit = 0;
  cfg.dedup = false;
  return cfg;
}

}  // namespace

double brute_force_distortion(std::span<const double> points, int clusters) {
  const std::size_t n = points.size();
  const auto k = static_cast<std::size_t>(clusters);
  if (k < 2) throw ConfigError("need at least two clusters");
  std::vector<std::size_t> assign(n, 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> sum(k);
  std::vector<std::size_t> count(k);
  while (true) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]] += points[i];
      ++count[assign[i]];
    }
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = assign[i];
      const double c = a == 0 ? 0.0 : sum[a] / static_cast<double>(count[a]);
      d += (points[i] - c) * (points[i] - c);
    }
    best = std::min(best, d);
    std::size_t pos = 0;
    while (pos < n && ++assign[pos] == k) assign[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

double lloyd_distortion(std::span<const double> points, int clusters, std::uint64_t seed, int max_iters) {
  const LayerClustering c = cold_start(points, clusters, seed, max_iters);
  const auto a = assign_nearest(points, c.centroids);
  return clustering_distortion(points, c.centroids, a);
}

std::vector<CheckResult> check_default_run(const VerifyOptions& opt) {
  CheckResult mass;
  mass.name = "mass conservation";
  CheckResult pert;
  pert.name = "numerator perturbation bound";
  ExperimentConfig cfg = opt.experiment;
  cfg.method = Method::kPushCen;
  cfg.seed = opt.seed;
  cfg.schedule.events = opt.events;
  cfg.strict = false;
  const auto t0 = Clock::now();
  try {
    const MetricsLog log = run(cfg);
    const double secs = seconds_since(t0);
    const double destroyed = log.rows.empty() ? 0.0 : log.rows.back().destroyed_mass;
    mass.pass = log.max_mass_drift <= 1e-10 && secs < 30.0 && log.activations > 0;
    mass.detail = fmt("max |Y_tot + destroyed - injected|/injected = %.3g over %llu activations, destroyed %.6g, "
                      "min s_i/Y_tot %.3g, %.1fs (limit 1e-10, 30s)",
                      log.max_mass_drift, static_cast<unsigned long long>(log.activations), destroyed,
                      log.min_mass_share, secs);
    pert.pass = log.perturbation_checks > 0 && log.perturbation_violations == 0;
    pert.detail = fmt("%zu broadcasts checked, %zu violations, max |dX_tot| %.3g, max eps_c %.3g",
                      log.perturbation_checks, log.perturbation_violations, log.max_perturbation, log.max_eps_c);
    mass.seconds = pert.seconds = secs;
  } catch (const std::exception& e) {
    mass.detail = pert.detail = std::string("exception: ") + e.what();
  }
  return {mass, pert};
}

CheckResult check_average_preservation(const VerifyOptions& opt) {
  return guarded("average preservation", [&](CheckResult& r) {
    ExperimentConfig cfg = pure_averaging(opt);
    cfg.schedule.events = opt.events;
    RunOptions ro;
    ro.distinct_init = true;
    const MetricsLog log = run(cfg, ro);
    r.pass = log.max_reference_shift <= 1e-10 && log.activations > 0;
    r.detail = fmt("max ||wbar_t - wbar_0|| / ||wbar_0|| = %.3g over %llu activations (limit 1e-10)",
                   log.max_reference_shift, static_cast<unsigned long long>(log.activations));
  });
}

CheckResult check_consensus_contraction(const VerifyOptions& opt) {
  return guarded("consensus contraction", [&](CheckResult& r) {
    const std::size_t n = 10;
    ExperimentConfig cfg = pure_averaging(opt);
    cfg.data.clients = n;
    cfg.topology.kind = "fixed";
    cfg.topology.edges = ring_with_chords(n, {{0, 5}, {5, 0}});
    cfg.schedule.kind = "round_robin";
    cfg.schedule.delay_factor = 0.0;
    cfg.schedule.events = 60 * n;
    cfg.schedule.eval_intervals = 1;
    RunOptions ro;
    ro.distinct_init = true;
    ro.trace_consensus = true;
    const MetricsLog log = run(cfg, ro);
    const auto& e = log.consensus_trace;  // e[0] before any activation, e[k] after activation k
    if (e.size() < 50 * n + 1 || !(e[0] > 0.0)) throw InvariantViolation("consensus trace too short");
    std::size_t increases = 0;
    std::size_t first_increase = 0;
    for (std::size_t k = n; k + 1 < e.size(); ++k) {
      if (e[k + 1] > e[k] * (1.0 + 1e-9)) {
        if (increases++ == 0) first_increase = k + 1;
      }
    }
    std::size_t hit = 0;
    for (std::size_t k = 1; k <= 50 * n; ++k) {
      if (e[k] < 1e-8 * e[0]) {
        hit = k;
        break;
      }
    }
    r.pass = increases == 0 && hit > 0;
    r.detail = fmt("E_con^0 %.4g, E_con after %zu activations %.4g (ratio %.3g), below 1e-8 ratio at %s, "
                   "%zu increases after burn-in%s",
                   e[0], 50 * n, e[50 * n], e[50 * n] / e[0], hit > 0 ? std::to_string(hit).c_str() : "never",
                   increases, increases > 0 ? (" (first at " + std::to_string(first_increase) + ")").c_str() : "");
  });
}

CheckResult check_compression_ratio(const VerifyOptions& opt) {
  return guarded("compression ratio", [&](CheckResult& r) {
    const auto layout = make_layout({{"w", 10000, true}});
    Rng rng = make_rng(opt.seed, {stream::kCodec, 5});
    std::normal_distribution<double> normal(0.0, 0.1);
    ParamVector w(layout);
    for (double& v : w.values()) v = normal(rng);
    const EncodeResult enc = wcp_encode(w, WcpOptions{32, 20, 32}, nullptr, opt.seed);
    const auto bytes = serialize(enc.payload, 0.5, 0, 1);
    const CommCost cost = comm_cost_bits(*layout, 32, 32);
    const double bits = 8.0 * static_cast<double>(bytes.size());
    const double gap = bits - static_cast<double>(cost.wcp_bits);
    const double ratio = bits / static_cast<double>(cost.full_bits);
    r.pass = std::abs(gap) <= 64.0 * 8.0 && ratio <= 0.20;
    r.detail = fmt("serialized %.0f bits, C_WCP %llu bits (gap %.0f bytes, limit 64), ratio to %llu full bits %.4f "
                   "(limit 0.20)",
                   bits, static_cast<unsigned long long>(cost.wcp_bits), gap / 8.0,
                   static_cast<unsigned long long>(cost.full_bits), ratio);
  });
}

CheckResult check_codec(const VerifyOptions& opt) {
  return guarded("codec correctness", [&](CheckResult& r) {
    Rng rng = make_rng(opt.seed, {stream::kCodec, 6});
    std::normal_distribution<double> normal(0.0, 1.0);
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    // Wire round trips.
    std::size_t roundtrip_failures = 0;
    const int cluster_choices[] = {2, 3, 4, 8, 16, 32, 256};
    const int bit_choices[] = {16, 32, 64};
    for (std::size_t t = 0; t < opt.codec_roundtrips; ++t) {
      std::vector<LayerSpec> specs;
      const int layers = uniform_int(1, 4);
      for (int l = 0; l < layers; ++l) {
        specs.push_back({"l" + std::to_string(l), static_cast<std::size_t>(uniform_int(1, 200)), uniform_int(0, 3) > 0});
      }
      const auto layout = make_layout(specs);
      ParamVector w(layout);
      const double scale = std::exp(normal(rng));
      for (double& v : w.values()) v = scale * normal(rng);
      const int bits = bit_choices[uniform_int(0, 2)];
      CentroidPayload payload;
      if (uniform_int(0, 9) == 0) {
        payload = dense_payload(w, bits);
      } else {
        const int k = cluster_choices[uniform_int(0, 6)];
        payload = wcp_encode(w, WcpOptions{k, 20, bits}, nullptr, rng()).payload;
      }
      const double mass = std::ldexp(std::uniform_real_distribution<double>(0.5, 1.0)(rng), -uniform_int(0, 300));
      const auto sender = static_cast<std::uint32_t>(rng());
      const std::uint64_t gen = rng();
      const auto bytes = serialize(payload, mass, sender, gen);
      const WireMessage back = deserialize(bytes);
      if (!(back.payload == payload) || back.mass != mass || back.sender != sender || back.gen_event != gen ||
          serialize(back.payload, back.mass, back.sender, back.gen_event) != bytes) {
        ++roundtrip_failures;
      }
    }

    // Lloyd monotonicity.
    std::size_t lloyd_failures = 0;
    for (std::size_t t = 0; t < opt.lloyd_instances; ++t) {
      const int n = uniform_int(10, 500);
      std::vector<double> pts(static_cast<std::size_t>(n));
      for (double& p : pts) p = normal(rng);
      const int k = uniform_int(2, 32);
      try {
        const LayerClustering c = cluster_layer(pts, random_init(pts, k, rng()), 20);
        for (std::size_t i = 1; i < c.distortion.size(); ++i) {
          if (c.distortion[i] > c.distortion[i - 1] * (1.0 + 1e-12)) {
            ++lloyd_failures;
            break;
          }
        }
      } catch (const InvariantViolation&) {
        ++lloyd_failures;
      }
    }

    // Small instances against exhaustive search.
    std::size_t small_failures = 0;
    double worst_ratio = 1.0;
    for (std::size_t t = 0; t < opt.small_instances; ++t) {
      const int n = uniform_int(1, 8);
      const int k = uniform_int(2, 3);
      std::vector<double> pts(static_cast<std::size_t>(n));
      for (double& p : pts) p = std::round(normal(rng) * 100.0) / 100.0;
      const double oracle = brute_force_distortion(pts, k);
      const double lloyd = lloyd_distortion(pts, k, rng());
      if (oracle > 0.0) worst_ratio = std::max(worst_ratio, lloyd / oracle);
      if (lloyd > oracle * 1.05 + 1e-12) ++small_failures;
    }
    const std::vector<double> example{0.1, 0.12, -0.5, -0.48, 0.0};
    const double example_oracle = brute_force_distortion(example, 3);
    const double example_lloyd = lloyd_distortion(example, 3, opt.seed);
    const bool example_ok = std::abs(example_lloyd - example_oracle) <= 1e-9;

    r.pass = roundtrip_failures == 0 && lloyd_failures == 0 && small_failures == 0 && example_ok;
    r.detail = fmt("round trips %zu/%zu ok; Lloyd monotone %zu/%zu; small instances within 1.05x oracle %zu/%zu "
                   "(worst %.4f); seeded example %.3g vs oracle %.3g",
                   opt.codec_roundtrips - roundtrip_failures, opt.codec_roundtrips,
                   opt.lloyd_instances - lloyd_failures, opt.lloyd_instances, opt.small_instances - small_failures,
                   opt.small_instances, worst_ratio, example_lloyd, example_oracle);
  });
}

CheckResult check_buffer(const VerifyOptions& opt) {
  return guarded("buffer semantics", [&](CheckResult& r) {
    Rng rng = make_rng(opt.seed, {stream::kNeighbors, 7});
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::size_t failures = 0;
    std::size_t inserts = 0;
    for (std::size_t s = 0; s < opt.buffer_sequences && failures == 0; ++s) {
      const auto capacity = static_cast<std::size_t>(uniform_int(1, 8));
      const bool dedup = uniform_int(0, 4) > 0;
      MessageBuffer buffer(capacity, dedup);
      std::deque<std::pair<MessageId, ClientId>> model;  // reference FIFO
      const int length = uniform_int(1, 40);
      const int senders = uniform_int(1, 8);
      for (int i = 0; i < length; ++i) {
        if (uniform_int(0, 9) == 0) {
          const auto drained = buffer.drain();
          bool same = drained.size() == model.size();
          for (std::size_t j = 0; same && j < drained.size(); ++j) same = drained[j].id == model[j].first;
          if (!same || !buffer.empty()) ++failures;
          model.clear();
          continue;
        }
        BufferedMessage m;
        m.id = static_cast<MessageId>(i);
        m.sender = static_cast<ClientId>(uniform_int(0, senders - 1));
        m.share = 0.5;
        std::vector<MessageId> expected;
        if (dedup) {
          const auto it = std::find_if(model.begin(), model.end(), [&](const auto& e) { return e.second == m.sender; });
          if (it != model.end()) {
            expected.push_back(it->first);
            model.erase(it);
          }
        }
        model.emplace_back(m.id, m.sender);
        while (model.size() > capacity) {
          expected.push_back(model.front().first);
          model.pop_front();
        }
        const auto evicted = buffer.insert(m);
        ++inserts;
        bool ok = evicted.size() == expected.size() && buffer.size() <= capacity && buffer.size() == model.size();
        for (std::size_t j = 0; ok && j < evicted.size(); ++j) ok = evicted[j].id == expected[j];
        std::set<ClientId> seen;
        for (std::size_t j = 0; ok && j < buffer.entries().size(); ++j) {
          const auto& e = buffer.entries()[j];
          ok = e.id == model[j].first && (!dedup || seen.insert(e.sender).second);
          if (ok && j > 0) ok = buffer.entries()[j - 1].id < e.id;  // arrival order
        }
        if (!ok) ++failures;
      }
    }
    r.pass = failures == 0;
    r.detail = fmt("%zu sequences, %zu inserts: sender uniqueness, capacity bound and FIFO eviction order %s",
                   opt.buffer_sequences, inserts, failures == 0 ? "hold" : "VIOLATED");
  });
}

CheckResult check_trainer_lemmas(const VerifyOptions& opt) {
  return guarded("local trainer lemma checks", [&](CheckResult& r) {
    Rng rng = make_rng(opt.seed, {stream::kTraining, 9});
    std::normal_distribution<double> normal(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    std::size_t steps = 0;
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst_slack = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < opt.lemma_updates; ++t) {
      const auto dim = static_cast<std::size_t>(uniform(2, 24));
      const auto n = static_cast<std::size_t>(uniform(8, 80));
      Samples data;
      data.dim = dim;
      for (std::size_t i = 0; i < n * dim; ++i) data.features.push_back(normal(rng));
      for (std::size_t i = 0; i < n; ++i) {
        data.targets.push_back(normal(rng));
        data.labels.push_back(0);
      }
      LeastSquares model(dim);
      TrainerConfig cfg;
      cfg.lambda = uniform(0.01, 1.0);
      const double smooth = estimate_smoothness(data);
      cfg.lr = std::min(0.5 / cfg.lambda, 1.0 / (smooth + 2.0 * cfg.lambda)) * uniform(0.1, 1.0);
      cfg.epochs = static_cast<int>(uniform(1, 4));
      cfg.batch_size = static_cast<std::size_t>(uniform(1, static_cast<double>(n)));
      cfg.clusters = static_cast<int>(uniform(2, 9));
      cfg.check_lemmas = false;  // count rather than throw
      PushSumState state;
      Rng init = make_rng(rng(), {});
      state.model = model.initial(init);
      for (double& v : state.model.values()) v += normal(rng);
      state.mask = PruneMask(model.layout(), true);
      state.dictionary = CentroidTable::zeros(1, cfg.clusters);
      if (t % 2 == 1) {
        ParamVector other(model.layout());
        for (double& v : other.values()) v = normal(rng);
        state.dictionary = wcp_encode(other, WcpOptions{cfg.clusters, 20, 32}, nullptr, rng()).payload.tables;
      }
      const LocalUpdateResult res = local_update(state, model, data, cfg, rng());
      steps += res.trace.steps;
      checks += res.trace.contraction_checks + 1;
      violations += res.trace.contraction_violations + (res.trace.drift_ok ? 0 : 1);
      worst_slack = std::max(worst_slack, res.trace.worst_contraction_slack);
    }

    // Finite differences on the three objective families.
    double worst_fd = 0.0;
    {
      DataSpec ds;
      ds.clients = 1;
      ds.features = 6;
      ds.classes = 4;
      ds.samples_per_client = 30;
      ds.seed = opt.seed;
      const auto shard = generate(ds).front();
      Samples reg = shard.train;
      reg.targets.clear();
      for (std::size_t i = 0; i < reg.size(); ++i) reg.targets.push_back(normal(rng));
      const LeastSquares quad(ds.features);
      const SoftmaxRegression soft(ds.features, ds.classes);
      const Mlp mlp(ds.features, 5, ds.classes);
      const Model* models[] = {&quad, &soft, &mlp};
      for (const Model* m : models) {
        const Samples& d = m->classifier() ? shard.train : reg;
        std::vector<std::size_t> rows(d.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        Rng init = make_rng(opt.seed, {stream::kInit, 11});
        const ParamVector w = m->initial(init);
        ParamVector anchor(m->layout());
        for (double& v : anchor.values()) v = 0.3 * normal(rng);
        const Objective f = [&](const ParamVector& x, ParamVector* g) { return m->loss_grad(x, d, rows, g); };
        worst_fd = std::max(worst_fd, reg_gradient_check(f, w, anchor, 0.1));
      }
    }
    r.pass = violations == 0 && worst_fd <= 1e-6;
    r.detail = fmt("%zu updates, %zu SGD steps, %zu inequality checks, %zu violations (worst contraction slack %.3g); "
                   "finite-difference max deviation %.3g (limit 1e-6)",
                   opt.lemma_updates, steps, checks, violations, worst_slack, worst_fd);
  });
}

CheckResult check_determinism(const VerifyOptions& opt) {
  return guarded("determinism", [&](CheckResult& r) {
    std::size_t identical = 0;
    std::size_t total = 0;
    for (Method m : {Method::kPushCen, Method::kAsyncDFedAvg}) {
      ExperimentConfig cfg = opt.experiment;
      cfg.method = m;
      cfg.seed = opt.seed + 17;
      cfg.schedule.events = 800;
      const std::string a = run(cfg).to_csv();
      const std::string b = run(cfg).to_csv();
      ++total;
      identical += a == b ? 1 : 0;
    }
    r.pass = identical == total;
    r.detail = fmt("%zu/%zu configurations produced byte-identical metrics CSVs", identical, total);
  });
}

CheckResult check_end_to_end(const VerifyOptions& opt) {
  return guarded("end-to-end accuracy and bytes", [&](CheckResult& r) {
    const auto t0 = Clock::now();
    MatrixSpec spec;
    spec.base = opt.experiment;
    spec.base.data.clients = 20;
    spec.alphas = {0.1};
    spec.seeds = opt.seeds;
    spec.workers = opt.workers;
    const ResultsTable table = run_matrix(spec);
    const double secs = seconds_since(t0);
    const auto summary = table.summarize();
    const SummaryRow* push = table.find(summary, to_string(Method::kPushCen), 0.1);
    const SummaryRow* dfed = table.find(summary, to_string(Method::kAsyncDFedAvg), 0.1);
    const SummaryRow* ind = table.find(summary, to_string(Method::kIndependent), 0.1);
    if (push == nullptr || dfed == nullptr || ind == nullptr) throw Error("missing matrix cells");
    const double gain = 100.0 * (push->mean_acc - ind->mean_acc);
    const double gap = 100.0 * (push->mean_acc - dfed->mean_acc);
    const double byte_ratio = push->total_bytes / dfed->total_bytes;
    r.pass = !table.partial && gain >= 5.0 && gap >= -3.0 && byte_ratio <= 0.25 && secs < 300.0;
    r.detail =
        fmt("acc push-sum %.2f, async-dfedavg %.2f, independent %.2f over %zu seeds: +%.2f vs independent "
            "(need >= 5), %+.2f vs async-dfedavg (need >= -3), bytes ratio %.4f (need <= 0.25), %.0fs (limit 300)",
            100.0 * push->mean_acc, 100.0 * dfed->mean_acc, 100.0 * ind->mean_acc, opt.seeds.size(), gain, gap,
            byte_ratio, secs);
  });
}

CheckResult check_delayed_clients(const VerifyOptions& opt) {
  return guarded("delayed clients", [&](CheckResult& r) {
    MatrixSpec spec;
    spec.base = opt.experiment;
    spec.base.data.clients = 20;
    spec.base.schedule.delayed_fraction = 0.1;
    spec.base.schedule.join_window = 0.5;
    spec.methods = {Method::kPushCen, Method::kIndependent};
    spec.alphas = {opt.experiment.data.alpha};
    spec.seeds = opt.seeds;
    spec.workers = opt.workers;
    const ResultsTable table = run_matrix(spec);

    std::size_t good = 0;
    std::size_t considered = 0;
    std::string per_seed;
    for (std::uint64_t seed : opt.seeds) {
      const ResultRow* p = nullptr;
      const ResultRow* i = nullptr;
      for (const auto& row : table.rows) {
        if (row.seed != seed || !row.ok) continue;
        if (row.method == Method::kPushCen) p = &row;
        if (row.method == Method::kIndependent) i = &row;
      }
      if (p == nullptr || i == nullptr || p->delayed_running_max.size() != i->delayed_running_max.size()) continue;
      ++considered;
      bool all = !p->delayed_running_max.empty();
      for (std::size_t k = 0; k < p->delayed_running_max.size(); ++k) {
        all = all && p->delayed_running_max[k] > i->delayed_running_max[k];
        per_seed += fmt(" s%llu:%.2f/%.2f", static_cast<unsigned long long>(seed), p->delayed_running_max[k],
                        i->delayed_running_max[k]);
      }
      good += all ? 1 : 0;
    }
    const std::size_t need = opt.seeds.size() >= 5 ? opt.seeds.size() - 1 : opt.seeds.size();
    r.pass = considered == opt.seeds.size() && good >= need;
    r.detail = fmt("alpha %g: %zu/%zu seeds with every delayed client ahead of independent (need %zu); "
                   "running max push-sum/independent:%s",
                   opt.experiment.data.alpha, good, considered, need, per_seed.c_str());
  });
}

CheckResult check_ablation(const VerifyOptions& opt) {
  return guarded("ablation direction", [&](CheckResult& r) {
    ExperimentConfig base = opt.experiment;
    base.data.alpha = 0.4;
    const AblationReport report = ablation_report(base, opt.seeds, opt.workers);
    const double full = report.rows[0].mean_acc;
    const double no_reg = report.rows[1].mean_acc;
    const double no_buffer = report.rows[2].mean_acc;
    r.pass = !report.runs.partial && full >= no_reg && full >= no_buffer;
    r.detail = fmt("mean acc full %.2f, no_reg %.2f, no_buffer %.2f over %zu seeds", 100.0 * full, 100.0 * no_reg,
                   100.0 * no_buffer, opt.seeds.size());
  });
}

std::vector<CheckResult> run_invariant_suite(const VerifyOptions& opt, bool full) {
  std::vector<CheckResult> out = check_default_run(opt);
  out.push_back(check_average_preservation(opt));
  out.push_back(check_consensus_contraction(opt));
  out.push_back(check_compression_ratio(opt));
  out.push_back(check_codec(opt));
  out.push_back(check_buffer(opt));
  out.push_back(check_trainer_lemmas(opt));
  if (full) {
    out.push_back(check_end_to_end(opt));
    out.push_back(check_ablation(opt));
    out.push_back(check_delayed_clients(opt));
  }
  out.push_back(check_determinism(opt));
  return out;
}

}  // namespace pushcen
