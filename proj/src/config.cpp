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

#include "pushcen/config.hpp"

#include <cstdio>
#include <fstream>

#include "pushcen/errors.hpp"

namespace pushcen {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::kPushCen:
      return "pushcen";
    case Method::kAsyncDFedAvg:
      return "async-dfedavg";
    case Method::kIndependent:
      return "independent";
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  if (s == "pushcen") return Method::kPushCen;
  if (s == "async-dfedavg") return Method::kAsyncDFedAvg;
  if (s == "independent") return Method::kIndependent;
  throw ConfigError("unknown method '" + s + "'");
}

ExperimentConfig resolve(const ExperimentConfig& cfg) {
  ExperimentConfig r = cfg;
  r.data.seed = cfg.seed;
  switch (cfg.method) {
    case Method::kPushCen:
      break;
    case Method::kAsyncDFedAvg:
      r.trainer.compress = false;
      r.trainer.lambda = 0.0;
      r.buffer_limit = 0;
      r.dedup = false;
      break;
    case Method::kIndependent:
      r.trainer.compress = false;
      r.trainer.lambda = 0.0;
      r.topology.fanout = 0;
      break;
  }
  if (cfg.ablations.no_reg) r.trainer.lambda = 0.0;
  if (cfg.ablations.no_buffer) {
    r.dedup = false;
    r.buffer_limit = 0;
  }
  return r;
}

void validate(const ExperimentConfig& c) {
  validate(c.data);
  validate(c.trainer);
  const auto& t = c.topology;
  if (t.kind != "random" && t.kind != "ring" && t.kind != "fixed") {
    throw ConfigError("unknown topology kind '" + t.kind + "'");
  }
  if (t.kind == "random" && c.data.clients > 0 && t.fanout > c.data.clients - 1) {
    throw ConfigError("fanout exceeds N-1");
  }
  const auto& s = c.schedule;
  if (s.kind != "poisson" && s.kind != "round_robin") throw ConfigError("unknown schedule kind '" + s.kind + "'");
  if (!(s.base_rate > 0.0)) throw ConfigError("base activation rate must be positive");
  if (!(s.rate_spread >= 1.0)) throw ConfigError("rate spread must be >= 1");
  if (!(s.delay_factor >= 0.0)) throw ConfigError("delays must be nonnegative");
  if (s.eval_intervals == 0) throw ConfigError("need at least one evaluation interval");
  if (!(s.delayed_fraction >= 0.0 && s.delayed_fraction < 1.0)) throw ConfigError("delayed fraction must lie in [0,1)");
  if (!(s.join_window > 0.0 && s.join_window <= 1.0)) throw ConfigError("join window must lie in (0,1]");
  if (s.join_mass != "mean" && s.join_mass != "unit") throw ConfigError("join_mass must be 'mean' or 'unit'");
}

void to_json(json& j, const ExperimentConfig& c) {
  json edges = json::array();
  for (const auto& [a, b] : c.topology.edges) edges.push_back({a, b});
  j = json{
      {"method", to_string(c.method)},
      {"seed", c.seed},
      {"strict", c.strict},
      {"buffer_limit", c.buffer_limit},
      {"dedup", c.dedup},
      {"ablations", {{"no_reg", c.ablations.no_reg}, {"no_buffer", c.ablations.no_buffer}}},
      {"data",
       {{"clients", c.data.clients},
        {"classes", c.data.classes},
        {"features", c.data.features},
        {"samples_per_client", c.data.samples_per_client},
        {"alpha", c.data.alpha},
        {"test_fraction", c.data.test_fraction},
        {"separation", c.data.separation},
        {"noise", c.data.noise}}},
      {"model", {{"kind", c.model.kind}, {"hidden", c.model.hidden}}},
      {"topology", {{"kind", c.topology.kind}, {"fanout", c.topology.fanout}, {"edges", edges}}},
      {"schedule",
       {{"kind", c.schedule.kind},
        {"base_rate", c.schedule.base_rate},
        {"rate_spread", c.schedule.rate_spread},
        {"delay_factor", c.schedule.delay_factor},
        {"events", c.schedule.events},
        {"eval_intervals", c.schedule.eval_intervals},
        {"delayed_fraction", c.schedule.delayed_fraction},
        {"join_window", c.schedule.join_window},
        {"staleness_cap", c.schedule.staleness_cap},
        {"join_mass", c.schedule.join_mass}}},
      {"trainer",
       {{"enabled", c.trainer.enabled},
        {"lr", c.trainer.lr},
        {"lambda", c.trainer.lambda},
        {"epochs", c.trainer.epochs},
        {"batch_size", c.trainer.batch_size},
        {"clusters", c.trainer.clusters},
        {"lloyd_iters", c.trainer.lloyd_iters},
        {"value_bits", c.trainer.value_bits},
        {"compress", c.trainer.compress},
        {"quantize_before", c.trainer.quantize_before},
        {"retain_full_precision", c.trainer.retain_full_precision},
        {"check_lemmas", c.trainer.check_lemmas}}},
  };
}

void from_json(const json& j, ExperimentConfig& c) {
  const ExperimentConfig d;
  c.method = parse_method(j.value("method", to_string(d.method)));
  c.seed = j.value("seed", d.seed);
  c.strict = j.value("strict", d.strict);
  c.buffer_limit = j.value("buffer_limit", d.buffer_limit);
  c.dedup = j.value("dedup", d.dedup);
  const json empty = json::object();
  const json& ab = j.contains("ablations") ? j.at("ablations") : empty;
  c.ablations.no_reg = ab.value("no_reg", d.ablations.no_reg);
  c.ablations.no_buffer = ab.value("no_buffer", d.ablations.no_buffer);

  const json& da = j.contains("data") ? j.at("data") : empty;
  c.data.clients = da.value("clients", d.data.clients);
  c.data.classes = da.value("classes", d.data.classes);
  c.data.features = da.value("features", d.data.features);
  c.data.samples_per_client = da.value("samples_per_client", d.data.samples_per_client);
  c.data.alpha = da.value("alpha", d.data.alpha);
  c.data.test_fraction = da.value("test_fraction", d.data.test_fraction);
  c.data.separation = da.value("separation", d.data.separation);
  c.data.noise = da.value("noise", d.data.noise);

  const json& mo = j.contains("model") ? j.at("model") : empty;
  c.model.kind = mo.value("kind", d.model.kind);
  c.model.hidden = mo.value("hidden", d.model.hidden);

  const json& to = j.contains("topology") ? j.at("topology") : empty;
  c.topology.kind = to.value("kind", d.topology.kind);
  c.topology.fanout = to.value("fanout", d.topology.fanout);
  c.topology.edges.clear();
  if (to.contains("edges")) {
    for (const auto& e : to.at("edges")) c.topology.edges.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>());
  }

  const json& sc = j.contains("schedule") ? j.at("schedule") : empty;
  c.schedule.kind = sc.value("kind", d.schedule.kind);
  c.schedule.base_rate = sc.value("base_rate", d.schedule.base_rate);
  c.schedule.rate_spread = sc.value("rate_spread", d.schedule.rate_spread);
  c.schedule.delay_factor = sc.value("delay_factor", d.schedule.delay_factor);
  c.schedule.events = sc.value("events", d.schedule.events);
  c.schedule.eval_intervals = sc.value("eval_intervals", d.schedule.eval_intervals);
  c.schedule.delayed_fraction = sc.value("delayed_fraction", d.schedule.delayed_fraction);
  c.schedule.join_window = sc.value("join_window", d.schedule.join_window);
  c.schedule.staleness_cap = sc.value("staleness_cap", d.schedule.staleness_cap);
  c.schedule.join_mass = sc.value("join_mass", d.schedule.join_mass);

  const json& tr = j.contains("trainer") ? j.at("trainer") : empty;
  c.trainer.enabled = tr.value("enabled", d.trainer.enabled);
  c.trainer.lr = tr.value("lr", d.trainer.lr);
  c.trainer.lambda = tr.value("lambda", d.trainer.lambda);
  c.trainer.epochs = tr.value("epochs", d.trainer.epochs);
  c.trainer.batch_size = tr.value("batch_size", d.trainer.batch_size);
  c.trainer.clusters = tr.value("clusters", d.trainer.clusters);
  c.trainer.lloyd_iters = tr.value("lloyd_iters", d.trainer.lloyd_iters);
  c.trainer.value_bits = tr.value("value_bits", d.trainer.value_bits);
  c.trainer.compress = tr.value("compress", d.trainer.compress);
  c.trainer.quantize_before = tr.value("quantize_before", d.trainer.quantize_before);
  c.trainer.retain_full_precision = tr.value("retain_full_precision", d.trainer.retain_full_precision);
  c.trainer.check_lemmas = tr.value("check_lemmas", d.trainer.check_lemmas);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(f, nullptr, true, true).get<ExperimentConfig>();
  } catch (const json::exception& e) {
    throw ConfigError("bad config " + path + ": " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pushcen
