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

#include "pushcen/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "pushcen/errors.hpp"
#include "pushcen/rng.hpp"

namespace pushcen {

namespace {

constexpr std::uint32_t kShardMagic = 0x44534350;  // "PCSD"
constexpr std::uint32_t kShardVersion = 1;

std::vector<double> dirichlet(double alpha, int classes, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> p(static_cast<std::size_t>(classes));
  double sum = 0.0;
  for (double& v : p) {
    v = gamma(rng);
    sum += v;
  }
  if (!(sum > 0.0)) {
    // Every draw underflowed (tiny alpha): the limit is a vertex of the simplex.
    std::fill(p.begin(), p.end(), 0.0);
    std::uniform_int_distribution<int> pick(0, classes - 1);
    p[static_cast<std::size_t>(pick(rng))] = 1.0;
    return p;
  }
  for (double& v : p) v /= sum;
  return p;
}

void draw(Samples& out, std::size_t n, const std::vector<double>& proportions, const DataSpec& spec, Rng& rng) {
  std::discrete_distribution<int> label(proportions.begin(), proportions.end());
  std::normal_distribution<double> noise(0.0, spec.noise);
  out.dim = spec.features;
  out.features.reserve(n * spec.features);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = label(rng);
    for (std::size_t k = 0; k < spec.features; ++k) {
      const double mean = (k == static_cast<std::size_t>(y)) ? spec.separation : 0.0;
      out.features.push_back(static_cast<double>(static_cast<float>(mean + noise(rng))));
    }
    out.labels.push_back(y);
  }
}

template <typename T>
void write_pod(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw ConfigError("shard file truncated");
  return v;
}

void write_samples(std::ofstream& f, const Samples& s) {
  write_pod<std::uint64_t>(f, s.size());
  write_pod<std::uint64_t>(f, s.dim);
  for (double v : s.features) write_pod<float>(f, static_cast<float>(v));
  for (int y : s.labels) write_pod<std::int32_t>(f, y);
}

Samples read_samples(std::ifstream& f) {
  Samples s;
  const auto n = read_pod<std::uint64_t>(f);
  s.dim = read_pod<std::uint64_t>(f);
  s.features.resize(n * s.dim);
  for (double& v : s.features) v = read_pod<float>(f);
  s.labels.resize(n);
  for (int& y : s.labels) y = read_pod<std::int32_t>(f);
  return s;
}

}  // namespace

void validate(const DataSpec& spec) {
  if (spec.clients == 0) throw ConfigError("need at least one client");
  if (spec.classes < 2) throw ConfigError("need at least two classes");
  if (!(spec.alpha > 0.0)) throw ConfigError("Dirichlet concentration must be positive");
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0,1)");
  if (spec.features < static_cast<std::size_t>(spec.classes)) {
    throw ConfigError("feature dimension must be at least the class count");
  }
  if (spec.samples_per_client < 2) throw ConfigError("each client needs at least one train and one test sample");
  if (!(spec.noise > 0.0)) throw ConfigError("noise scale must be positive");
}

std::vector<ClientShard> generate(const DataSpec& spec) {
  validate(spec);
  auto test_n = static_cast<std::size_t>(std::llround(static_cast<double>(spec.samples_per_client) * spec.test_fraction));
  test_n = std::clamp<std::size_t>(test_n, 1, spec.samples_per_client - 1);
  const std::size_t train_n = spec.samples_per_client - test_n;

  std::vector<ClientShard> shards(spec.clients);
  for (std::size_t c = 0; c < spec.clients; ++c) {
    Rng rng = make_rng(spec.seed, {stream::kData, c});
    ClientShard& shard = shards[c];
    shard.class_proportions = dirichlet(spec.alpha, spec.classes, rng);
    draw(shard.train, train_n, shard.class_proportions, spec, rng);
    draw(shard.test, test_n, shard.class_proportions, spec, rng);
  }
  return shards;
}

std::vector<double> class_histogram(const Samples& s, int classes) {
  std::vector<double> h(static_cast<std::size_t>(classes), 0.0);
  for (int y : s.labels) h.at(static_cast<std::size_t>(y)) += 1.0;
  const double n = static_cast<double>(s.labels.size());
  if (n > 0) {
    for (double& v : h) v /= n;
  }
  return h;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

void save_shards(const std::string& path, const std::vector<ClientShard>& shards) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path + " for writing");
  write_pod<std::uint32_t>(f, kShardMagic);
  write_pod<std::uint32_t>(f, kShardVersion);
  write_pod<std::uint64_t>(f, shards.size());
  for (const auto& s : shards) {
    write_pod<std::uint64_t>(f, s.class_proportions.size());
    for (double p : s.class_proportions) write_pod<double>(f, p);
    write_samples(f, s.train);
    write_samples(f, s.test);
  }
}

std::vector<ClientShard> load_shards(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path);
  if (read_pod<std::uint32_t>(f) != kShardMagic) throw ConfigError(path + " is not a shard file");
  if (read_pod<std::uint32_t>(f) != kShardVersion) throw ConfigError(path + ": unsupported shard version");
  std::vector<ClientShard> shards(read_pod<std::uint64_t>(f));
  for (auto& s : shards) {
    s.class_proportions.resize(read_pod<std::uint64_t>(f));
    for (double& p : s.class_proportions) p = read_pod<double>(f);
    s.train = read_samples(f);
    s.test = read_samples(f);
  }
  return shards;
}

}  // namespace pushcen
