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

#ifndef PUSHCEN_DATA_HPP
#define PUSHCEN_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pushcen {

// Row-major feature matrix with class labels (classification) or real
// targets (regression).
struct Samples {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<int> labels;
  std::vector<double> targets;

  std::size_t size() const { return dim == 0 ? 0 : features.size() / dim; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }

  bool operator==(const Samples&) const = default;
};

struct ClientShard {
  Samples train;
  Samples test;
  std::vector<double> class_proportions;

  bool operator==(const ClientShard&) const = default;
};

struct DataSpec {
  std::size_t clients = 20;
  int classes = 10;
  std::size_t features = 32;
  std::size_t samples_per_client = 250;
  double alpha = 0.4;
  double test_fraction = 0.2;
  // Class means sit at separation * e_c; noise is isotropic N(0, noise^2).
  double separation = 0.5;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

void validate(const DataSpec& spec);

// Gaussian-mixture pool partitioned with per-client Dirichlet(alpha) class
// proportions. Deterministic in spec.seed.
std::vector<ClientShard> generate(const DataSpec& spec);

std::vector<double> class_histogram(const Samples& s, int classes);
double entropy(std::span<const double> p);

// Versioned little-endian dump: float32 features, int32 labels.
void save_shards(const std::string& path, const std::vector<ClientShard>& shards);
std::vector<ClientShard> load_shards(const std::string& path);

}  // namespace pushcen

#endif  // PUSHCEN_DATA_HPP
