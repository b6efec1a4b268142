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

#include <cmath>
#include <filesystem>
#include <random>

#include "pushcen/data.hpp"
#include "pushcen/errors.hpp"
#include "pushcen/model.hpp"

using namespace pushcen;

TEST_CASE("huge concentration gives near-uniform class proportions") {
  DataSpec spec;
  spec.alpha = 1e6;
  for (const auto& shard : generate(spec)) {
    REQUIRE(shard.class_proportions.size() == 10);
    for (double p : shard.class_proportions) CHECK(std::abs(p - 0.1) <= 0.05 * 0.1);
  }
}

TEST_CASE("smaller concentration means lower class entropy") {
  double low = 0.0;
  double high = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DataSpec spec;
    spec.seed = seed;
    spec.alpha = 0.1;
    for (const auto& s : generate(spec)) low += entropy(class_histogram(s.train, spec.classes));
    spec.alpha = 1.0;
    for (const auto& s : generate(spec)) high += entropy(class_histogram(s.train, spec.classes));
  }
  CHECK(low < high);
}

TEST_CASE("shards are deterministic and well formed") {
  DataSpec spec;
  spec.seed = 9;
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(a == b);
  REQUIRE(a.size() == spec.clients);
  for (const auto& s : a) {
    CHECK(s.train.size() == 200);
    CHECK(s.test.size() == 50);
    CHECK(s.train.dim == spec.features);
    for (int y : s.test.labels) CHECK((y >= 0 && y < spec.classes));
  }
  spec.seed = 10;
  CHECK(!(generate(spec) == a));
}

TEST_CASE("test split keeps at least one sample") {
  DataSpec spec;
  spec.clients = 3;
  spec.samples_per_client = 2;
  spec.test_fraction = 0.01;
  for (const auto& s : generate(spec)) {
    CHECK(s.test.size() == 1);
    CHECK(s.train.size() == 1);
  }
}

TEST_CASE("invalid specs") {
  DataSpec spec;
  spec.features = 5;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = DataSpec{};
  spec.samples_per_client = 1;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = DataSpec{};
  spec.alpha = 0.0;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = DataSpec{};
  spec.test_fraction = 1.0;
  CHECK_THROWS_AS(validate(spec), ConfigError);
}

TEST_CASE("shard files round trip") {
  DataSpec spec;
  spec.clients = 4;
  spec.seed = 3;
  const auto shards = generate(spec);
  const auto path = (std::filesystem::temp_directory_path() / "pushcen_shards_test.bin").string();
  save_shards(path, shards);
  CHECK(load_shards(path) == shards);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_shards(path), ConfigError);
}

TEST_CASE("local_eval") {
  SUBCASE("constant predictor on a single-class test set") {
    const SoftmaxRegression m(4, 3);
    ParamVector w(m.layout());
    w.layer(1)[2] = 1.0;
    Samples test;
    test.dim = 4;
    test.features.assign(4 * 5, 0.3);
    test.labels.assign(5, 2);
    CHECK(local_eval(m, w, test).accuracy == 1.0);
    test.labels.assign(5, 1);
    CHECK(local_eval(m, w, test).accuracy == 0.0);
  }
  SUBCASE("untrained model on random labels") {
    const int classes = 10;
    const std::size_t n = 4000;
    const Mlp m(8, 16, classes);
    Rng rng(1);
    const ParamVector w = m.initial(rng);
    Samples test;
    test.dim = 8;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> label(0, classes - 1);
    for (std::size_t i = 0; i < n * 8; ++i) test.features.push_back(normal(rng));
    for (std::size_t i = 0; i < n; ++i) test.labels.push_back(label(rng));
    const double acc = local_eval(m, w, test).accuracy;
    const double sigma = std::sqrt(0.1 * 0.9 / static_cast<double>(n));
    CHECK(std::abs(acc - 0.1) <= 3.0 * sigma);
  }
  SUBCASE("exact interpolation of a quadratic task") {
    const LeastSquares m(3);
    const ParamVector w(m.layout(), {0.5, -1.0, 2.0});
    Samples test;
    test.dim = 3;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      double y = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const double x = u(rng);
        test.features.push_back(x);
        y += w[k] * x;
      }
      test.targets.push_back(y);
      test.labels.push_back(0);
    }
    const EvalResult r = local_eval(m, w, test);
    CHECK(r.loss == doctest::Approx(0.0).epsilon(1e-30));
    CHECK(r.accuracy == 1.0);
  }
  SUBCASE("empty test set") {
    const SoftmaxRegression m(4, 3);
    Samples empty;
    empty.dim = 4;
    CHECK_THROWS_AS(local_eval(m, ParamVector(m.layout()), empty), ConfigError);
  }
}
