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
#include <random>

#include "pushcen/errors.hpp"
#include "pushcen/model.hpp"
#include "pushcen/trainer.hpp"

using namespace pushcen;

namespace {

Samples regression_data(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Samples s;
  s.dim = dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) s.features.push_back(normal(rng));
    s.targets.push_back(normal(rng));
    s.labels.push_back(0);
  }
  return s;
}

PushSumState start_state(const Model& m, std::vector<double> values, int clusters) {
  PushSumState st;
  st.model = ParamVector(m.layout(), std::move(values));
  st.dictionary = CentroidTable::zeros(m.layout()->num_compressible(), clusters);
  st.mask = PruneMask(m.layout(), true);
  return st;
}

TrainerConfig exact_cfg(std::size_t batch) {
  TrainerConfig cfg;
  cfg.batch_size = batch;
  cfg.value_bits = 64;
  cfg.clusters = 8;
  cfg.quantize_before = false;
  return cfg;
}

}  // namespace

TEST_CASE("anchor from dictionary and assignments") {
  const auto layout = make_layout({{"w", 3, true}, {"b", 2, false}});
  const ParamVector current(layout, {9, 9, 9, 0.5, -0.5});
  CentroidTable dict{{{0.0, 1.5, -2.0}}};
  AssignmentMap assign{{{1, 0, 2}}};
  const Anchor a = build_anchor(dict, assign, current);
  CHECK(a.target == ParamVector(layout, {1.5, 0.0, -2.0, 0.5, -0.5}));

  const Anchor empty = build_anchor(CentroidTable{}, assign, current);
  CHECK(empty.target == ParamVector(layout, {0, 0, 0, 0.5, -0.5}));

  assign.layers[0][1] = 3;
  CHECK_THROWS_AS(build_anchor(dict, assign, current), StructuralError);
  CHECK_THROWS_AS(build_anchor(dict, AssignmentMap{}, current), StructuralError);
}

TEST_CASE("one full-batch step matches the proximal gradient formula") {
  const std::size_t n = 12;
  const LeastSquares m(4);
  const Samples data = regression_data(n, 4, 2);
  const std::vector<double> w0 = {0.3, -0.7, 1.1, 0.25};
  TrainerConfig cfg = exact_cfg(n);
  cfg.lr = 0.05;
  cfg.lambda = 0.2;
  const auto r = local_update(start_state(m, w0, 8), m, data, cfg, 7);

  // Zero dictionary gives a zero anchor.
  CHECK(r.anchor.target.norm_sq() == 0.0);
  ParamVector grad;
  m.loss_grad(ParamVector(m.layout(), w0), data, std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
              &grad);
  for (std::size_t k = 0; k < 4; ++k) {
    const double expect = w0[k] - cfg.lr * (grad[k] + 2.0 * cfg.lambda * w0[k]);
    CHECK(std::abs(r.trained[k] - expect) <= 1e-12);
  }
  CHECK(r.trace.steps == 1);
  CHECK(r.trace.drift_ok);
  REQUIRE(r.encoding.has_value());
}

TEST_CASE("zero regularization ignores the anchor") {
  const LeastSquares m(5);
  const Samples data = regression_data(40, 5, 3);
  const std::vector<double> w0 = {0.1, 0.2, -0.3, 0.4, -0.5};
  TrainerConfig cfg = exact_cfg(8);
  cfg.lambda = 0.0;
  cfg.epochs = 2;
  PushSumState a = start_state(m, w0, 8);
  PushSumState b = start_state(m, w0, 8);
  b.dictionary.layers[0] = {0.0, -0.5, -0.3, 0.1, 0.2, 0.4, 0.6, 0.8};
  const auto ra = local_update(a, m, data, cfg, 11);
  const auto rb = local_update(b, m, data, cfg, 11);
  CHECK(ra.trained == rb.trained);
  CHECK(!(ra.anchor.target == rb.anchor.target));
  CHECK(ra.trace.contraction_checks == 0);
}

TEST_CASE("zero learning rate leaves the model unchanged") {
  const LeastSquares m(4);
  const Samples data = regression_data(20, 4, 4);
  TrainerConfig cfg = exact_cfg(5);
  cfg.lr = 0.0;
  const std::vector<double> w0 = {1.0, -2.0, 0.5, 4.0};
  const auto r = local_update(start_state(m, w0, 8), m, data, cfg, 1);
  CHECK(r.trained == ParamVector(m.layout(), w0));
  CHECK(r.trace.drift_sq == 0.0);
  CHECK(r.model == ParamVector(m.layout(), w0));
}

TEST_CASE("pruned coordinates stay zero") {
  const LeastSquares m(6);
  const Samples data = regression_data(30, 6, 5);
  TrainerConfig cfg = exact_cfg(10);
  cfg.epochs = 3;
  const std::vector<double> w0 = {0.0, 1.0, 0.0, -1.0, 0.5, 0.0};
  const auto r = local_update(start_state(m, w0, 8), m, data, cfg, 2);
  for (std::size_t k : {0u, 2u, 5u}) {
    CHECK(r.trained[k] == 0.0);
    CHECK(r.model[k] == 0.0);
  }
  CHECK(r.trained[1] != 1.0);
}

TEST_CASE("retained full precision keeps the trained model") {
  const LeastSquares m(6);
  const Samples data = regression_data(30, 6, 6);
  TrainerConfig cfg;
  cfg.batch_size = 10;
  cfg.clusters = 2;
  cfg.retain_full_precision = true;
  const auto r = local_update(start_state(m, {0.3, -0.2, 0.9, 0.1, -0.6, 0.4}, 2), m, data, cfg, 3);
  CHECK(r.model == r.trained);
  REQUIRE(r.encoding.has_value());
  CHECK(!(r.encoding->quantized == r.trained));
}

TEST_CASE("drift and contraction bounds hold on random least squares") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LeastSquares m(8);
    const Samples data = regression_data(50, 8, 100 + seed);
    TrainerConfig cfg;
    cfg.lr = 0.02;
    cfg.lambda = 0.5;
    cfg.epochs = 3;
    cfg.batch_size = 10;
    cfg.clusters = 4;
    Rng rng(seed);
    PushSumState st;
    st.model = m.initial(rng);
    st.dictionary = CentroidTable{{{0.0, -0.3, 0.2, 0.6}}};
    st.mask = PruneMask(m.layout(), true);
    LocalUpdateResult r;
    REQUIRE_NOTHROW(r = local_update(st, m, data, cfg, seed));
    CHECK(r.trace.drift_ok);
    CHECK(r.trace.drift_sq <= r.trace.drift_bound * (1.0 + 1e-12));
    CHECK(r.trace.contraction_checks == 15);
    CHECK(r.trace.contraction_violations == 0);
    CHECK(r.trace.worst_contraction_slack <= 1e-12);
  }
}

TEST_CASE("update is deterministic in the seed") {
  const SoftmaxRegression m(12, 3);
  Samples data;
  data.dim = 12;
  std::mt19937_64 g(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    for (int k = 0; k < 12; ++k) data.features.push_back(normal(g));
    data.labels.push_back(i % 3);
  }
  Rng rng(1);
  PushSumState st;
  st.model = m.initial(rng);
  st.dictionary = CentroidTable::zeros(1, 4);
  TrainerConfig cfg;
  cfg.clusters = 4;
  const auto a = local_update(st, m, data, cfg, 77);
  const auto b = local_update(st, m, data, cfg, 77);
  const auto c = local_update(st, m, data, cfg, 78);
  CHECK(a.model == b.model);
  CHECK(!(a.trained == c.trained));
}

TEST_CASE("regularized gradient check") {
  const auto layout = make_layout({{"w", 3, true}});
  const ParamVector w(layout, {0.4, -1.2, 2.0});
  const ParamVector anchor(layout, {1.0, 0.0, -1.0});
  const Objective quartic = [](const ParamVector& x, ParamVector* g) {
    double f = 0.0;
    if (g != nullptr) *g = ParamVector(x.layout_ptr());
    for (std::size_t k = 0; k < x.size(); ++k) {
      f += 0.25 * std::pow(x[k], 4);
      if (g != nullptr) (*g)[k] = std::pow(x[k], 3);
    }
    return f;
  };
  CHECK(reg_gradient_check(quartic, w, anchor, 0.3) <= 1e-6);
  const Objective wrong = [&](const ParamVector& x, ParamVector* g) {
    const double f = quartic(x, g);
    if (g != nullptr) g->scale(2.0);
    return f;
  };
  CHECK(reg_gradient_check(wrong, w, anchor, 0.3) > 1e-2);
}

TEST_CASE("model gradients agree with finite differences") {
  Samples data;
  data.dim = 5;
  std::mt19937_64 g(21);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 8; ++i) {
    for (int k = 0; k < 5; ++k) data.features.push_back(normal(g));
    data.labels.push_back(i % 3);
    data.targets.push_back(normal(g));
  }
  const std::vector<std::size_t> rows = {0, 1, 2, 3, 4, 5, 6, 7};
  const LeastSquares quad(5);
  const SoftmaxRegression soft(5, 3);
  const Mlp mlp(5, 4, 3);
  for (const Model* m : std::initializer_list<const Model*>{&quad, &soft, &mlp}) {
    Rng rng(5);
    const ParamVector w = m->initial(rng);
    ParamVector anchor = w;
    for (double& v : anchor.values()) v += 0.1;
    const Objective f = [&](const ParamVector& x, ParamVector* grad) { return m->loss_grad(x, data, rows, grad); };
    CHECK_MESSAGE(reg_gradient_check(f, w, anchor, 0.05) <= 1e-6, m->name());
  }
}

TEST_CASE("stepsize guard") {
  TrainerConfig cfg;
  cfg.lambda = 0.0;
  cfg.lr = 0.1;
  CHECK(!stepsize_warning(cfg, 1.0).has_value());
  cfg.lr = 0.2;
  CHECK(stepsize_warning(cfg, 1.0).has_value());
  cfg.lambda = 1.0;
  cfg.lr = 0.1;
  CHECK(!stepsize_warning(cfg, 0.0).has_value());
  cfg.lr = 0.3;
  CHECK(stepsize_warning(cfg, 0.0).has_value());
}

TEST_CASE("smoothness of a diagonal design") {
  Samples s;
  s.dim = 2;
  s.features = {2.0, 0.0, 0.0, 1.0};
  CHECK(estimate_smoothness(s) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("invalid trainer settings") {
  TrainerConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = TrainerConfig{};
  cfg.clusters = 1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = TrainerConfig{};
  cfg.value_bits = 8;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = TrainerConfig{};
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("non-finite gradients are reported") {
  const LeastSquares m(2);
  Samples data;
  data.dim = 2;
  data.features = {1e300, 1e300};
  data.targets = {0.0};
  data.labels = {0};
  TrainerConfig cfg;
  cfg.compress = false;
  CHECK_THROWS_AS(local_update(start_state(m, {1e300, 1e300}, 4), m, data, cfg, 0), NumericError);
}
