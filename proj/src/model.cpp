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

#include "pushcen/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pushcen/errors.hpp"

namespace pushcen {

namespace {

void softmax_inplace(std::span<double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

std::size_t argmax(std::span<const double> z) {
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

void check_rows(std::span<const std::size_t> rows) {
  if (rows.empty()) throw ConfigError("loss over an empty batch");
}

void uniform_fill(std::span<double> out, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& v : out) v = u(rng);
}

}  // namespace

LeastSquares::LeastSquares(std::size_t dim, bool compressible)
    : dim_(dim), layout_(make_layout({{"w", dim, compressible}})) {}

double LeastSquares::loss_grad(const ParamVector& w, const Samples& data, std::span<const std::size_t> rows,
                               ParamVector* grad) const {
  check_rows(rows);
  if (grad != nullptr) *grad = ParamVector(layout_);
  const auto wv = w.values();
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto x = data.row(r);
    double pred = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) pred += x[k] * wv[k];
    const double res = pred - data.targets[r];
    loss += 0.5 * res * res;
    if (grad != nullptr) {
      auto g = grad->values();
      for (std::size_t k = 0; k < dim_; ++k) g[k] += res * x[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  if (grad != nullptr) {
    for (double& v : grad->values()) v *= inv;
  }
  return loss * inv;
}

double LeastSquares::predict(const ParamVector& w, std::span<const double> x) const {
  double pred = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) pred += x[k] * w[k];
  return pred;
}

ParamVector LeastSquares::initial(Rng& rng) const {
  ParamVector w(layout_);
  uniform_fill(w.values(), 0.1, rng);
  return w;
}

SoftmaxRegression::SoftmaxRegression(std::size_t dim, int classes)
    : dim_(dim),
      classes_(static_cast<std::size_t>(classes)),
      layout_(make_layout({{"weight", classes_ * dim, true}, {"bias", classes_, false}})) {}

double SoftmaxRegression::loss_grad(const ParamVector& w, const Samples& data, std::span<const std::size_t> rows,
                                    ParamVector* grad) const {
  check_rows(rows);
  if (grad != nullptr) *grad = ParamVector(layout_);
  const auto W = w.layer(0);
  const auto b = w.layer(1);
  std::vector<double> z(classes_);
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto x = data.row(r);
    for (std::size_t c = 0; c < classes_; ++c) {
      double s = b[c];
      const double* wc = &W[c * dim_];
      for (std::size_t k = 0; k < dim_; ++k) s += wc[k] * x[k];
      z[c] = s;
    }
    softmax_inplace(z);
    const auto y = static_cast<std::size_t>(data.labels[r]);
    loss -= std::log(std::max(z[y], 1e-300));
    if (grad != nullptr) {
      auto gW = grad->layer(0);
      auto gb = grad->layer(1);
      for (std::size_t c = 0; c < classes_; ++c) {
        const double dz = z[c] - (c == y ? 1.0 : 0.0);
        gb[c] += dz;
        double* gc = &gW[c * dim_];
        for (std::size_t k = 0; k < dim_; ++k) gc[k] += dz * x[k];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  if (grad != nullptr) {
    for (double& v : grad->values()) v *= inv;
  }
  return loss * inv;
}

double SoftmaxRegression::predict(const ParamVector& w, std::span<const double> x) const {
  const auto W = w.layer(0);
  const auto b = w.layer(1);
  std::vector<double> z(classes_);
  for (std::size_t c = 0; c < classes_; ++c) {
    double s = b[c];
    for (std::size_t k = 0; k < dim_; ++k) s += W[c * dim_ + k] * x[k];
    z[c] = s;
  }
  return static_cast<double>(argmax(z));
}

ParamVector SoftmaxRegression::initial(Rng& rng) const {
  ParamVector w(layout_);
  uniform_fill(w.layer(0), 1.0 / std::sqrt(static_cast<double>(dim_)), rng);
  return w;
}

Mlp::Mlp(std::size_t dim, std::size_t hidden, int classes)
    : dim_(dim),
      hidden_(hidden),
      classes_(static_cast<std::size_t>(classes)),
      layout_(make_layout({{"fc1.weight", hidden * dim, true},
                           {"fc1.bias", hidden, false},
                           {"fc2.weight", classes_ * hidden, true},
                           {"fc2.bias", classes_, false}})) {
  if (hidden == 0) throw ConfigError("MLP hidden width must be positive");
}

double Mlp::loss_grad(const ParamVector& w, const Samples& data, std::span<const std::size_t> rows,
                      ParamVector* grad) const {
  check_rows(rows);
  if (grad != nullptr) *grad = ParamVector(layout_);
  const auto W1 = w.layer(0);
  const auto b1 = w.layer(1);
  const auto W2 = w.layer(2);
  const auto b2 = w.layer(3);
  std::vector<double> h(hidden_);
  std::vector<double> dh(hidden_);
  std::vector<double> z(classes_);
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto x = data.row(r);
    for (std::size_t j = 0; j < hidden_; ++j) {
      double s = b1[j];
      const double* wj = &W1[j * dim_];
      for (std::size_t k = 0; k < dim_; ++k) s += wj[k] * x[k];
      h[j] = std::tanh(s);
    }
    for (std::size_t c = 0; c < classes_; ++c) {
      double s = b2[c];
      const double* wc = &W2[c * hidden_];
      for (std::size_t j = 0; j < hidden_; ++j) s += wc[j] * h[j];
      z[c] = s;
    }
    softmax_inplace(z);
    const auto y = static_cast<std::size_t>(data.labels[r]);
    loss -= std::log(std::max(z[y], 1e-300));
    if (grad == nullptr) continue;

    auto gW1 = grad->layer(0);
    auto gb1 = grad->layer(1);
    auto gW2 = grad->layer(2);
    auto gb2 = grad->layer(3);
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < classes_; ++c) {
      const double dz = z[c] - (c == y ? 1.0 : 0.0);
      gb2[c] += dz;
      double* gc = &gW2[c * hidden_];
      const double* wc = &W2[c * hidden_];
      for (std::size_t j = 0; j < hidden_; ++j) {
        gc[j] += dz * h[j];
        dh[j] += dz * wc[j];
      }
    }
    for (std::size_t j = 0; j < hidden_; ++j) {
      const double da = dh[j] * (1.0 - h[j] * h[j]);
      gb1[j] += da;
      double* gj = &gW1[j * dim_];
      for (std::size_t k = 0; k < dim_; ++k) gj[k] += da * x[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  if (grad != nullptr) {
    for (double& v : grad->values()) v *= inv;
  }
  return loss * inv;
}

double Mlp::predict(const ParamVector& w, std::span<const double> x) const {
  const auto W1 = w.layer(0);
  const auto b1 = w.layer(1);
  const auto W2 = w.layer(2);
  const auto b2 = w.layer(3);
  std::vector<double> h(hidden_);
  for (std::size_t j = 0; j < hidden_; ++j) {
    double s = b1[j];
    for (std::size_t k = 0; k < dim_; ++k) s += W1[j * dim_ + k] * x[k];
    h[j] = std::tanh(s);
  }
  std::vector<double> z(classes_);
  for (std::size_t c = 0; c < classes_; ++c) {
    double s = b2[c];
    for (std::size_t j = 0; j < hidden_; ++j) s += W2[c * hidden_ + j] * h[j];
    z[c] = s;
  }
  return static_cast<double>(argmax(z));
}

ParamVector Mlp::initial(Rng& rng) const {
  ParamVector w(layout_);
  uniform_fill(w.layer(0), std::sqrt(6.0 / static_cast<double>(dim_ + hidden_)), rng);
  uniform_fill(w.layer(2), std::sqrt(6.0 / static_cast<double>(hidden_ + classes_)), rng);
  return w;
}

std::unique_ptr<Model> make_model(const ModelSpec& spec, std::size_t dim, int classes) {
  if (spec.kind == "mlp") return std::make_unique<Mlp>(dim, spec.hidden, classes);
  if (spec.kind == "softmax") return std::make_unique<SoftmaxRegression>(dim, classes);
  if (spec.kind == "quadratic") return std::make_unique<LeastSquares>(dim);
  throw ConfigError("unknown model kind '" + spec.kind + "'");
}

EvalResult local_eval(const Model& model, const ParamVector& w, const Samples& test) {
  const std::size_t n = test.size();
  if (n == 0) throw ConfigError("evaluation on an empty test set");
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  EvalResult r;
  r.loss = model.loss_grad(w, test, rows, nullptr);
  if (!std::isfinite(r.loss)) throw NumericError("non-finite evaluation loss");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = model.predict(w, test.row(i));
    if (model.classifier()) {
      if (static_cast<int>(pred) == test.labels[i]) ++hits;
    } else if (std::abs(pred - test.targets[i]) < 0.5) {
      ++hits;
    }
  }
  r.accuracy = static_cast<double>(hits) / static_cast<double>(n);
  return r;
}

}  // namespace pushcen
