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

#ifndef PUSHCEN_MODEL_HPP
#define PUSHCEN_MODEL_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>

#include "pushcen/data.hpp"
#include "pushcen/params.hpp"
#include "pushcen/rng.hpp"

namespace pushcen {

// A differentiable model family over flat parameters.
class Model {
 public:
  virtual ~Model() = default;

  virtual const LayoutPtr& layout() const = 0;
  virtual std::string name() const = 0;
  virtual bool classifier() const { return true; }

  // Mean loss over `rows`; when `grad` is non-null it receives the mean gradient.
  virtual double loss_grad(const ParamVector& w, const Samples& data, std::span<const std::size_t> rows,
                           ParamVector* grad) const = 0;

  // Class index for classifiers, rounded prediction otherwise.
  virtual double predict(const ParamVector& w, std::span<const double> x) const = 0;

  virtual ParamVector initial(Rng& rng) const = 0;
};

// f(w) = 1/(2n) * sum_k (a_k . w - b_k)^2 over the rows' targets.
class LeastSquares final : public Model {
 public:
  explicit LeastSquares(std::size_t dim, bool compressible = true);
  const LayoutPtr& layout() const override { return layout_; }
  std::string name() const override { return "quadratic"; }
  bool classifier() const override { return false; }
  double loss_grad(const ParamVector& w, const Samples& data, std::span<const std::size_t> rows,
                   ParamVector* grad) const override;
  double predict(const ParamVector& w, std::span<const double> x) const override;
  ParamVector initial(Rng& rng) const override;

 private:
  std::size_t dim_;
  LayoutPtr layout_;
};

// Multinomial logistic regression: weight [C x d] (compressible), bias [C].
class SoftmaxRegression final : public Model {
 public:
  SoftmaxRegression(std::size_t dim, int classes);
  const LayoutPtr& layout() const override { return layout_; }
  std::string name() const override { return "softmax"; }
  double loss_grad(const ParamVector& w, const Samples& data, std::span<const std::size_t> rows,
                   ParamVector* grad) const override;
  double predict(const ParamVector& w, std::span<const double> x) const override;
  ParamVector initial(Rng& rng) const override;

 private:
  std::size_t dim_;
  std::size_t classes_;
  LayoutPtr layout_;
};

// One tanh hidden layer followed by a softmax output.
class Mlp final : public Model {
 public:
  Mlp(std::size_t dim, std::size_t hidden, int classes);
  const LayoutPtr& layout() const override { return layout_; }
  std::string name() const override { return "mlp"; }
  double loss_grad(const ParamVector& w, const Samples& data, std::span<const std::size_t> rows,
                   ParamVector* grad) const override;
  double predict(const ParamVector& w, std::span<const double> x) const override;
  ParamVector initial(Rng& rng) const override;

 private:
  std::size_t dim_;
  std::size_t hidden_;
  std::size_t classes_;
  LayoutPtr layout_;
};

struct ModelSpec {
  std::string kind = "mlp";  // mlp | softmax | quadratic
  std::size_t hidden = 32;
};

std::unique_ptr<Model> make_model(const ModelSpec& spec, std::size_t dim, int classes);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mean loss and top-1 accuracy on a sample set. For regression models a
// prediction counts as a hit when it lies within 0.5 of the target.
EvalResult local_eval(const Model& model, const ParamVector& w, const Samples& test);

}  // namespace pushcen

#endif  // PUSHCEN_MODEL_HPP
