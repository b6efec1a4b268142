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

#include "pushcen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "pushcen/errors.hpp"
#include "pushcen/rng.hpp"

namespace pushcen {

void validate(const TrainerConfig& cfg) {
  if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("learning rate must be finite and >= 0");
  if (!(cfg.lambda >= 0.0)) throw ConfigError("regularization weight must be >= 0");
  if (cfg.epochs < 1) throw ConfigError("local epochs must be >= 1");
  if (cfg.batch_size == 0) throw ConfigError("batch size must be positive");
  if (cfg.clusters < 2) throw ConfigError("cluster count must be >= 2");
  if (cfg.lloyd_iters < 1) throw ConfigError("Lloyd iteration cap must be >= 1");
  if (cfg.value_bits != 16 && cfg.value_bits != 32 && cfg.value_bits != 64) {
    throw ConfigError("value bit width must be 16, 32 or 64");
  }
}

std::optional<std::string> stepsize_warning(const TrainerConfig& cfg, double smoothness) {
  double limit = std::numeric_limits<double>::infinity();
  if (smoothness > 0.0) limit = 1.0 / (8.0 * smoothness * cfg.epochs);
  if (cfg.lambda > 0.0) limit = std::min(limit, 1.0 / (4.0 * cfg.lambda));
  if (cfg.lr <= limit) return std::nullopt;
  return "learning rate " + std::to_string(cfg.lr) + " exceeds the stepsize guard " + std::to_string(limit);
}

double estimate_smoothness(const Samples& data, int iters) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim;
  if (n == 0 || d == 0) return 0.0;
  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  std::vector<double> av(n);
  std::vector<double> next(d);
  double eig = 0.0;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t r = 0; r < n; ++r) {
      const auto x = data.row(r);
      av[r] = std::inner_product(x.begin(), x.end(), v.begin(), 0.0);
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto x = data.row(r);
      for (std::size_t k = 0; k < d; ++k) next[k] += av[r] * x[k];
    }
    for (double& x : next) x /= static_cast<double>(n);
    const double norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
    if (norm == 0.0) return 0.0;
    eig = norm;
    for (std::size_t k = 0; k < d; ++k) v[k] = next[k] / norm;
  }
  return eig;
}

Anchor build_anchor(const CentroidTable& dictionary, const AssignmentMap& assignments, const ParamVector& current) {
  const LayerLayout& layout = current.layout();
  if (assignments.layers.size() != layout.num_compressible() ||
      (!dictionary.layers.empty() && dictionary.num_layers() != layout.num_compressible())) {
    throw StructuralError("anchor inputs do not match the model layout");
  }
  Anchor a{current};
  std::size_t c = 0;
  for (std::size_t l = 0; l < layout.num_layers(); ++l) {
    if (!layout.layer(l).compressible) continue;
    auto dst = a.target.layer(l);
    const auto& idx = assignments.layers[c];
    if (idx.size() != dst.size()) throw StructuralError("assignment length does not match layer");
    for (std::size_t k = 0; k < dst.size(); ++k) {
      if (dictionary.layers.empty()) {
        dst[k] = 0.0;
        continue;
      }
      const auto& table = dictionary.layers[c];
      if (idx[k] >= table.size()) throw StructuralError("assignment index exceeds dictionary size");
      dst[k] = table[idx[k]];
    }
    ++c;
  }
  return a;
}

LocalUpdateResult local_update(const PushSumState& state, const Model& model, const Samples& data,
                               const TrainerConfig& cfg, std::uint64_t seed, const std::string& context) {
  validate(cfg);
  LocalUpdateResult out;
  ParamVector w = state.model;
  const CentroidTable* warm = state.dictionary.layers.empty() ? nullptr : &state.dictionary;
  const WcpOptions wcp{cfg.clusters, cfg.lloyd_iters, cfg.value_bits};

  if (cfg.compress) {
    EncodeResult pre = wcp_encode(w, wcp, warm, derive_seed(seed, {1}));
    if (cfg.quantize_before) w = pre.quantized;
    out.mask = std::move(pre.mask);
    out.anchor = build_anchor(state.dictionary, pre.payload.assignments, w);
  } else {
    out.mask = PruneMask(w.layout_ptr(), true);
    out.anchor = Anchor{w};
  }
  apply_mask_inplace(w, out.mask);
  const ParamVector start = w;

  const std::size_t n = data.size();
  if (n == 0) throw ConfigError("local update on an empty shard");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, {3});

  const double lr = cfg.lr;
  const double lam = cfg.lambda;
  // The inequalities are always measured; check_lemmas decides whether a
  // violation aborts.
  const bool check_contraction = lam > 0.0 && lr * lam <= 0.5;
  if (check_contraction) out.trace.worst_contraction_slack = -std::numeric_limits<double>::infinity();
  double step_sq_sum = 0.0;
  ParamVector grad;
  ParamVector step(w.layout_ptr());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    apply_mask_inplace(w, out.mask);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const double loss = model.loss_grad(w, data, rows, &grad);
      if (!std::isfinite(loss) || !grad.all_finite()) {
        throw NumericError("non-finite loss or gradient during local update" +
                           (context.empty() ? std::string{} : " (" + context + ")"));
      }
      out.last_loss = loss;

      auto s = step.values();
      const auto g = grad.values();
      const auto wv = w.values();
      const auto av = out.anchor.target.values();
      double u_sq = 0.0;
      for (std::size_t k = 0; k < s.size(); ++k) {
        const double u = wv[k] - av[k];
        u_sq += u * u;
        s[k] = g[k] + 2.0 * lam * u;
      }
      step_sq_sum += step.norm_sq();

      w.add_scaled(-lr, step);
      apply_mask_inplace(w, out.mask);
      ++out.trace.steps;

      if (check_contraction) {
        const double lhs = l2_dist_sq(w, out.anchor.target);
        const double rhs = (1.0 - lr * lam) * u_sq + (lr / lam) * grad.norm_sq();
        ++out.trace.contraction_checks;
        out.trace.worst_contraction_slack = std::max(out.trace.worst_contraction_slack, lhs - rhs);
        if (lhs > rhs + 1e-12 * std::max(1.0, rhs)) ++out.trace.contraction_violations;
      }
    }
  }

  out.drift = axpy(-1.0, start, w);
  out.trace.drift_sq = out.drift.norm_sq();
  out.trace.drift_bound = static_cast<double>(out.trace.steps) * lr * lr * step_sq_sum;
  out.trace.drift_ok = out.trace.drift_sq <= out.trace.drift_bound * (1.0 + 1e-12) + 1e-300;
  if (cfg.check_lemmas && (!out.trace.drift_ok || out.trace.contraction_violations > 0)) {
    throw InvariantViolation("local update broke the drift or anchor-contraction bound" +
                             (context.empty() ? std::string{} : " (" + context + ")"));
  }

  out.trained = w;
  if (cfg.compress) {
    EncodeResult post = wcp_encode(w, wcp, warm, derive_seed(seed, {2}));
    out.model = cfg.retain_full_precision ? w : post.quantized;
    out.mask = post.mask;
    out.encoding = std::move(post);
  } else {
    out.model = w;
  }
  return out;
}

double reg_gradient_check(const Objective& f, const ParamVector& w, const ParamVector& anchor, double lambda,
                          double h) {
  w.require_same_layout(anchor);
  ParamVector analytic;
  f(w, &analytic);
  analytic.add_scaled(2.0 * lambda, axpy(-1.0, anchor, w));
  auto full = [&](const ParamVector& x) { return f(x, nullptr) + lambda * l2_dist_sq(x, anchor); };
  double worst = 0.0;
  ParamVector probe = w;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + h;
    const double up = full(probe);
    probe[k] = orig - h;
    const double down = full(probe);
    probe[k] = orig;
    worst = std::max(worst, std::abs((up - down) / (2.0 * h) - analytic[k]));
  }
  return worst;
}

}  // namespace pushcen
