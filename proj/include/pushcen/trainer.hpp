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

#ifndef PUSHCEN_TRAINER_HPP
#define PUSHCEN_TRAINER_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "pushcen/data.hpp"
#include "pushcen/model.hpp"
#include "pushcen/params.hpp"
#include "pushcen/pushsum.hpp"
#include "pushcen/wcp.hpp"

namespace pushcen {

struct TrainerConfig {
  bool enabled = true;
  double lr = 0.1;
  double lambda = 0.01;
  int epochs = 1;
  std::size_t batch_size = 20;
  int clusters = 32;
  int lloyd_iters = 20;
  int value_bits = 32;
  // WCP before and after training. Off for the full-precision comparators.
  bool compress = true;
  // Overwrite w with its quantization at the pre-training encode as well.
  bool quantize_before = true;
  // Keep the unquantized post-training model locally and only send V[A].
  bool retain_full_precision = false;
  // Assert the drift and anchor-contraction inequalities at every step.
  bool check_lemmas = true;
};

void validate(const TrainerConfig& cfg);

// Warning text when lr > min(1/(8 L E), 1/(4 lambda)) for a smoothness estimate L.
std::optional<std::string> stepsize_warning(const TrainerConfig& cfg, double smoothness);

// Largest eigenvalue of A^T A / n for a least-squares shard (power iteration).
double estimate_smoothness(const Samples& data, int iters = 100);

struct Anchor {
  ParamVector target;
};

// Compressible layers from G[A]; non-compressible layers copied from `current`.
Anchor build_anchor(const CentroidTable& dictionary, const AssignmentMap& assignments, const ParamVector& current);

struct LemmaTrace {
  std::size_t steps = 0;
  double drift_sq = 0.0;        // ||w_E - w_0||^2
  double drift_bound = 0.0;     // steps * lr^2 * sum ||g + 2 lambda (w - anchor)||^2
  std::size_t contraction_checks = 0;
  std::size_t contraction_violations = 0;
  double worst_contraction_slack = 0.0;  // max of lhs - rhs (<= 0 when all hold)
  bool drift_ok = true;
};

struct LocalUpdateResult {
  // What the client keeps after the update.
  ParamVector model;
  // Post-training model before the refresh encode.
  ParamVector trained;
  ParamVector drift;
  Anchor anchor;
  PruneMask mask;
  std::optional<EncodeResult> encoding;  // the refresh encode, when compressing
  LemmaTrace trace;
  double last_loss = 0.0;
};

// Pre-encode (assignments + mask), anchor, E epochs of masked proximal SGD
// on f + lambda ||w - anchor||^2, then the refresh encode for sending.
LocalUpdateResult local_update(const PushSumState& state, const Model& model, const Samples& data,
                               const TrainerConfig& cfg, std::uint64_t seed, const std::string& context = {});

using Objective = std::function<double(const ParamVector&, ParamVector*)>;

// Max |analytic - central difference| of grad(f + lambda ||w - anchor||^2).
double reg_gradient_check(const Objective& f, const ParamVector& w, const ParamVector& anchor, double lambda,
                          double h = 1e-5);

}  // namespace pushcen

#endif  // PUSHCEN_TRAINER_HPP
