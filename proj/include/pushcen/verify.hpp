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

#ifndef PUSHCEN_VERIFY_HPP
#define PUSHCEN_VERIFY_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pushcen/config.hpp"

namespace pushcen {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t events = 10000;          // long invariant runs
  std::size_t buffer_sequences = 100000;
  std::size_t codec_roundtrips = 1000;
  std::size_t lloyd_instances = 100;
  std::size_t small_instances = 200;
  std::size_t lemma_updates = 100;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};  // experiment checks
  std::size_t workers = 1;
  // Base configuration for the experiment checks (alpha and method are set per check).
  ExperimentConfig experiment;
};

// Exhaustive optimum of the zero-pinned clustering objective: slot 0 is fixed
// at 0, the other K-1 slots sit at their cluster means. Exponential in n.
double brute_force_distortion(std::span<const double> points, int clusters);

// Lloyd from the codec's seeded init, scored after a final assignment.
double lloyd_distortion(std::span<const double> points, int clusters, std::uint64_t seed, int max_iters = 20);

// Invariant checks over a default run: mass conservation and the numerator
// perturbation bound.
std::vector<CheckResult> check_default_run(const VerifyOptions& opt);
CheckResult check_average_preservation(const VerifyOptions& opt);
CheckResult check_consensus_contraction(const VerifyOptions& opt);
CheckResult check_compression_ratio(const VerifyOptions& opt);
CheckResult check_codec(const VerifyOptions& opt);
CheckResult check_buffer(const VerifyOptions& opt);
CheckResult check_trainer_lemmas(const VerifyOptions& opt);
CheckResult check_determinism(const VerifyOptions& opt);

// Seed-averaged experiment checks. The end-to-end grid runs at alpha 0.1,
// the ablation at 0.4, and the delayed-client comparison at the base
// configuration's alpha.
CheckResult check_end_to_end(const VerifyOptions& opt);
CheckResult check_delayed_clients(const VerifyOptions& opt);
CheckResult check_ablation(const VerifyOptions& opt);

// The invariant checks above, in order; experiment checks when `full`.
std::vector<CheckResult> run_invariant_suite(const VerifyOptions& opt, bool full);

}  // namespace pushcen

#endif  // PUSHCEN_VERIFY_HPP
