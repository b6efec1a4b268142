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

#ifndef PUSHCEN_CONFIG_HPP
#define PUSHCEN_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pushcen/data.hpp"
#include "pushcen/model.hpp"
#include "pushcen/trainer.hpp"

namespace pushcen {

inline constexpr const char* kVersion = "0.1.0";

enum class Method { kPushCen, kAsyncDFedAvg, kIndependent };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct TopologySpec {
  std::string kind = "random";  // random | ring | fixed
  std::size_t fanout = 10;
  // Directed edges for kind == "fixed".
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

struct ScheduleSpec {
  std::string kind = "poisson";  // poisson | round_robin
  double base_rate = 1.0;
  // Per-client rates are log-uniform in [base/spread, base*spread].
  double rate_spread = 2.0;
  // Mean delivery delay as a fraction of the mean activation interval.
  double delay_factor = 0.1;
  // Expected number of activations; sets the pseudo-time horizon.
  std::size_t events = 4000;
  std::size_t eval_intervals = 60;
  double delayed_fraction = 0.1;
  // Delayed clients join uniformly in [0, join_window * horizon).
  double join_window = 0.5;
  // 0 disables enforcement.
  std::uint64_t staleness_cap = 0;
  // Initial mass of a late joiner: "unit" (s = 1) or "mean" (the mean mass
  // per online client at join time, which is s = 1 on the system's scale).
  std::string join_mass = "mean";
};

struct Ablations {
  bool no_reg = false;
  bool no_buffer = false;
};

struct ExperimentConfig {
  Method method = Method::kPushCen;
  DataSpec data;
  ModelSpec model;
  TopologySpec topology;
  ScheduleSpec schedule;
  TrainerConfig trainer;
  std::size_t buffer_limit = 16;
  bool dedup = true;
  Ablations ablations;
  std::uint64_t seed = 0;
  // Abort the run on the first invariant violation.
  bool strict = true;
};

// Applies method presets and ablation switches; the result is what runs.
ExperimentConfig resolve(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig load_config(const std::string& path);
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace pushcen

#endif  // PUSHCEN_CONFIG_HPP
