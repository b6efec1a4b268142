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

#ifndef PUSHCEN_EXPERIMENT_HPP
#define PUSHCEN_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pushcen/config.hpp"
#include "pushcen/sim.hpp"

namespace pushcen {

struct MatrixSpec {
  ExperimentConfig base;
  std::vector<Method> methods{Method::kPushCen, Method::kAsyncDFedAvg, Method::kIndependent};
  std::vector<double> alphas{0.1, 0.4, 1.0};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t workers = 1;
  // When non-empty, every run writes <dir>/<tag>.csv and <tag>.json.
  std::string metrics_dir;
};

struct ResultRow {
  std::string label;  // method name, or the ablation variant
  Method method = Method::kPushCen;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double final_acc = 0.0;
  double acc_sd = 0.0;           // across clients
  double delayed_max_acc = 0.0;  // mean running max over delayed clients
  std::vector<double> delayed_running_max;
  std::uint64_t push_bytes = 0;  // serialized bytes of one message
  std::uint64_t total_bytes = 0;
  double relative_overhead = 0.0;
  double max_mass_drift = 0.0;
  double destroyed_mass = 0.0;
  std::size_t invariant_violations = 0;
  std::string config_hash;
};

struct SummaryRow {
  std::string label;
  double alpha = 0.0;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double mean_acc = 0.0;
  double sd_acc = 0.0;  // across seeds
  double mean_client_sd = 0.0;
  double push_bytes = 0.0;
  double total_bytes = 0.0;
  double relative_overhead = 0.0;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  bool partial = false;

  std::vector<SummaryRow> summarize() const;
  const SummaryRow* find(const std::vector<SummaryRow>& summary, const std::string& label, double alpha) const;
  std::string to_csv() const;
  std::string to_text() const;
};

struct RunTask {
  std::string label;
  std::string tag;
  ExperimentConfig cfg;
};

using ProgressFn = std::function<void(const ResultRow&)>;

// Runs independent simulations on a pool of `workers` threads; results keep
// task order.
std::vector<ResultRow> run_tasks(const std::vector<RunTask>& tasks, std::size_t workers,
                                 const std::string& metrics_dir = {}, const ProgressFn& progress = {});

// Per-push bytes divided by the push-sum method's at the same (alpha, seed).
void fill_relative_overhead(std::vector<ResultRow>& rows);

ResultsTable run_matrix(const MatrixSpec& spec, const ProgressFn& progress = {});

// Rows "full", "no_reg", "no_buffer" on identical seeds.
struct AblationRow {
  std::string variant;
  double mean_acc = 0.0;
  double sd_acc = 0.0;
  double delta = 0.0;  // versus full
  std::vector<double> per_seed;
  std::size_t failed = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  ResultsTable runs;
  std::string to_text() const;
  std::string to_csv() const;
};

AblationReport ablation_report(const ExperimentConfig& base, const std::vector<std::uint64_t>& seeds,
                               std::size_t workers = 1, const std::string& metrics_dir = {},
                               const ProgressFn& progress = {});

void write_run_outputs(const std::string& dir, const std::string& tag, const ExperimentConfig& cfg,
                       const MetricsLog& log);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pushcen

#endif  // PUSHCEN_EXPERIMENT_HPP
