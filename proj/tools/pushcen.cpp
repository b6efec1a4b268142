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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pushcen/config.hpp"
#include "pushcen/errors.hpp"
#include "pushcen/experiment.hpp"
#include "pushcen/sim.hpp"
#include "pushcen/verify.hpp"
#include "pushcen/wcp.hpp"

namespace {

using namespace pushcen;

struct Overrides {
  std::string config;
  std::optional<std::string> method;
  std::optional<double> alpha;
  std::optional<std::size_t> clients;
  std::optional<std::size_t> fanout;
  std::optional<int> clusters;
  std::optional<double> lambda;
  std::optional<int> epochs;
  std::optional<std::size_t> buffer_limit;
  std::optional<std::uint64_t> seed;
  std::optional<double> delayed_frac;
  std::optional<std::size_t> events;
  bool no_reg = false;
  bool no_buffer = false;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file (defaults for anything missing)");
  app->add_option("--method", o.method, "pushcen | async-dfedavg | independent");
  app->add_option("--alpha", o.alpha, "Dirichlet concentration");
  app->add_option("--clients", o.clients, "number of clients N");
  app->add_option("--fanout", o.fanout, "out-neighbors per push");
  app->add_option("--clusters", o.clusters, "centroids per layer K");
  app->add_option("--lambda", o.lambda, "centroid regularization weight");
  app->add_option("--epochs", o.epochs, "local epochs E");
  app->add_option("--buffer-limit", o.buffer_limit, "buffer capacity L (0 = unbounded)");
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("--delayed-frac", o.delayed_frac, "fraction of delayed clients");
  app->add_option("--events", o.events, "expected number of activations T");
  app->add_flag("--no-reg", o.no_reg, "ablation: lambda = 0");
  app->add_flag("--no-buffer", o.no_buffer, "ablation: no dedup, unbounded buffer");
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.method) cfg.method = parse_method(*o.method);
  if (o.alpha) cfg.data.alpha = *o.alpha;
  if (o.clients) cfg.data.clients = *o.clients;
  if (o.fanout) cfg.topology.fanout = *o.fanout;
  if (o.clusters) cfg.trainer.clusters = *o.clusters;
  if (o.lambda) cfg.trainer.lambda = *o.lambda;
  if (o.epochs) cfg.trainer.epochs = *o.epochs;
  if (o.buffer_limit) cfg.buffer_limit = *o.buffer_limit;
  if (o.seed) cfg.seed = *o.seed;
  if (o.delayed_frac) cfg.schedule.delayed_fraction = *o.delayed_frac;
  if (o.events) cfg.schedule.events = *o.events;
  cfg.ablations.no_reg = cfg.ablations.no_reg || o.no_reg;
  cfg.ablations.no_buffer = cfg.ablations.no_buffer || o.no_buffer;
  validate(resolve(cfg));
  return cfg;
}

std::vector<std::uint64_t> seed_list(const std::vector<std::uint64_t>& explicit_seeds, std::size_t count,
                                     std::uint64_t base) {
  if (!explicit_seeds.empty()) return explicit_seeds;
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(base + i);
  return out;
}

void print_progress(const ResultRow& r) {
  if (r.ok) {
    std::fprintf(stderr, "  %-14s alpha=%-4g seed=%-3llu acc=%.4f bytes/push=%llu\n", r.label.c_str(), r.alpha,
                 static_cast<unsigned long long>(r.seed), r.final_acc, static_cast<unsigned long long>(r.push_bytes));
  } else {
    std::fprintf(stderr, "  %-14s alpha=%-4g seed=%-3llu FAILED: %s\n", r.label.c_str(), r.alpha,
                 static_cast<unsigned long long>(r.seed), r.error.c_str());
  }
}

bool any_invariant_failure(const std::vector<ResultRow>& rows) {
  for (const auto& r : rows) {
    if (!r.ok || r.invariant_violations > 0) return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Centroid-compressed push-sum asynchronous decentralized learning simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Overrides o;
  std::string out_dir = "out";
  std::size_t workers = 1;

  auto* run_cmd = app.add_subcommand("run", "run one experiment");
  add_overrides(run_cmd, o);
  run_cmd->add_option("--out", out_dir, "output directory");

  auto* matrix_cmd = app.add_subcommand("matrix", "method x alpha x seed grid");
  add_overrides(matrix_cmd, o);
  matrix_cmd->add_option("--out", out_dir, "output directory");
  std::vector<std::string> methods{"pushcen", "async-dfedavg", "independent"};
  std::vector<double> alphas{0.1, 0.4, 1.0};
  std::vector<std::uint64_t> seeds;
  std::size_t seed_count = 5;
  bool per_run = false;
  matrix_cmd->add_option("--methods", methods, "methods to run")->delimiter(',');
  matrix_cmd->add_option("--alphas", alphas, "Dirichlet concentrations")->delimiter(',');
  matrix_cmd->add_option("--seeds", seeds, "explicit seed list")->delimiter(',');
  matrix_cmd->add_option("--num-seeds", seed_count, "seeds base..base+n-1 when --seeds is absent");
  matrix_cmd->add_option("--workers", workers, "parallel simulations");
  matrix_cmd->add_flag("--per-run", per_run, "write a metrics CSV and manifest per run");

  auto* ablate_cmd = app.add_subcommand("ablate", "full / no_reg / no_buffer on identical seeds");
  add_overrides(ablate_cmd, o);
  ablate_cmd->add_option("--out", out_dir, "output directory");
  ablate_cmd->add_option("--seeds", seeds, "explicit seed list")->delimiter(',');
  ablate_cmd->add_option("--num-seeds", seed_count, "seeds base..base+n-1 when --seeds is absent");
  ablate_cmd->add_option("--workers", workers, "parallel simulations");
  ablate_cmd->add_flag("--per-run", per_run, "write a metrics CSV and manifest per run");

  auto* cost_cmd = app.add_subcommand("cost", "per-message communication cost as JSON");
  add_overrides(cost_cmd, o);
  std::optional<std::size_t> params;
  int value_bits = 32;
  cost_cmd->add_option("--params", params, "single compressible layer of this size instead of the model");
  cost_cmd->add_option("--bits", value_bits, "bits per transmitted value B");

  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suites");
  add_overrides(verify_cmd, o);
  bool full = false;
  verify_cmd->add_flag("--full", full, "also run the seed-averaged experiment checks");
  verify_cmd->add_option("--workers", workers, "parallel simulations for the experiment checks");

  auto* show_cmd = app.add_subcommand("show-config", "print the configuration (defaults plus overrides)");
  add_overrides(show_cmd, o);
  bool resolved = false;
  show_cmd->add_flag("--resolved", resolved, "print the configuration after method presets and ablations");

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = build_config(o);

    if (*show_cmd) {
      const nlohmann::json j = resolved ? nlohmann::json(resolve(cfg)) : nlohmann::json(cfg);
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*cost_cmd) {
      const auto model = make_model(cfg.model, cfg.data.features, cfg.data.classes);
      const LayoutPtr layout = params ? make_layout({{"w", *params, true}}) : model->layout();
      const CommCost c = comm_cost_bits(*layout, cfg.trainer.clusters, value_bits);
      nlohmann::json j{{"parameters", layout->total()},
                       {"compressible_parameters", layout->total() - layout->uncompressed_total()},
                       {"clusters", cfg.trainer.clusters},
                       {"value_bits", value_bits},
                       {"full_bits", c.full_bits},
                       {"wcp_bits", c.wcp_bits},
                       {"ratio", c.ratio},
                       {"relative_overhead_full", static_cast<double>(c.full_bits) / static_cast<double>(c.wcp_bits)},
                       {"header_bytes", wire_header_bytes(layout->num_layers())}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*run_cmd) {
      const MetricsLog log = run(cfg);
      write_run_outputs(out_dir, "metrics", cfg, log);
      std::filesystem::rename(std::filesystem::path(out_dir) / "metrics.json",
                              std::filesystem::path(out_dir) / "manifest.json");
      std::printf("method %s  seed %llu  config %s\n", to_string(cfg.method).c_str(),
                  static_cast<unsigned long long>(cfg.seed), config_hash(resolve(cfg)).c_str());
      std::printf("final mean accuracy %.4f (sd %.4f across clients)\n", log.final_acc, log.final_acc_sd);
      std::printf("activations %llu  pushes %llu  bytes %llu  bytes/message %llu\n",
                  static_cast<unsigned long long>(log.activations), static_cast<unsigned long long>(log.broadcasts),
                  static_cast<unsigned long long>(log.bytes), static_cast<unsigned long long>(log.max_message_bytes));
      if (log.perturbation_checks > 0) {
        std::printf("mass drift %.3g  destroyed %.6g  perturbation violations %zu/%zu\n", log.max_mass_drift,
                    log.rows.empty() ? 0.0 : log.rows.back().destroyed_mass, log.perturbation_violations,
                    log.perturbation_checks);
      }
      std::printf("wrote %s/metrics.csv and %s/manifest.json\n", out_dir.c_str(), out_dir.c_str());
      return log.perturbation_violations + log.lemma_violations > 0 ? 2 : 0;
    }

    if (*matrix_cmd) {
      MatrixSpec spec;
      spec.base = cfg;
      spec.methods.clear();
      for (const auto& m : methods) spec.methods.push_back(parse_method(m));
      spec.alphas = alphas;
      spec.seeds = seed_list(seeds, seed_count, cfg.seed);
      spec.workers = workers;
      if (per_run) spec.metrics_dir = (std::filesystem::path(out_dir) / "runs").string();
      const ResultsTable table = run_matrix(spec, print_progress);
      write_text_file((std::filesystem::path(out_dir) / "results.csv").string(), table.to_csv());
      write_text_file((std::filesystem::path(out_dir) / "results.txt").string(), table.to_text());
      write_text_file((std::filesystem::path(out_dir) / "manifest.json").string(),
                      run_manifest(cfg).dump(2) + "\n");
      std::cout << table.to_text();
      return any_invariant_failure(table.rows) ? 2 : 0;
    }

    if (*ablate_cmd) {
      const auto list = seed_list(seeds, seed_count, cfg.seed);
      const std::string dir = per_run ? (std::filesystem::path(out_dir) / "runs").string() : std::string{};
      const AblationReport report = ablation_report(cfg, list, workers, dir, print_progress);
      write_text_file((std::filesystem::path(out_dir) / "ablation.csv").string(), report.to_csv());
      write_text_file((std::filesystem::path(out_dir) / "ablation_runs.csv").string(), report.runs.to_csv());
      write_text_file((std::filesystem::path(out_dir) / "ablation.txt").string(), report.to_text());
      std::cout << report.to_text();
      return any_invariant_failure(report.runs.rows) ? 2 : 0;
    }

    if (*verify_cmd) {
      VerifyOptions opt;
      opt.experiment = cfg;
      opt.seed = cfg.seed;
      if (o.events) opt.events = *o.events;
      opt.workers = workers;
      bool ok = true;
      for (const auto& r : run_invariant_suite(opt, full)) {
        std::printf("%s %s (%.1fs): %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
        ok = ok && r.pass;
      }
      return ok ? 0 : 2;
    }
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
