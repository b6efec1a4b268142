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

#include "pushcen/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "pushcen/errors.hpp"

namespace pushcen {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

ResultRow execute(const RunTask& task, const std::string& metrics_dir) {
  ResultRow row;
  row.label = task.label;
  row.method = task.cfg.method;
  row.alpha = task.cfg.data.alpha;
  row.seed = task.cfg.seed;
  try {
    row.config_hash = config_hash(resolve(task.cfg));
    const MetricsLog log = run(task.cfg);
    row.ok = true;
    row.final_acc = log.final_acc;
    row.acc_sd = log.final_acc_sd;
    for (std::size_t i = 0; i < log.delayed.size(); ++i) {
      if (log.delayed[i]) row.delayed_running_max.push_back(log.running_max_acc[i]);
    }
    row.delayed_max_acc = mean_of(row.delayed_running_max);
    row.push_bytes = log.max_message_bytes;
    row.total_bytes = log.bytes;
    row.max_mass_drift = log.max_mass_drift;
    row.destroyed_mass = log.rows.empty() ? 0.0 : log.rows.back().destroyed_mass;
    row.invariant_violations = log.perturbation_violations + log.lemma_violations;
    if (log.min_message_bytes != log.max_message_bytes) {
      row.ok = false;
      row.error = "per-push payload size varied across pushes";
    }
    if (!metrics_dir.empty()) write_run_outputs(metrics_dir, task.tag, task.cfg, log);
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

std::string alpha_tag(double a) { return fmt("%g", a); }

}  // namespace

std::vector<ResultRow> run_tasks(const std::vector<RunTask>& tasks, std::size_t workers,
                                 const std::string& metrics_dir, const ProgressFn& progress) {
  std::vector<ResultRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      rows[i] = execute(tasks[i], metrics_dir);
      if (progress) {
        std::lock_guard<std::mutex> lock(report);
        progress(rows[i]);
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(tasks.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

void fill_relative_overhead(std::vector<ResultRow>& rows) {
  std::map<std::pair<double, std::uint64_t>, std::uint64_t> reference;
  for (const auto& r : rows) {
    if (r.ok && r.method == Method::kPushCen && r.push_bytes > 0) reference.emplace(std::pair{r.alpha, r.seed}, r.push_bytes);
  }
  for (auto& r : rows) {
    const auto it = reference.find({r.alpha, r.seed});
    r.relative_overhead = it == reference.end() || !r.ok ? std::nan("")
                                                         : static_cast<double>(r.push_bytes) / static_cast<double>(it->second);
  }
}

ResultsTable run_matrix(const MatrixSpec& spec, const ProgressFn& progress) {
  if (spec.methods.empty() || spec.alphas.empty() || spec.seeds.empty()) throw ConfigError("empty experiment grid");
  std::vector<RunTask> tasks;
  for (double alpha : spec.alphas) {
    for (Method m : spec.methods) {
      for (std::uint64_t seed : spec.seeds) {
        RunTask t;
        t.cfg = spec.base;
        t.cfg.method = m;
        t.cfg.data.alpha = alpha;
        t.cfg.seed = seed;
        validate(resolve(t.cfg));
        t.label = to_string(m);
        t.tag = t.label + "_a" + alpha_tag(alpha) + "_s" + std::to_string(seed);
        tasks.push_back(std::move(t));
      }
    }
  }
  ResultsTable table;
  table.rows = run_tasks(tasks, spec.workers, spec.metrics_dir, progress);
  fill_relative_overhead(table.rows);
  table.partial = std::any_of(table.rows.begin(), table.rows.end(), [](const ResultRow& r) { return !r.ok; });
  return table;
}

std::vector<SummaryRow> ResultsTable::summarize() const {
  std::vector<SummaryRow> out;
  std::map<std::pair<std::string, double>, std::size_t> index;
  std::vector<std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    const auto key = std::pair{r.label, r.alpha};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.emplace_back();
      SummaryRow s;
      s.label = r.label;
      s.alpha = r.alpha;
      out.push_back(s);
    }
    groups[it->second].push_back(&r);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    SummaryRow& s = out[g];
    std::vector<double> acc, client_sd, bytes, total, overhead;
    for (const ResultRow* r : groups[g]) {
      ++s.runs;
      if (!r->ok) {
        ++s.failed;
        continue;
      }
      acc.push_back(r->final_acc);
      client_sd.push_back(r->acc_sd);
      bytes.push_back(static_cast<double>(r->push_bytes));
      total.push_back(static_cast<double>(r->total_bytes));
      if (!std::isnan(r->relative_overhead)) overhead.push_back(r->relative_overhead);
    }
    s.mean_acc = mean_of(acc);
    s.sd_acc = sd_of(acc);
    s.mean_client_sd = mean_of(client_sd);
    s.push_bytes = mean_of(bytes);
    s.total_bytes = mean_of(total);
    s.relative_overhead = overhead.empty() ? std::nan("") : mean_of(overhead);
  }
  return out;
}

const SummaryRow* ResultsTable::find(const std::vector<SummaryRow>& summary, const std::string& label,
                                     double alpha) const {
  for (const auto& s : summary) {
    if (s.label == label && s.alpha == alpha) return &s;
  }
  return nullptr;
}

std::string ResultsTable::to_csv() const {
  std::string out =
      "method,alpha,seed,status,final_acc,acc_sd,delayed_max_acc,push_bytes,relative_overhead,total_bytes,"
      "max_mass_drift,destroyed_mass,invariant_violations,config_hash,error\n";
  char buf[512];
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%llu,%s,%.17g,%.17g,%.17g,%llu,%.17g,%llu,%.17g,%.17g,%zu,%s,", r.label.c_str(),
                  r.alpha, static_cast<unsigned long long>(r.seed), r.ok ? "ok" : "failed", r.final_acc, r.acc_sd,
                  r.delayed_max_acc, static_cast<unsigned long long>(r.push_bytes), r.relative_overhead,
                  static_cast<unsigned long long>(r.total_bytes), r.max_mass_drift, r.destroyed_mass,
                  r.invariant_violations, r.config_hash.c_str());
    out += buf;
    out += err + "\n";
  }
  return out;
}

std::string ResultsTable::to_text() const {
  const auto summary = summarize();
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-14s %6s %5s %9s %8s %9s %11s %9s\n", "method", "alpha", "runs", "acc(%)", "sd",
                "client_sd", "push_bytes", "overhead");
  out += buf;
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof(buf), "%-14s %6g %5zu %9.2f %8.2f %9.2f %11.0f %9s%s\n", s.label.c_str(), s.alpha, s.runs,
                  100.0 * s.mean_acc, 100.0 * s.sd_acc, 100.0 * s.mean_client_sd, s.push_bytes,
                  std::isnan(s.relative_overhead) ? "-" : fmt("%.2fx", s.relative_overhead).c_str(),
                  s.failed > 0 ? ("  (" + std::to_string(s.failed) + " failed)").c_str() : "");
    out += buf;
  }
  if (partial) out += "warning: table is partial, some runs failed\n";
  return out;
}

AblationReport ablation_report(const ExperimentConfig& base, const std::vector<std::uint64_t>& seeds,
                               std::size_t workers, const std::string& metrics_dir, const ProgressFn& progress) {
  if (seeds.empty()) throw ConfigError("ablation needs at least one seed");
  const std::vector<std::string> variants{"full", "no_reg", "no_buffer"};
  std::vector<RunTask> tasks;
  for (const auto& v : variants) {
    for (std::uint64_t seed : seeds) {
      RunTask t;
      t.cfg = base;
      t.cfg.method = Method::kPushCen;
      t.cfg.seed = seed;
      t.cfg.ablations = Ablations{};
      if (v == "no_reg") t.cfg.ablations.no_reg = true;
      if (v == "no_buffer") t.cfg.ablations.no_buffer = true;
      validate(resolve(t.cfg));
      t.label = v;
      t.tag = v + "_a" + alpha_tag(base.data.alpha) + "_s" + std::to_string(seed);
      tasks.push_back(std::move(t));
    }
  }
  AblationReport report;
  report.runs.rows = run_tasks(tasks, workers, metrics_dir, progress);
  report.runs.partial =
      std::any_of(report.runs.rows.begin(), report.runs.rows.end(), [](const ResultRow& r) { return !r.ok; });
  for (const auto& v : variants) {
    AblationRow row;
    row.variant = v;
    for (const auto& r : report.runs.rows) {
      if (r.label != v) continue;
      if (r.ok) {
        row.per_seed.push_back(r.final_acc);
      } else {
        ++row.failed;
      }
    }
    row.mean_acc = mean_of(row.per_seed);
    row.sd_acc = sd_of(row.per_seed);
    report.rows.push_back(row);
  }
  for (auto& row : report.rows) row.delta = row.mean_acc - report.rows.front().mean_acc;
  return report;
}

std::string AblationReport::to_text() const {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s %9s %8s %9s %6s\n", "variant", "acc(%)", "sd", "delta", "seeds");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-10s %9.2f %8.2f %+9.2f %6zu%s\n", r.variant.c_str(), 100.0 * r.mean_acc,
                  100.0 * r.sd_acc, 100.0 * r.delta, r.per_seed.size(),
                  r.failed > 0 ? ("  (" + std::to_string(r.failed) + " failed)").c_str() : "");
    out += buf;
  }
  if (runs.partial) out += "warning: report is partial, some runs failed\n";
  return out;
}

std::string AblationReport::to_csv() const {
  std::string out = "variant,mean_acc,sd_acc,delta,seeds,failed\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%zu,%zu\n", r.variant.c_str(), r.mean_acc, r.sd_acc, r.delta,
                  r.per_seed.size(), r.failed);
    out += buf;
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("write failed for " + path);
}

void write_run_outputs(const std::string& dir, const std::string& tag, const ExperimentConfig& cfg,
                       const MetricsLog& log) {
  const std::filesystem::path base(dir);
  write_text_file((base / (tag + ".csv")).string(), log.to_csv());
  nlohmann::json manifest = run_manifest(cfg);
  const auto report = staleness_report(log);
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [k, v] : report.histogram) hist[std::to_string(k)] = v;
  manifest["summary"] = {{"final_acc", log.final_acc},
                         {"final_acc_sd", log.final_acc_sd},
                         {"activations", log.activations},
                         {"broadcasts", log.broadcasts},
                         {"deliveries", log.deliveries},
                         {"evictions", log.evictions},
                         {"bytes", log.bytes},
                         {"message_bytes", log.max_message_bytes},
                         {"max_mass_drift", log.max_mass_drift},
                         {"min_mass_share", log.min_mass_share},
                         {"perturbation_checks", log.perturbation_checks},
                         {"perturbation_violations", log.perturbation_violations},
                         {"lemma_steps", log.lemma_steps},
                         {"lemma_violations", log.lemma_violations},
                         {"staleness_max", report.max},
                         {"staleness_mean", report.mean},
                         {"staleness_histogram", hist}};
  write_text_file((base / (tag + ".json")).string(), manifest.dump(2) + "\n");
}

}  // namespace pushcen
