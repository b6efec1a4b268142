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
#include <filesystem>
#include <fstream>

#include "pushcen/config.hpp"
#include "pushcen/errors.hpp"
#include "pushcen/experiment.hpp"
#include "pushcen/wcp.hpp"

using namespace pushcen;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny(Method method = Method::kPushCen) {
  ExperimentConfig cfg;
  cfg.method = method;
  cfg.data.clients = 6;
  cfg.data.classes = 3;
  cfg.data.features = 6;
  cfg.data.samples_per_client = 30;
  cfg.model.kind = "softmax";
  cfg.topology.fanout = 2;
  cfg.schedule.events = 90;
  cfg.schedule.eval_intervals = 5;
  cfg.trainer.clusters = 8;
  cfg.trainer.batch_size = 10;
  return cfg;
}

ResultRow row(Method m, double alpha, std::uint64_t seed, std::uint64_t bytes) {
  ResultRow r;
  r.label = to_string(m);
  r.method = m;
  r.alpha = alpha;
  r.seed = seed;
  r.ok = true;
  r.push_bytes = bytes;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pushcen_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::kPushCen, Method::kAsyncDFedAvg, Method::kIndependent}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("fedavg"), ConfigError);
}

TEST_CASE("config json round trip") {
  ExperimentConfig cfg = tiny(Method::kAsyncDFedAvg);
  cfg.topology.kind = "fixed";
  cfg.topology.edges = {{0, 1}, {1, 0}};
  cfg.schedule.join_mass = "unit";
  cfg.ablations.no_buffer = true;
  cfg.trainer.retain_full_precision = true;
  const nlohmann::json j = cfg;
  const auto back = j.get<ExperimentConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK(config_hash(back) == config_hash(cfg));
  cfg.seed = 1;
  CHECK(config_hash(back) != config_hash(cfg));
}

TEST_CASE("missing keys take defaults") {
  const auto cfg = nlohmann::json::parse(R"({"method": "independent", "data": {"alpha": 0.1}})").get<ExperimentConfig>();
  CHECK(cfg.method == Method::kIndependent);
  CHECK(cfg.data.alpha == 0.1);
  CHECK(cfg.data.clients == ExperimentConfig{}.data.clients);
  CHECK(cfg.trainer.clusters == 32);
}

TEST_CASE("config files") {
  const fs::path dir = scratch("config");
  {
    std::ofstream f(dir / "ok.json");
    f << "{\n  // comment\n  \"seed\": 7, \"topology\": {\"fanout\": 4}\n}\n";
  }
  const auto cfg = load_config((dir / "ok.json").string());
  CHECK(cfg.seed == 7);
  CHECK(cfg.topology.fanout == 4);
  {
    std::ofstream f(dir / "bad.json");
    f << "{\"seed\": ";
  }
  CHECK_THROWS_AS(load_config((dir / "bad.json").string()), ConfigError);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("method presets") {
  const auto d = resolve(tiny(Method::kAsyncDFedAvg));
  CHECK(!d.trainer.compress);
  CHECK(d.trainer.lambda == 0.0);
  CHECK(d.buffer_limit == 0);
  CHECK(!d.dedup);

  const auto i = resolve(tiny(Method::kIndependent));
  CHECK(i.topology.fanout == 0);
  CHECK(!i.trainer.compress);

  ExperimentConfig p = tiny();
  p.seed = 5;
  p.ablations.no_reg = true;
  const auto r = resolve(p);
  CHECK(r.trainer.lambda == 0.0);
  CHECK(r.trainer.compress);
  CHECK(r.data.seed == 5);
  p.ablations = {false, true};
  CHECK(resolve(p).buffer_limit == 0);
  CHECK(!resolve(p).dedup);
}

TEST_CASE("relative overhead") {
  std::vector<ResultRow> rows = {row(Method::kPushCen, 0.1, 0, 1000), row(Method::kAsyncDFedAvg, 0.1, 0, 5340),
                                 row(Method::kAsyncDFedAvg, 0.1, 1, 5340), row(Method::kIndependent, 0.1, 0, 0)};
  fill_relative_overhead(rows);
  CHECK(rows[0].relative_overhead == 1.0);
  CHECK(rows[1].relative_overhead == doctest::Approx(5.34));
  CHECK(std::isnan(rows[2].relative_overhead));
  CHECK(rows[3].relative_overhead == 0.0);

  const auto layout = make_layout({{"w", 1000, true}});
  const CommCost c = comm_cost_bits(*layout, 32, 32);
  CHECK(c.full_bits == 32000);
  CHECK(c.wcp_bits == 5992);
  CHECK(static_cast<double>(c.full_bits) / static_cast<double>(c.wcp_bits) == doctest::Approx(5.34).epsilon(1e-3));
}

TEST_CASE("summary statistics") {
  ResultsTable t;
  auto a = row(Method::kPushCen, 0.4, 0, 100);
  a.final_acc = 0.5;
  auto b = row(Method::kPushCen, 0.4, 1, 100);
  b.final_acc = 0.7;
  auto c = row(Method::kPushCen, 0.4, 2, 100);
  c.ok = false;
  t.rows = {a, b, c};
  const auto s = t.summarize();
  const SummaryRow* p = t.find(s, "pushcen", 0.4);
  REQUIRE(p != nullptr);
  CHECK(p->runs == 3);
  CHECK(p->failed == 1);
  CHECK(p->mean_acc == doctest::Approx(0.6));
  CHECK(p->sd_acc == doctest::Approx(std::sqrt(0.02)));
  CHECK(t.find(s, "pushcen", 1.0) == nullptr);
  CHECK(t.to_csv().find("pushcen") != std::string::npos);
}

TEST_CASE("small experiment matrix") {
  MatrixSpec spec;
  spec.base = tiny();
  spec.alphas = {0.4};
  spec.seeds = {0, 1};
  spec.workers = 2;
  spec.metrics_dir = scratch("matrix").string();
  const ResultsTable t = run_matrix(spec);
  REQUIRE(t.rows.size() == 6);
  CHECK(!t.partial);
  for (const auto& r : t.rows) {
    CHECK_MESSAGE(r.ok, r.error);
    CHECK(r.invariant_violations == 0);
    if (r.method == Method::kPushCen) CHECK(r.relative_overhead == 1.0);
    if (r.method == Method::kAsyncDFedAvg) CHECK(r.relative_overhead > 1.0);
    if (r.method == Method::kIndependent) CHECK(r.total_bytes == 0);
  }
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(spec.metrics_dir)) ++files;
  CHECK(files == 12);

  // Parallel and serial execution agree.
  spec.workers = 1;
  spec.metrics_dir.clear();
  const ResultsTable serial = run_matrix(spec);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(serial.rows[i].final_acc == t.rows[i].final_acc);
    CHECK(serial.rows[i].config_hash == t.rows[i].config_hash);
  }
  fs::remove_all(fs::temp_directory_path() / "pushcen_test_matrix");
}

TEST_CASE("ablation report") {
  const auto report = ablation_report(tiny(), {0, 1});
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].variant == "full");
  CHECK(report.rows[1].variant == "no_reg");
  CHECK(report.rows[2].variant == "no_buffer");
  CHECK(report.rows[0].delta == 0.0);
  for (const auto& r : report.rows) CHECK(r.per_seed.size() == 2);

  ExperimentConfig unreg = tiny();
  unreg.trainer.lambda = 0.0;
  const auto same = ablation_report(unreg, {0, 1});
  CHECK(same.rows[1].per_seed == same.rows[0].per_seed);
  CHECK(same.rows[1].delta == 0.0);
}

TEST_CASE("per-run outputs") {
  const fs::path dir = scratch("outputs");
  const ExperimentConfig cfg = tiny();
  const MetricsLog log = run(cfg);
  write_run_outputs(dir.string(), "r0", cfg, log);
  REQUIRE(fs::exists(dir / "r0.csv"));
  REQUIRE(fs::exists(dir / "r0.json"));
  std::ifstream f(dir / "r0.json");
  const auto j = nlohmann::json::parse(f);
  CHECK(j.at("config_hash") == config_hash(resolve(cfg)));
  CHECK(j.at("seed") == cfg.seed);
  fs::remove_all(dir);
}
