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

#include <algorithm>
#include <cmath>
#include <random>

#include "pushcen/errors.hpp"
#include "pushcen/pushsum.hpp"

using namespace pushcen;

namespace {

const LayoutPtr kScalar = make_layout({{"w", 1, true}});

ParamVector scalar(double v) { return ParamVector(kScalar, {v}); }

PushSumState state_of(double mass, double w) {
  PushSumState s;
  s.mass = mass;
  s.model = scalar(w);
  s.mask = PruneMask(kScalar, true);
  return s;
}

DecodedMessage msg(double share, double w, ClientId from = 1) {
  DecodedMessage m;
  m.model = scalar(w);
  m.share = share;
  m.sender = from;
  return m;
}

}  // namespace

TEST_CASE("aggregate") {
  const PushSumState s = state_of(1.0, 2.0);
  SUBCASE("empty buffer leaves the state alone") {
    const PushSumState out = aggregate(s, {});
    CHECK(out.mass == 1.0);
    CHECK(out.model == s.model);
  }
  SUBCASE("one message") {
    const std::vector<DecodedMessage> b{msg(0.5, 4.0)};
    const PushSumState out = aggregate(s, b);
    CHECK(out.mass == 1.5);
    CHECK(out.model[0] == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("vanishing own mass") {
    const std::vector<DecodedMessage> b{msg(0.25, 7.0, 1), msg(0.25, 7.0, 2)};
    const PushSumState out = aggregate(state_of(1e-14, -50.0), b);
    CHECK(out.model[0] == doctest::Approx(7.0).epsilon(1e-11));
  }
  SUBCASE("nonpositive share") {
    const std::vector<DecodedMessage> b{msg(0.0, 4.0)};
    CHECK_THROWS_AS(aggregate(s, b), ProtocolError);
    const std::vector<DecodedMessage> neg{msg(-1.0, 4.0)};
    CHECK_THROWS_AS(aggregate(s, neg), ProtocolError);
  }
}

TEST_CASE("dictionaries mix slot by slot with the model weights") {
  PushSumState s = state_of(1.0, 0.0);
  s.dictionary.layers = {{0.0, -1.0, 2.0}};
  DecodedMessage m = msg(3.0, 1.0);
  m.tables.layers = {{0.0, -2.0, 6.0}};
  const std::vector<DecodedMessage> b{m};
  const PushSumState out = aggregate(s, b);
  REQUIRE(out.dictionary.layers.size() == 1);
  CHECK(out.dictionary.layers[0][0] == 0.0);
  CHECK(out.dictionary.layers[0][1] == doctest::Approx(-1.75));
  CHECK(out.dictionary.layers[0][2] == doctest::Approx(5.0));
}

TEST_CASE("uniform averaging ignores mass") {
  const std::vector<DecodedMessage> b{msg(0.01, 4.0), msg(100.0, 6.0)};
  const PushSumState out = aggregate_uniform(state_of(0.3, 2.0), b);
  CHECK(out.mass == 0.3);
  CHECK(out.model[0] == doctest::Approx(4.0));
}

TEST_CASE("split_mass") {
  PushSumState s = state_of(1.0, 0.0);
  MassSplit m = split_mass(s, 0);
  CHECK(m.retained == 1.0);
  CHECK(m.share == 1.0);
  CHECK(s.mass == 1.0);

  m = split_mass(s, 10);
  CHECK(m.share == doctest::Approx(1.0 / 11.0).epsilon(1e-16));
  CHECK(m.retained == m.share);
  CHECK(s.mass == m.retained);
  CHECK(std::abs(10 * m.share + m.retained - 1.0) <= 1e-15);
}

TEST_CASE("property: aggregation is a convex combination") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> pos(1e-6, 2.0);
  const auto l = make_layout({{"a", 7, true}, {"b", 2, false}});
  for (int t = 0; t < 300; ++t) {
    PushSumState s;
    s.mass = pos(rng);
    s.model = ParamVector(l);
    for (double& v : s.model.values()) v = u(rng);
    std::vector<DecodedMessage> b(1 + rng() % 6);
    for (auto& m : b) {
      m.model = ParamVector(l);
      for (double& v : m.model.values()) v = u(rng);
      m.share = pos(rng);
    }
    const PushSumState out = aggregate(s, b);
    double total = s.mass;
    for (const auto& m : b) total += m.share;
    REQUIRE(out.mass == doctest::Approx(total).epsilon(1e-15));
    for (std::size_t k = 0; k < l->total(); ++k) {
      double lo = s.model[k];
      double hi = s.model[k];
      for (const auto& m : b) {
        lo = std::min(lo, m.model[k]);
        hi = std::max(hi, m.model[k]);
      }
      REQUIRE(out.model[k] >= lo - 1e-12);
      REQUIRE(out.model[k] <= hi + 1e-12);
    }
  }
}

TEST_CASE("ledger broadcast perturbation") {
  SUBCASE("lossless message") {
    SystemLedger ledger(kScalar);
    ledger.on_join(0, 1.0, scalar(3.0));
    const std::vector<std::pair<MessageId, double>> shares{{0, 0.5}};
    const auto s = ledger.on_broadcast(0, 0.5, shares, std::make_shared<const ParamVector>(scalar(3.0)), scalar(3.0));
    CHECK(s.measured == 0.0);
    CHECK(!s.violated);
  }
  SUBCASE("scalar model with error 0.1 kept at full precision") {
    SystemLedger ledger(kScalar);
    ledger.on_join(0, 1.0, scalar(1.0));
    const double y0 = ledger.y_total();
    const std::vector<std::pair<MessageId, double>> shares{{0, 0.5}};
    const auto s = ledger.on_broadcast(0, 0.5, shares, std::make_shared<const ParamVector>(scalar(1.1)), scalar(1.0));
    CHECK(s.measured == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(s.bound == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(!s.violated);
    CHECK(ledger.y_total() == y0);
  }
  SUBCASE("replacing the sender's model by its quantization exceeds the bound") {
    SystemLedger ledger(kScalar);
    ledger.on_join(0, 1.0, scalar(1.0));
    const std::vector<std::pair<MessageId, double>> shares{{0, 0.5}};
    const auto s = ledger.on_broadcast(0, 0.5, shares, std::make_shared<const ParamVector>(scalar(1.1)), scalar(1.1));
    CHECK(s.measured == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.violated);
    CHECK(ledger.violations() == 1);
  }
}

TEST_CASE("ledger reference and consensus error") {
  SystemLedger ledger(kScalar);
  ledger.on_join(0, 1.0, scalar(0.0));
  ledger.on_join(1, 3.0, scalar(4.0));
  const std::vector<ClientId> ids{0, 1};
  const LedgerReference r = ledger.reference(ids);
  CHECK(r.mean[0] == doctest::Approx(3.0));
  CHECK(r.consensus_error == doctest::Approx(5.0));

  SystemLedger same(kScalar);
  same.on_join(0, 1.0, scalar(2.5));
  same.on_join(1, 0.2, scalar(2.5));
  const LedgerReference z = same.reference(ids);
  CHECK(z.mean[0] == doctest::Approx(2.5));
  CHECK(z.consensus_error == doctest::Approx(0.0));
}

TEST_CASE("ledger follows a lossless gossip exchange") {
  SystemLedger ledger(kScalar);
  PushSumState a = state_of(1.0, 0.0);
  PushSumState b = state_of(1.0, 6.0);
  ledger.on_join(0, a.mass, a.model);
  ledger.on_join(1, b.mass, b.model);
  const auto mean0 = ledger.reference({}).mean[0];

  // a pushes to b, b aggregates, b pushes to a, a aggregates.
  MassSplit sa = split_mass(a, 1);
  std::vector<std::pair<MessageId, double>> shares{{10, sa.share}};
  ledger.on_broadcast(0, sa.retained, shares, std::make_shared<const ParamVector>(a.model), a.model);
  CHECK(ledger.in_flight() == 1);
  CHECK(ledger.reference({}).mean[0] == doctest::Approx(mean0).epsilon(1e-15));

  std::vector<DecodedMessage> inbox{msg(sa.share, a.model[0], 0)};
  b = aggregate(b, inbox);
  const std::vector<MessageId> consumed{10};
  ledger.on_aggregate(1, consumed, b.mass, b.model);
  CHECK(ledger.in_flight() == 0);
  CHECK(ledger.reference({}).mean[0] == doctest::Approx(mean0).epsilon(1e-15));
  CHECK(ledger.mass_drift() <= 1e-15);

  MassSplit sb = split_mass(b, 1);
  shares = {{11, sb.share}};
  ledger.on_broadcast(1, sb.retained, shares, std::make_shared<const ParamVector>(b.model), b.model);
  ledger.on_evict(11);
  CHECK(ledger.destroyed_mass() == sb.share);
  CHECK(ledger.mass_drift() <= 1e-15);
  CHECK(ledger.y_total() == doctest::Approx(2.0 - sb.share));
}

TEST_CASE("ledger catches inconsistent aggregation mass") {
  SystemLedger ledger(kScalar);
  ledger.on_join(0, 1.0, scalar(0.0));
  ledger.on_join(1, 1.0, scalar(1.0));
  const std::vector<std::pair<MessageId, double>> shares{{0, 0.5}};
  ledger.on_broadcast(0, 0.5, shares, std::make_shared<const ParamVector>(scalar(0.0)), scalar(0.0));
  const std::vector<MessageId> consumed{0};
  CHECK_THROWS_AS(ledger.on_aggregate(1, consumed, 1.7, scalar(0.5)), InvariantViolation);
}
