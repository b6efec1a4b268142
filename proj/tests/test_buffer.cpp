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

#include "pushcen/buffer.hpp"
#include "pushcen/errors.hpp"
#include "pushcen/verify.hpp"

using namespace pushcen;

namespace {

BufferedMessage from(ClientId sender, MessageId id, double share = 0.1) {
  BufferedMessage m;
  m.id = id;
  m.sender = sender;
  m.share = share;
  m.gen_event = id;
  return m;
}

std::vector<MessageId> ids(const MessageBuffer& b) {
  std::vector<MessageId> out;
  for (const auto& e : b.entries()) out.push_back(e.id);
  return out;
}

}  // namespace

TEST_CASE("insert") {
  MessageBuffer b(16, true);
  CHECK(b.insert(from(3, 1)).empty());
  CHECK(b.size() == 1);

  const auto evicted = b.insert(from(3, 2));
  REQUIRE(evicted.size() == 1);
  CHECK(evicted[0].id == 1);
  CHECK(ids(b) == std::vector<MessageId>{2});
}

TEST_CASE("capacity drops the oldest") {
  MessageBuffer b(2, true);
  b.insert(from(1, 10));
  b.insert(from(2, 11));
  const auto evicted = b.insert(from(3, 12));
  REQUIRE(evicted.size() == 1);
  CHECK(evicted[0].id == 10);
  CHECK(ids(b) == std::vector<MessageId>{11, 12});
}

TEST_CASE("dedup eviction is reported before overflow eviction") {
  MessageBuffer b(2, true);
  b.insert(from(1, 10));
  b.insert(from(2, 11));
  const auto evicted = b.insert(from(2, 12));
  REQUIRE(evicted.size() == 1);
  CHECK(evicted[0].id == 11);
  CHECK(ids(b) == std::vector<MessageId>{10, 12});
}

TEST_CASE("unbounded buffer without dedup keeps everything in order") {
  MessageBuffer b(0, false);
  for (MessageId i = 0; i < 100; ++i) CHECK(b.insert(from(static_cast<ClientId>(i % 3), i)).empty());
  const auto drained = b.drain();
  REQUIRE(drained.size() == 100);
  for (MessageId i = 0; i < 100; ++i) CHECK(drained[i].id == i);
}

TEST_CASE("drain") {
  MessageBuffer b;
  CHECK(b.drain().empty());
  b.insert(from(4, 1));
  CHECK(b.drain().size() == 1);
  CHECK(b.empty());
  CHECK(b.drain().empty());
}

TEST_CASE("nonpositive share is a protocol violation") {
  MessageBuffer b;
  CHECK_THROWS_AS(b.insert(from(1, 1, 0.0)), ProtocolError);
  CHECK_THROWS_AS(b.insert(from(1, 1, -0.5)), ProtocolError);
  CHECK(b.empty());
}

TEST_CASE("property: random insert sequences against a reference FIFO") {
  VerifyOptions opt;
  opt.buffer_sequences = 5000;
  const CheckResult r = check_buffer(opt);
  INFO(r.detail);
  CHECK(r.pass);
}
