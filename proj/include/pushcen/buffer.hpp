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

#ifndef PUSHCEN_BUFFER_HPP
#define PUSHCEN_BUFFER_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <vector>

#include "pushcen/pushsum.hpp"
#include "pushcen/wcp.hpp"

namespace pushcen {

struct BufferedMessage {
  MessageId id = 0;
  ClientId sender = 0;
  double share = 0.0;
  std::uint64_t gen_event = 0;
  std::uint64_t arrival_event = 0;
  std::shared_ptr<const CentroidPayload> payload;
};

// Incoming-message buffer of one client: keeps only the newest message per
// sender (when dedup is on) and at most `capacity` entries (0 = unbounded),
// dropping the oldest on overflow.
class MessageBuffer {
 public:
  explicit MessageBuffer(std::size_t capacity = 16, bool dedup = true) : capacity_(capacity), dedup_(dedup) {}

  // Returns the entries evicted by this insert, oldest first.
  std::vector<BufferedMessage> insert(BufferedMessage msg);

  // All entries in arrival order; the buffer is empty afterwards.
  std::vector<BufferedMessage> drain();

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  bool dedup() const { return dedup_; }
  const std::deque<BufferedMessage>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  bool dedup_;
  std::deque<BufferedMessage> entries_;
};

}  // namespace pushcen

#endif  // PUSHCEN_BUFFER_HPP
