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

#include "pushcen/buffer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pushcen/errors.hpp"

namespace pushcen {

std::vector<BufferedMessage> MessageBuffer::insert(BufferedMessage msg) {
  if (!(msg.share > 0.0) || !std::isfinite(msg.share)) {
    throw ProtocolError("nonpositive mass share from sender " + std::to_string(msg.sender));
  }
  std::vector<BufferedMessage> evicted;
  if (dedup_) {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const BufferedMessage& e) { return e.sender == msg.sender; });
    if (it != entries_.end()) {
      evicted.push_back(std::move(*it));
      entries_.erase(it);
    }
  }
  entries_.push_back(std::move(msg));
  while (capacity_ > 0 && entries_.size() > capacity_) {
    evicted.push_back(std::move(entries_.front()));
    entries_.pop_front();
  }
  return evicted;
}

std::vector<BufferedMessage> MessageBuffer::drain() {
  std::vector<BufferedMessage> out(std::make_move_iterator(entries_.begin()), std::make_move_iterator(entries_.end()));
  entries_.clear();
  return out;
}

}  // namespace pushcen
