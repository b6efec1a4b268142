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

#ifndef PUSHCEN_ERRORS_HPP
#define PUSHCEN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pushcen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or layout disagreement between operands.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf in weights, losses or gradients.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A peer sent something the protocol forbids (e.g. a nonpositive mass share).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class CorruptPayload : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A runtime check of a conservation law or descent inequality failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace pushcen

#endif  // PUSHCEN_ERRORS_HPP
