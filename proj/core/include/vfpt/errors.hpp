// Copyright 2026 The vfpt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace vfpt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or extent disagreement between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration, detected before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An operation was called out of its required order.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Malformed file content. The message carries the path and byte offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Parameter bookkeeping violated (frozen/trainable partition).
class AuditError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace vfpt
