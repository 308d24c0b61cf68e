// Copyright 2026 The pbekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace pbekit {

// Base for every error the library throws on contract violations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition did not hold (empty rule source, bad bounds, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Input documents (configs, datasets, JSONL logs) failed schema validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An exhaustive search was asked to exceed its configured capacity.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Remote chat endpoint failures: exhausted retries, auth, malformed envelope.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int status = 0)
      : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace pbekit
