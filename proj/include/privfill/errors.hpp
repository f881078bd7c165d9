//
// Copyright 2026 The PrivFill Authors
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
//

#ifndef PRIVFILL_ERRORS_HPP_
#define PRIVFILL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace privfill {

// Invalid argument to a mathematical or structural operation (bad epsilon,
// empty logits, out-of-range sentence index, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent input data (bad JSONL record, id mismatch).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model, classifier or embedding provider failed.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid command-line or configuration usage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace privfill

#endif  // PRIVFILL_ERRORS_HPP_
