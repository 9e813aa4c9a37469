// Copyright 2026 The Dialret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIALRET_ERROR_H_
#define DIALRET_ERROR_H_

#include <stdexcept>
#include <string>

namespace dialret {

// Invalid input data: malformed files, invariant violations, bad configs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A lookup by id or name found nothing.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was requested in a state that does not permit it.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while computing (non-finite loss, I/O failure on write).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dialret

#endif  // DIALRET_ERROR_H_
