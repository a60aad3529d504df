// Copyright 2026 The MTE Pricing Authors.
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

#ifndef MTE_ERRORS_HPP_
#define MTE_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace mte {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad references, duplicate ids, out-of-domain values.
// `path` names the offending field, e.g. "arcs[3].capacity".
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// The expected-cost fixed point has no solution for the current travel
// times: agents are not absorbed at the destination in finite time.
class InfeasibleInstanceError : public Error {
 public:
  using Error::Error;
};

// A linear system that must be nonsingular was not.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// A persisted artifact was written with an incompatible schema version.
class SchemaVersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace mte

#endif  // MTE_ERRORS_HPP_
