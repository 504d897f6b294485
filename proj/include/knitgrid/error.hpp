// Copyright 2026 The knitgrid Authors
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

namespace knitgrid {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document (circuit JSON, h-TN JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Circuit too wide for the configured simulator cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// No feasible candidate exists under the requested bounds.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Quantum tensor evaluation failed; the message names the coordinate.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace knitgrid
