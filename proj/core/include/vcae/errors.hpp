// Copyright 2026 The VCAE Authors
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

namespace vcae {

/// Raised when a caller breaks an operation's precondition (shape, range, count).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a function is evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by the finite-difference oracle when the probed function is non-finite.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an optimizer step sees a non-finite gradient or loss.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, unsigned long long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  unsigned long long step() const noexcept { return step_; }

 private:
  unsigned long long step_;
};

}  // namespace vcae
