// Copyright 2026 The specloss Authors
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
#include <utility>
#include <vector>

namespace specloss {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad shape, empty input, NaN, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A numerical recursion hit a singular or unstable state.
class NumericalDegeneracy : public Error {
 public:
  using Error::Error;
};

// Reference spectrogram is (numerically) all zero, so a relative loss is undefined.
class DivisionGuard : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported WAV container. `field()` names the offending part
// of the file ("riff", "fmt", "format_code", "channels", "bit_depth", "data").
class WavFormatError : public Error {
 public:
  WavFormatError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Optimisation produced a non-finite loss. Carries the history up to and
// including the offending value.
class AbortedRun : public Error {
 public:
  AbortedRun(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& partial_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace specloss
