// Copyright 2026 The PIFM Authors.
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

#ifndef PIFM_ERROR_H_
#define PIFM_ERROR_H_

#include <stdexcept>
#include <string>

namespace pifm {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of matrices, masks or permutations do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value violates a documented precondition (rates, step counts, sizes).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside its admissible range (e.g. t outside [0,1]).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Input file could not be parsed; carries the offending line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, long line, const std::string& what)
      : Error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) +
              ": " + what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Object used before it was trained, or optimizer without gradients.
class StateError : public Error {
 public:
  using Error::Error;
};

// Optimization diverged or the training corpus is degenerate.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Metric is undefined for the given input (empty region, single class).
class MetricError : public Error {
 public:
  using Error::Error;
};

// Graph exceeds the size the dense velocity network was configured for.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pifm

#endif  // PIFM_ERROR_H_
