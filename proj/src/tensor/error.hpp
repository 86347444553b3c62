// Copyright 2026 The Triformer Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>

namespace triformer {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid hyperparameters, patch lists, unknown config keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operand shapes that do not fit together. Reported as a configuration error.
class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Malformed or unusable input data (CSV cells, constant columns, short segments).
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by an operation, or a non-finite training loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace triformer
