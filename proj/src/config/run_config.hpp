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

#include <iosfwd>
#include <map>
#include <string>

#include "data/series.hpp"
#include "model/config.hpp"
#include "training/trainer.hpp"

namespace triformer {

// Flat `key = value` run configuration. Every documented key has a default;
// unknown keys are rejected on parse and on set. Lines starting with '#'
// are comments.
class RunConfig {
 public:
  RunConfig();

  static RunConfig parse(std::istream& in, const std::string& source = "<config>");
  static RunConfig parse_text(const std::string& text);
  static RunConfig load(const std::string& path);

  // Applies `key=value`; throws ConfigError for unknown keys or bad syntax.
  void set(const std::string& key, const std::string& value);
  void set_assignment(const std::string& assignment);
  const std::string& get(const std::string& key) const;
  bool is_set_explicitly(const std::string& key) const;

  // Canonical text, keys sorted; stable across runs.
  std::string to_text() const;

  // `variables` fills model.n when the config leaves it unset; a mismatch with
  // an explicit model.n is a ConfigError.
  TriformerConfig model_config(std::size_t variables) const;
  training::TrainConfig train_config() const;
  data::SplitSpec split_spec() const;
  bool uses_synthetic_data() const;
  data::SynthSpec synth_spec() const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

}  // namespace triformer
