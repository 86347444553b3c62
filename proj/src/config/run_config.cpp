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

#include "config/run_config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "tensor/error.hpp"

namespace triformer {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> table{
      {"data.path", ""},
      {"data.synth.n", "8"},
      {"data.synth.t", "4000"},
      {"data.synth.seed", "1"},
      {"data.synth.heterogeneity", "1"},
      {"split.train", "0.6"},
      {"split.val", "0.2"},
      {"split.test", "0.2"},
      {"model.n", ""},
      {"model.h", "96"},
      {"model.f", "24"},
      {"model.d", "32"},
      {"model.m", "5"},
      {"model.a", "5"},
      {"model.patch_sizes", "6,4,4"},
      {"model.vsm", "light"},
      {"model.recurrent", "true"},
      {"model.multiscale", "true"},
      {"model.seed", "1"},
      {"model.generator_activation", "none"},
      {"model.predictor_hidden", ""},
      {"train.lr", "1e-4"},
      {"train.batch", "32"},
      {"train.max_epochs", "10"},
      {"train.patience", "3"},
      {"out.dir", "out"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::size_t to_positive(const std::string& key, const std::string& text) {
  const std::uint64_t v = to_uint(key, text);
  if (v == 0) throw ConfigError(key + " must be positive");
  return static_cast<std::size_t>(v);
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
  explicit_[key] = true;
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("expected key=value, got '" + assignment + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

bool RunConfig::is_set_explicitly(const std::string& key) const { return explicit_.count(key) > 0; }

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      cfg.set_assignment(t);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
  return os.str();
}

TriformerConfig RunConfig::model_config(std::size_t variables) const {
  TriformerConfig c;
  const std::string& n = get("model.n");
  if (!n.empty()) {
    const std::size_t declared = to_positive("model.n", n);
    if (variables != 0 && declared != variables) {
      throw ShapeError("model.n=" + n + " does not match data with " + std::to_string(variables) +
                       " variables");
    }
    c.variables = declared;
  } else {
    if (variables == 0) throw ConfigError("model.n is not set and no data was provided");
    c.variables = variables;
  }
  c.lookback = to_positive("model.h", get("model.h"));
  c.horizon = to_positive("model.f", get("model.f"));
  c.hidden = to_positive("model.d", get("model.d"));
  c.memory = to_positive("model.m", get("model.m"));
  c.middle = to_positive("model.a", get("model.a"));
  c.patch_sizes.clear();
  std::istringstream list(get("model.patch_sizes"));
  std::string item;
  while (std::getline(list, item, ',')) {
    c.patch_sizes.push_back(static_cast<std::size_t>(to_uint("model.patch_sizes", trim(item))));
  }
  c.vsm = parse_vsm_mode(get("model.vsm"));
  c.recurrent = to_bool("model.recurrent", get("model.recurrent"));
  c.multiscale = to_bool("model.multiscale", get("model.multiscale"));
  c.seed = to_uint("model.seed", get("model.seed"));
  const std::string& act = get("model.generator_activation");
  if (act == "none") {
    c.generator_activation = vsm::GeneratorActivation::none;
  } else if (act == "tanh") {
    c.generator_activation = vsm::GeneratorActivation::tanh;
  } else {
    throw ConfigError("model.generator_activation: expected none or tanh, got '" + act + "'");
  }
  const std::string& hp = get("model.predictor_hidden");
  c.predictor_hidden = hp.empty() ? 0 : to_positive("model.predictor_hidden", hp);
  return c;
}

training::TrainConfig RunConfig::train_config() const {
  training::TrainConfig t;
  t.lr = to_double("train.lr", get("train.lr"));
  if (!(t.lr > 0.0)) throw ConfigError("train.lr must be positive");
  t.batch = to_positive("train.batch", get("train.batch"));
  t.max_epochs = to_positive("train.max_epochs", get("train.max_epochs"));
  t.patience = to_positive("train.patience", get("train.patience"));
  t.seed = to_uint("model.seed", get("model.seed"));
  return t;
}

data::SplitSpec RunConfig::split_spec() const {
  return data::SplitSpec{to_double("split.train", get("split.train")),
                         to_double("split.val", get("split.val")),
                         to_double("split.test", get("split.test"))};
}

bool RunConfig::uses_synthetic_data() const { return get("data.path").empty(); }

data::SynthSpec RunConfig::synth_spec() const {
  data::SynthSpec s;
  s.variables = to_positive("data.synth.n", get("data.synth.n"));
  s.rows = to_positive("data.synth.t", get("data.synth.t"));
  s.seed = to_uint("data.synth.seed", get("data.synth.seed"));
  s.heterogeneity = to_double("data.synth.heterogeneity", get("data.synth.heterogeneity"));
  return s;
}

}  // namespace triformer
