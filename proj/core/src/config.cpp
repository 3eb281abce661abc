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

#include "vcae/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "vcae/errors.hpp"

namespace vcae::harness {

using nlohmann::json;

namespace {

std::string type_name(const json& v) { return v.type_name(); }

[[noreturn]] void wrong_type(const std::string& key, const json& v, const char* want) {
  throw ConfigError(key, "config key '" + key + "' must be " + want + ", got " + type_name(v));
}

std::uint64_t as_u64(const std::string& key, const json& v) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    wrong_type(key, v, "a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::size_t as_positive(const std::string& key, const json& v) {
  const auto n = as_u64(key, v);
  if (n == 0) throw ConfigError(key, "config key '" + key + "' must be positive");
  return static_cast<std::size_t>(n);
}

double as_double(const std::string& key, const json& v) {
  if (!v.is_number()) wrong_type(key, v, "a number");
  return v.get<double>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) wrong_type(key, v, "a string");
  return v.get<std::string>();
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) wrong_type(key, v, "a boolean");
  return v.get<bool>();
}

template <typename F>
auto enum_value(const std::string& key, const json& v, F parse) {
  const auto s = as_string(key, v);
  try {
    return parse(s);
  } catch (const ContractViolation& e) {
    throw ConfigError(key, "config key '" + key + "': " + e.what());
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"variant", [](auto& c, auto& k, auto& v) { c.model.variant = enum_value(k, v, models::parse_variant); }},
      {"hidden", [](auto& c, auto& k, auto& v) { c.model.hidden = enum_value(k, v, models::parse_hidden); }},
      {"task", [](auto& c, auto& k, auto& v) { c.model.task = enum_value(k, v, models::parse_task); }},
      {"x_dim", [](auto& c, auto& k, auto& v) { c.model.x_dim = as_positive(k, v); }},
      {"s_dim", [](auto& c, auto& k, auto& v) { c.model.s_dim = as_positive(k, v); }},
      {"z_dim", [](auto& c, auto& k, auto& v) { c.model.z_dim = as_positive(k, v); }},
      {"temperature", [](auto& c, auto& k, auto& v) { c.model.temperature = as_double(k, v); }},
      {"hidden_units", [](auto& c, auto& k, auto& v) { c.model.hidden_units = as_positive(k, v); }},
      {"batch_size", [](auto& c, auto& k, auto& v) { c.batch_size = as_positive(k, v); }},
      {"max_steps", [](auto& c, auto& k, auto& v) { c.max_steps = as_u64(k, v); }},
      {"epochs", [](auto& c, auto& k, auto& v) { c.epochs = as_u64(k, v); }},
      {"learning_rate", [](auto& c, auto& k, auto& v) { c.learning_rate = as_double(k, v); }},
      {"eval_every", [](auto& c, auto& k, auto& v) { c.eval_every = as_u64(k, v); }},
      {"eval_subset", [](auto& c, auto& k, auto& v) { c.eval_subset = as_positive(k, v); }},
      {"variance_trace_every", [](auto& c, auto& k, auto& v) { c.variance_trace_every = as_u64(k, v); }},
      {"variance_replicas", [](auto& c, auto& k, auto& v) { c.variance_replicas = as_positive(k, v); }},
      {"checkpoint_every", [](auto& c, auto& k, auto& v) { c.checkpoint_every = as_u64(k, v); }},
      {"seed_init", [](auto& c, auto& k, auto& v) { c.seed_init = as_u64(k, v); }},
      {"seed_data", [](auto& c, auto& k, auto& v) { c.seed_data = as_u64(k, v); }},
      {"seed_noise", [](auto& c, auto& k, auto& v) { c.seed_noise = as_u64(k, v); }},
      {"iwae_k", [](auto& c, auto& k, auto& v) { c.iwae_k = as_positive(k, v); }},
      {"dataset", [](auto& c, auto& k, auto& v) {
         const auto s = as_string(k, v);
         if (s == "mnist") c.dataset = DatasetKind::Mnist;
         else if (s == "synthetic") c.dataset = DatasetKind::Synthetic;
         else throw ConfigError(k, "config key 'dataset' must be mnist or synthetic, got '" + s + "'");
       }},
      {"data_dir", [](auto& c, auto& k, auto& v) { c.data_dir = as_string(k, v); }},
      {"cache_dir", [](auto& c, auto& k, auto& v) { c.cache_dir = as_string(k, v); }},
      {"train_subset", [](auto& c, auto& k, auto& v) { c.train_subset = as_positive(k, v); }},
      {"synthetic_count", [](auto& c, auto& k, auto& v) { c.synthetic_count = as_positive(k, v); }},
      {"binarization", [](auto& c, auto& k, auto& v) {
         c.binarization.mode = enum_value(k, v, data::parse_binarization_mode);
       }},
      {"binarization_seed", [](auto& c, auto& k, auto& v) { c.binarization.seed = as_u64(k, v); }},
      {"output_dir", [](auto& c, auto& k, auto& v) { c.output_dir = as_string(k, v); }},
      {"record_wall_time", [](auto& c, auto& k, auto& v) { c.record_wall_time = as_bool(k, v); }},
      {"nvil_hidden_units", [](auto& c, auto& k, auto& v) { c.nvil_hidden_units = as_positive(k, v); }},
      {"nvil_decay", [](auto& c, auto& k, auto& v) { c.nvil_decay = as_double(k, v); }},
      {"notes", [](auto& c, auto& k, auto& v) { c.notes = as_string(k, v); }},
      {"reference_iwae", [](auto& c, auto& k, auto& v) { c.reference_iwae = as_double(k, v); }},
  };
  return table;
}

}  // namespace

std::string to_string(DatasetKind k) { return k == DatasetKind::Mnist ? "mnist" : "synthetic"; }

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object, got " + type_name(j));
  for (const char* key : {"variant", "hidden", "task"}) {
    if (!j.contains(key)) throw ConfigError(key, std::string("config is missing required key '") + key + "'");
  }
  ExperimentConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown config key '" + key + "'");
    if (value.is_null() && (key == "epochs" || key == "eval_subset" || key == "cache_dir" ||
                            key == "train_subset" || key == "reference_iwae")) {
      continue;  // explicit null keeps an optional unset
    }
    it->second(c, key, value);
  }
  if (!(c.model.temperature > 0.0)) throw ConfigError("temperature", "config key 'temperature' must be positive");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate", "config key 'learning_rate' must be positive");
  if (!(c.nvil_decay >= 0.0 && c.nvil_decay < 1.0)) {
    throw ConfigError("nvil_decay", "config key 'nvil_decay' must lie in [0, 1)");
  }
  if (c.variance_replicas < 2) {
    throw ConfigError("variance_replicas", "config key 'variance_replicas' must be at least 2");
  }
  if (c.dataset == DatasetKind::Mnist && c.model.x_dim != 784) {
    throw ConfigError("x_dim", "config key 'x_dim' must be 784 for the mnist dataset");
  }
  try {
    c.model.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError("variant", std::string("invalid model: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
  return json{
      {"variant", models::to_string(c.model.variant)},
      {"hidden", models::to_string(c.model.hidden)},
      {"task", models::to_string(c.model.task)},
      {"x_dim", c.model.x_dim},
      {"s_dim", c.model.s_dim},
      {"z_dim", c.model.z_dim},
      {"temperature", c.model.temperature},
      {"hidden_units", c.model.hidden_units},
      {"batch_size", c.batch_size},
      {"max_steps", c.max_steps},
      {"epochs", opt(c.epochs)},
      {"learning_rate", c.learning_rate},
      {"eval_every", c.eval_every},
      {"eval_subset", opt(c.eval_subset)},
      {"variance_trace_every", c.variance_trace_every},
      {"variance_replicas", c.variance_replicas},
      {"checkpoint_every", c.checkpoint_every},
      {"seed_init", c.seed_init},
      {"seed_data", c.seed_data},
      {"seed_noise", c.seed_noise},
      {"iwae_k", c.iwae_k},
      {"dataset", to_string(c.dataset)},
      {"data_dir", c.data_dir},
      {"cache_dir", opt(c.cache_dir)},
      {"train_subset", opt(c.train_subset)},
      {"synthetic_count", c.synthetic_count},
      {"binarization",
       c.binarization.mode == data::Binarization::Mode::Threshold ? "threshold" : "sample_once"},
      {"binarization_seed", c.binarization.seed},
      {"output_dir", c.output_dir},
      {"record_wall_time", c.record_wall_time},
      {"nvil_hidden_units", c.nvil_hidden_units},
      {"nvil_decay", c.nvil_decay},
      {"notes", c.notes},
      {"reference_iwae", opt(c.reference_iwae)},
  };
}

}  // namespace vcae::harness
