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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "vcae/data.hpp"
#include "vcae/models.hpp"

namespace vcae::harness {

/// Config rejection. `key()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class DatasetKind { Mnist, Synthetic };

struct ExperimentConfig {
  models::ModelSpec model;

  std::size_t batch_size = 100;
  std::uint64_t max_steps = 0;
  /// When set, overrides max_steps with epochs * ceil(train_count / batch_size).
  std::optional<std::uint64_t> epochs;
  double learning_rate = 3e-4;

  std::uint64_t eval_every = 0;  // 0: only after the last step
  std::optional<std::size_t> eval_subset;
  std::uint64_t variance_trace_every = 0;  // 0: never
  std::size_t variance_replicas = 64;
  std::uint64_t checkpoint_every = 0;  // 0: only at the end

  std::uint64_t seed_init = 1;
  std::uint64_t seed_data = 2;
  std::uint64_t seed_noise = 3;

  std::size_t iwae_k = 100;

  DatasetKind dataset = DatasetKind::Mnist;
  std::string data_dir = "data/mnist";
  std::optional<std::string> cache_dir;
  std::optional<std::size_t> train_subset;
  std::size_t synthetic_count = 1000;
  data::Binarization binarization;

  std::string output_dir = "runs/default";
  bool record_wall_time = false;

  std::size_t nvil_hidden_units = 100;
  double nvil_decay = 0.8;

  std::string notes;
  std::optional<double> reference_iwae;
};

/// Strict parse of a flat JSON object. Required keys: variant, hidden, task.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every field, defaults included, as a flat JSON object accepted by parse_config.
nlohmann::json to_json(const ExperimentConfig& c);

std::string to_string(DatasetKind k);

}  // namespace vcae::harness
