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
#include <iosfwd>
#include <optional>
#include <string>

#include "vcae/config.hpp"
#include "vcae/data.hpp"
#include "vcae/estimators.hpp"
#include "vcae/metrics.hpp"
#include "vcae/models.hpp"

namespace vcae::harness {

/// Train/valid/test splits for a config: MNIST from disk, or a small
/// deterministic synthetic set of x_dim-pixel binary patterns.
data::MnistSplits load_datasets(const ExperimentConfig& c);

/// Binary patterns from a handful of prototypes with per-pixel flips.
data::Dataset synthetic_dataset(std::size_t count, std::size_t dim, std::uint64_t seed,
                                data::Split split);

/// Run directory layout.
std::filesystem::path metrics_path(const ExperimentConfig& c);
std::filesystem::path checkpoint_path(const ExperimentConfig& c);
std::filesystem::path last_good_path(const ExperimentConfig& c);

/// Steps the config asks for (epochs override max_steps).
std::uint64_t planned_steps(const ExperimentConfig& c, std::size_t train_count);

struct TrainResult {
  std::uint64_t steps = 0;
  models::BoundEstimate last_train;  // mean over the final reporting window
  std::filesystem::path checkpoint;
  std::filesystem::path metrics;
};

/// Deterministic given the config. Writes metrics.csv and checkpoint.vcaepak
/// under output_dir. On a non-finite loss or gradient the pre-step parameters
/// go to checkpoint-last-good.vcaepak and TrainingAborted is thrown.
TrainResult run_training(const ExperimentConfig& c, std::ostream* log = nullptr);

struct EvalReport {
  std::uint64_t step = 0;
  data::Split split = data::Split::Test;
  std::size_t k = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Mean per-datum IWAE (hardened for Concrete-z) over a split. The checkpoint
/// is only read. Appends one record to the run's metrics file.
EvalReport run_eval(const std::filesystem::path& checkpoint, const ExperimentConfig& c,
                    data::Split split, std::size_t k);

/// Same, for a model already in memory; writes nothing.
EvalReport evaluate(const models::Model& model, const data::Dataset& d, std::size_t k,
                    std::size_t batch_size, std::uint64_t seed);

/// Probe-only run over a checkpoint on the first training batch.
est::VarianceReport trace_variance(const std::filesystem::path& checkpoint,
                                   const ExperimentConfig& c, std::size_t replicas);

struct DataSummary {
  std::string binarization;
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
  std::size_t pixels = 0;
  double train_mean_pixel = 0.0;
};
DataSummary inspect_data(const ExperimentConfig& c);

/// Model plus step count restored from a checkpoint written by run_training.
struct LoadedModel {
  models::Model model;
  std::uint64_t step = 0;
  std::optional<est::NvilState> nvil;
};
LoadedModel load_model(const std::filesystem::path& checkpoint, const ExperimentConfig& c);

}  // namespace vcae::harness
