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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vcae/tensor.hpp"

namespace vcae::data {

/// IDX parse failure with the byte offset where parsing stopped.
class IdxError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, Truncated, DimensionOverflow };

  IdxError(Kind kind, std::size_t offset, const std::string& what);
  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dataset files are absent or unreadable. The message names what was expected.
class MissingDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unsigned-byte IDX. Magic is 0x0000_08_RR with RR the rank; images are
/// 0x00000803 and labels 0x00000801. Values are scaled by 1/255.
Tensor parse_idx(std::span<const std::uint8_t> bytes);

/// Inverse of parse_idx. Every value must be k/255 for an integer k in [0, 255].
std::vector<std::uint8_t> serialize_idx(const Tensor& t);

enum class Split { Train, Valid, Test };
std::string to_string(Split s);
Split parse_split(const std::string& s);

struct Binarization {
  enum class Mode { Threshold, SampleOnce };
  Mode mode = Mode::Threshold;
  std::uint64_t seed = 0;  // SampleOnce only

  /// "threshold(0.5)" or "sample_once(<seed>)".
  std::string describe() const;
  bool operator==(const Binarization&) const = default;
};
Binarization::Mode parse_binarization_mode(const std::string& s);

struct Dataset {
  Tensor images;  // [count, pixels], entries in {0, 1}
  Split split = Split::Train;
  Binarization binarization;

  std::size_t count() const noexcept { return images.rows(); }
};

/// Threshold: 1[p >= 0.5]. SampleOnce: one Bernoulli(p) draw per pixel from a
/// stream seeded by the descriptor, in row-major order.
Tensor binarize_static(const Tensor& images, const Binarization& b);

/// [n, 28, 28] -> [n, 784].
Tensor flatten_images(const Tensor& images);

struct Partition {
  Tensor train;  // first 50000 records
  Tensor valid;  // last 10000 records
};
inline constexpr std::size_t kRawTrainCount = 60000;
inline constexpr std::size_t kTrainCount = 50000;
inline constexpr std::size_t kValidCount = 10000;
inline constexpr std::size_t kTestCount = 10000;

Partition partition(const Tensor& raw_train);

/// Epoch permutation from `epoch_seed`, cut into batches; the final short batch is kept.
std::vector<std::vector<std::size_t>> minibatches(std::size_t count, std::size_t batch_size,
                                                  std::uint64_t epoch_seed);

/// Rows 0-13 and rows 14-27 of a 28x28 row-major image.
std::pair<Tensor, Tensor> half_split(const Tensor& image);

/// First `n` records (or all of them when n exceeds the count).
Dataset head(const Dataset& d, std::size_t n);

struct MnistSplits {
  Dataset train;
  Dataset valid;
  Dataset test;
};

inline constexpr const char* kTrainImagesFile = "train-images-idx3-ubyte";
inline constexpr const char* kTestImagesFile = "t10k-images-idx3-ubyte";

/// Loads, binarizes and partitions MNIST from `dir`. With a cache directory the
/// binarized splits are stored in a dataset-cache container keyed by the
/// binarization descriptor and reused on later calls.
MnistSplits load_mnist(const std::filesystem::path& dir, const Binarization& b,
                       const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

}  // namespace vcae::data
