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

#include "vcae/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

#include "vcae/container.hpp"
#include "vcae/errors.hpp"
#include "vcae/rng.hpp"

namespace vcae::data {

IdxError::IdxError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
      kind_(kind),
      offset_(offset) {}

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

}  // namespace

Tensor parse_idx(std::span<const std::uint8_t> bytes) {
  using K = IdxError::Kind;
  if (bytes.size() < 4) throw IdxError(K::Truncated, bytes.size(), "IDX header shorter than magic");
  const std::uint32_t magic = read_be32(bytes, 0);
  const std::uint32_t rank = magic & 0xFFu;
  if ((magic & 0xFFFFFF00u) != 0x00000800u || rank == 0) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", magic);
    throw IdxError(K::BadMagic, 0, std::string("bad IDX magic ") + buf);
  }
  std::vector<std::size_t> shape;
  std::uint64_t total = 1;
  std::size_t off = 4;
  for (std::uint32_t i = 0; i < rank; ++i, off += 4) {
    if (bytes.size() < off + 4) throw IdxError(K::Truncated, bytes.size(), "IDX header truncated");
    const std::uint32_t dim = read_be32(bytes, off);
    total *= dim;
    if (total > kMaxElements) {
      throw IdxError(K::DimensionOverflow, off, "IDX dimensions exceed 2^32 elements");
    }
    shape.push_back(dim);
  }
  if (bytes.size() - off < total) {
    throw IdxError(K::Truncated, bytes.size(),
                   "IDX payload truncated: expected " + std::to_string(total) + " bytes after offset " +
                       std::to_string(off));
  }
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) values[i] = bytes[off + i] / 255.0;
  return Tensor(std::move(shape), std::move(values));
}

std::vector<std::uint8_t> serialize_idx(const Tensor& t) {
  const auto& shape = t.shape();
  if (shape.empty() || shape.size() > 255) throw ContractViolation("IDX rank must be in [1, 255]");
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * shape.size() + t.size());
  write_be32(out, 0x00000800u | static_cast<std::uint32_t>(shape.size()));
  for (std::size_t d : shape) {
    if (d > 0xFFFFFFFFu) throw ContractViolation("IDX dimension exceeds 32 bits");
    write_be32(out, static_cast<std::uint32_t>(d));
  }
  for (double v : t.data()) {
    const double k = std::round(v * 255.0);
    if (!(k >= 0.0 && k <= 255.0) || k / 255.0 != v) {
      throw ContractViolation("IDX value " + std::to_string(v) + " is not a multiple of 1/255");
    }
    out.push_back(static_cast<std::uint8_t>(k));
  }
  return out;
}

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  throw ContractViolation("unknown split '" + s + "' (expected train, valid or test)");
}

std::string Binarization::describe() const {
  return mode == Mode::Threshold ? "threshold(0.5)" : "sample_once(" + std::to_string(seed) + ")";
}

Binarization::Mode parse_binarization_mode(const std::string& s) {
  if (s == "threshold") return Binarization::Mode::Threshold;
  if (s == "sample_once") return Binarization::Mode::SampleOnce;
  throw ContractViolation("unknown binarization mode '" + s +
                          "' (expected threshold or sample_once)");
}

Tensor binarize_static(const Tensor& images, const Binarization& b) {
  for (double p : images.data()) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ContractViolation("binarize_static: intensity " + std::to_string(p) +
                              " outside [0, 1]");
    }
  }
  Tensor out = Tensor::zeros_like(images);
  if (b.mode == Binarization::Mode::Threshold) {
    for (std::size_t i = 0; i < images.size(); ++i) out[i] = images[i] >= 0.5 ? 1.0 : 0.0;
  } else {
    RngStream rng(b.seed);
    for (std::size_t i = 0; i < images.size(); ++i) {
      out[i] = rng.uniform01() < images[i] ? 1.0 : 0.0;
    }
  }
  return out;
}

Tensor flatten_images(const Tensor& images) {
  const auto& s = images.shape();
  if (s.size() < 2) throw ContractViolation("flatten_images expects rank >= 2, got " + shape_string(s));
  return images.reshaped({s[0], images.size() / std::max<std::size_t>(s[0], 1)});
}

Partition partition(const Tensor& raw_train) {
  if (raw_train.rows() != kRawTrainCount) {
    throw PartitionError("partition expects " + std::to_string(kRawTrainCount) +
                         " training records, got " + std::to_string(raw_train.rows()));
  }
  std::vector<std::size_t> train_idx(kTrainCount);
  std::vector<std::size_t> valid_idx(kValidCount);
  std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  std::iota(valid_idx.begin(), valid_idx.end(), kTrainCount);
  return {gather_rows(raw_train, train_idx), gather_rows(raw_train, valid_idx)};
}

std::vector<std::vector<std::size_t>> minibatches(std::size_t count, std::size_t batch_size,
                                                  std::uint64_t epoch_seed) {
  if (batch_size == 0) throw ContractViolation("batch size must be at least 1");
  std::vector<std::size_t> perm(count);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream rng(epoch_seed);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                     perm.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::pair<Tensor, Tensor> half_split(const Tensor& image) {
  if (image.size() != 784) {
    throw ContractViolation("half_split expects 784 pixels, got " + std::to_string(image.size()));
  }
  const auto d = image.data();
  Tensor top({392}, std::vector<double>(d.begin(), d.begin() + 392));
  Tensor bottom({392}, std::vector<double>(d.begin() + 392, d.end()));
  return {std::move(top), std::move(bottom)};
}

Dataset head(const Dataset& d, std::size_t n) {
  n = std::min(n, d.count());
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return {gather_rows(d.images, idx), d.split, d.binarization};
}

namespace {

Tensor read_images(const std::filesystem::path& dir, const char* name) {
  const auto path = dir / name;
  std::vector<std::uint8_t> bytes;
  try {
    bytes = pack::read_bytes(path);
  } catch (const pack::FormatError&) {
    throw MissingDataError("MNIST file '" + path.string() + "' not found; expected " +
                           kTrainImagesFile + " and " + kTestImagesFile + " in '" + dir.string() +
                           "' (uncompressed IDX)");
  }
  return flatten_images(parse_idx(bytes));
}

std::string cache_name(const Binarization& b) {
  return b.mode == Binarization::Mode::Threshold
             ? "mnist-threshold.vcaepak"
             : "mnist-sample_once-" + std::to_string(b.seed) + ".vcaepak";
}

std::optional<MnistSplits> read_cache(const std::filesystem::path& path, const Binarization& b) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  pack::Container c;
  try {
    c = pack::read_file(path);
  } catch (const pack::FormatError&) {
    return std::nullopt;  // stale or damaged cache is rebuilt
  }
  if (c.kind != pack::ContainerKind::DatasetCache || c.entries.size() != 3) return std::nullopt;
  const auto meta = nlohmann::json::parse(c.metadata, nullptr, false);
  if (meta.is_discarded() || meta.value("binarization", "") != b.describe()) return std::nullopt;
  MnistSplits s;
  s.train = {c.entries[0].value, Split::Train, b};
  s.valid = {c.entries[1].value, Split::Valid, b};
  s.test = {c.entries[2].value, Split::Test, b};
  if (s.train.count() != kTrainCount || s.valid.count() != kValidCount ||
      s.test.count() != kTestCount) {
    return std::nullopt;
  }
  return s;
}

}  // namespace

MnistSplits load_mnist(const std::filesystem::path& dir, const Binarization& b,
                       const std::optional<std::filesystem::path>& cache_dir) {
  std::optional<std::filesystem::path> cache_path;
  if (cache_dir) {
    cache_path = *cache_dir / cache_name(b);
    if (auto cached = read_cache(*cache_path, b)) return std::move(*cached);
  }

  const Tensor raw_train = read_images(dir, kTrainImagesFile);
  const Tensor raw_test = read_images(dir, kTestImagesFile);
  if (raw_test.rows() != kTestCount) {
    throw PartitionError("test file holds " + std::to_string(raw_test.rows()) + " records, expected " +
                         std::to_string(kTestCount));
  }
  // The test file draws from its own stream in sample_once mode.
  const Tensor bin_train = binarize_static(raw_train, b);
  Binarization test_b = b;
  test_b.seed = b.seed ^ 0x7e57u;
  const Tensor bin_test = binarize_static(raw_test, b.mode == Binarization::Mode::SampleOnce ? test_b : b);
  auto parts = partition(bin_train);

  MnistSplits s{{std::move(parts.train), Split::Train, b},
                {std::move(parts.valid), Split::Valid, b},
                {bin_test, Split::Test, b}};

  if (cache_path) {
    std::filesystem::create_directories(*cache_dir);
    pack::Container c;
    c.kind = pack::ContainerKind::DatasetCache;
    c.metadata = nlohmann::json{{"binarization", b.describe()}, {"source", dir.string()}}.dump();
    c.entries = {{"train", s.train.images, std::nullopt},
                 {"valid", s.valid.images, std::nullopt},
                 {"test", s.test.images, std::nullopt}};
    pack::write_file(c, *cache_path);
  }
  return s;
}

}  // namespace vcae::data
