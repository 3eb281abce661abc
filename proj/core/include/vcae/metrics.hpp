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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vcae::harness {

/// One CSV row. Unset fields are written as empty cells.
struct MetricsRecord {
  std::uint64_t step = 0;
  std::string split;
  std::optional<double> bound;
  std::optional<double> recon;
  std::optional<double> kl_s;
  std::optional<double> kl_z;
  std::optional<double> iwae;
  std::optional<std::uint64_t> iwae_k;
  std::array<std::optional<double>, 4> variance{};  // theta1, theta2, psi, phi
  std::optional<double> wall_ms;

  bool operator==(const MetricsRecord&) const = default;
};


/// Column order as written to disk.
const std::vector<std::string>& metrics_header();

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only CSV writer. A new file starts with "# <header_json>" and the
/// column row; an existing file is appended to as is.
class MetricsWriter {
 public:
  MetricsWriter(std::filesystem::path path, const std::string& header_json);
  void append(const MetricsRecord& r);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

std::string format_record(const MetricsRecord& r);

struct MetricsFile {
  std::string header_json;
  std::vector<std::string> columns;
  std::vector<MetricsRecord> records;
};

MetricsFile read_metrics(const std::filesystem::path& path);

/// Value of a named column in a record; throws MetricsError for unknown names.
std::optional<double> column_value(const MetricsRecord& r, const std::string& column);

}  // namespace vcae::harness
