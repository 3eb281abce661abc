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

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vcae::harness {

class PlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlotOptions {
  std::string series = "bound";       // metrics column on the y axis
  std::optional<std::string> split;   // keep only rows with this split label
  bool log_y = false;                 // log10 axis, ticks at powers of ten
  std::string title;
};

/// Step-vs-value line chart, one polyline per metrics file, legend from the
/// file stems (or parent directory names when stems repeat). Self-contained SVG text.
std::string render_plot(const std::vector<std::filesystem::path>& metrics_files,
                        const PlotOptions& options);

/// render_plot written to `out`. Nothing is written on error.
void emit_plot(const std::vector<std::filesystem::path>& metrics_files, const PlotOptions& options,
               const std::filesystem::path& out);

}  // namespace vcae::harness
