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

#include "vcae/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vcae::harness {

const std::vector<std::string>& metrics_header() {
  static const std::vector<std::string> cols = {
      "step",   "split",      "bound",      "recon",   "kl_s",    "kl_z",   "iwae",
      "iwae_k", "var_theta1", "var_theta2", "var_psi", "var_phi", "wall_ms"};
  return cols;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return {};
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, *v);  // shortest round-trip form
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw MetricsError("metrics line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string join_header() {
  std::string s;
  for (const auto& c : metrics_header()) {
    if (!s.empty()) s += ',';
    s += c;
  }
  return s;
}

}  // namespace

std::string format_record(const MetricsRecord& r) {
  if (r.split.find_first_of(",\n") != std::string::npos) {
    throw MetricsError("split label '" + r.split + "' contains a separator");
  }
  std::string s = std::to_string(r.step) + ',' + r.split + ',' + cell(r.bound) + ',' + cell(r.recon) +
                  ',' + cell(r.kl_s) + ',' + cell(r.kl_z) + ',' + cell(r.iwae) + ',' +
                  (r.iwae_k ? std::to_string(*r.iwae_k) : std::string{});
  for (const auto& v : r.variance) s += ',' + cell(v);
  s += ',' + cell(r.wall_ms);
  return s;
}

MetricsWriter::MetricsWriter(std::filesystem::path path, const std::string& header_json)
    : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (std::filesystem::exists(path_)) return;
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw MetricsError("cannot create metrics file '" + path_.string() + "'");
  out << "# " << header_json << '\n' << join_header() << '\n';
}

void MetricsWriter::append(const MetricsRecord& r) {
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw MetricsError("cannot append to metrics file '" + path_.string() + "'");
  out << format_record(r) << '\n';
}

MetricsFile read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MetricsError("cannot open metrics file '" + path.string() + "'");
  MetricsFile f;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.starts_with("#")) {
      f.header_json = line.size() > 2 ? line.substr(2) : std::string{};
      continue;
    }
    if (f.columns.empty()) {
      f.columns = split_csv(line);
      if (f.columns != metrics_header()) {
        throw MetricsError("metrics file '" + path.string() + "' has an unexpected column row");
      }
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != metrics_header().size()) {
      throw MetricsError("metrics line " + std::to_string(n) + " has " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(metrics_header().size()));
    }
    MetricsRecord r;
    r.step = static_cast<std::uint64_t>(*parse_double(cells[0], n));
    r.split = cells[1];
    r.bound = parse_double(cells[2], n);
    r.recon = parse_double(cells[3], n);
    r.kl_s = parse_double(cells[4], n);
    r.kl_z = parse_double(cells[5], n);
    r.iwae = parse_double(cells[6], n);
    if (auto k = parse_double(cells[7], n)) r.iwae_k = static_cast<std::uint64_t>(*k);
    for (std::size_t g = 0; g < 4; ++g) r.variance[g] = parse_double(cells[8 + g], n);
    r.wall_ms = parse_double(cells[12], n);
    f.records.push_back(std::move(r));
  }
  if (f.columns.empty()) throw MetricsError("metrics file '" + path.string() + "' has no column row");
  return f;
}

std::optional<double> column_value(const MetricsRecord& r, const std::string& column) {
  if (column == "step") return static_cast<double>(r.step);
  if (column == "bound") return r.bound;
  if (column == "recon") return r.recon;
  if (column == "kl_s") return r.kl_s;
  if (column == "kl_z") return r.kl_z;
  if (column == "iwae") return r.iwae;
  if (column == "iwae_k") return r.iwae_k ? std::optional<double>(static_cast<double>(*r.iwae_k)) : std::nullopt;
  if (column == "var_theta1") return r.variance[0];
  if (column == "var_theta2") return r.variance[1];
  if (column == "var_psi") return r.variance[2];
  if (column == "var_phi") return r.variance[3];
  if (column == "wall_ms") return r.wall_ms;
  throw MetricsError("no metrics column named '" + column + "'");
}

}  // namespace vcae::harness
