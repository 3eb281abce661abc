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

#include "vcae/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "vcae/metrics.hpp"

namespace vcae::harness {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
  return ticks;
}

}  // namespace

std::string render_plot(const std::vector<std::filesystem::path>& files, const PlotOptions& opt) {
  if (files.empty()) throw PlotError("no metrics files given");

  std::vector<std::string> stems;
  for (const auto& f : files) stems.push_back(f.stem().string());
  const bool stems_unique = std::set<std::string>(stems.begin(), stems.end()).size() == stems.size();

  std::vector<Series> all;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto mf = read_metrics(files[i]);
    if (std::find(mf.columns.begin(), mf.columns.end(), opt.series) == mf.columns.end() ||
        opt.series == "split") {
      throw PlotError("metrics file '" + files[i].string() + "' has no numeric column '" + opt.series + "'");
    }
    Series s;
    s.label = stems_unique ? stems[i] : files[i].parent_path().filename().string() + "/" + stems[i];
    for (const auto& r : mf.records) {
      if (opt.split && r.split != *opt.split) continue;
      const auto v = column_value(r, opt.series);
      if (!v || !std::isfinite(*v)) continue;
      if (opt.log_y && *v <= 0.0) continue;
      s.points.emplace_back(static_cast<double>(r.step), opt.log_y ? std::log10(*v) : *v);
    }
    all.push_back(std::move(s));
  }

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : all) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) {
    throw PlotError("no data: series '" + opt.series + "' is empty in every metrics file");
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (opt.log_y) {
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
    if (ymax == ymin) ymax = ymin + 1.0;
  } else if (ymax == ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  } else {
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty()) {
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(opt.title) << "</text>\n";
  }
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  // y ticks
  std::vector<double> yt;
  if (opt.log_y) {
    for (double e = ymin; e <= ymax + 1e-9; e += 1.0) yt.push_back(e);
  } else {
    yt = linear_ticks(ymin, ymax);
  }
  svg << "<g class=\"y-ticks\">\n";
  for (double t : yt) {
    const double y = sy(t);
    svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
        << "\" stroke=\"black\"/>";
    const std::string label = opt.log_y ? "1e" + std::to_string(static_cast<long>(std::lround(t))) : num(t);
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << label
        << "</text>\n";
  }
  svg << "</g>\n<g class=\"x-ticks\">\n";
  for (double t : linear_ticks(xmin, xmax)) {
    const double x = sx(t);
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(x) << "\" y2=\""
        << kTop + ph + 5 << "\" stroke=\"black\"/>";
    svg << "<text x=\"" << num(x) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << num(t)
        << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<text class=\"x-label\" x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">step</text>\n";
  svg << "<text class=\"y-label\" x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + ph / 2 << ")\">" << escape(opt.log_y ? opt.series + " (log10)" : opt.series) << "</text>\n";

  for (std::size_t i = 0; i < all.size(); ++i) {
    const char* colour = kPalette[i % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t p = 0; p < all[i].points.size(); ++p) {
      if (p != 0) svg << ' ';
      svg << num(sx(all[i].points[p].first)) << ',' << num(sy(all[i].points[p].second));
    }
    svg << "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
    svg << "<g class=\"legend\"><line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + pw + 32 << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>"
        << "<text x=\"" << kLeft + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape(all[i].label)
        << "</text></g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::vector<std::filesystem::path>& files, const PlotOptions& opt,
               const std::filesystem::path& out) {
  const std::string svg = render_plot(files, opt);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream f(out, std::ios::binary);
  if (!f) throw PlotError("cannot write '" + out.string() + "'");
  f << svg;
}

}  // namespace vcae::harness
