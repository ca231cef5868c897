/*
 * Copyright 2026 The spikeopt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spikeopt/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spikeopt/error.hpp"

namespace spikeopt {

namespace {

constexpr std::string_view kFixedColumns[] = {"sequence", "status", "objective", "wall_time_s"};

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void malformed(std::string_view source, std::size_t line, std::string_view column,
                            const std::string& what) {
  throw Error(Errc::IoError, std::string(source) + ": line " + std::to_string(line) + ", column '" +
                                 std::string(column) + "': " + what);
}

double parse_number(std::string_view field, std::string_view source, std::size_t line, std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
    malformed(source, line, column, "not a finite number '" + std::string(field) + "'");
  }
  return v;
}

std::vector<ResultRow> sorted_rows(const ResultsTable& table) {
  auto rows = table.rows;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return a.sequence < b.sequence; });
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

// Minimal SVG plotting: fixed canvas, linear axes, a handful of ticks.
struct Axes {
  double x0, x1, y0, y1;
  static constexpr double W = 640, H = 400, L = 60, R = 20, T = 30, B = 50;
  double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
  double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

std::string svg_open(const Axes& a, std::string_view title, std::string_view xlabel, std::string_view ylabel) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Axes::W << "\" height=\"" << Axes::H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << Axes::W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
    << "<line x1=\"" << Axes::L << "\" y1=\"" << a.py(a.y0) << "\" x2=\"" << Axes::W - Axes::R << "\" y2=\""
    << a.py(a.y0) << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << Axes::L << "\" y1=\"" << a.py(a.y0) << "\" x2=\"" << Axes::L << "\" y2=\"" << Axes::T
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double x = a.x0 + (a.x1 - a.x0) * i / 5.0;
    const double y = a.y0 + (a.y1 - a.y0) * i / 5.0;
    s << "<text x=\"" << a.px(x) << "\" y=\"" << Axes::H - Axes::B + 16 << "\" text-anchor=\"middle\">" << fmt(x)
      << "</text>\n";
    s << "<text x=\"" << Axes::L - 6 << "\" y=\"" << a.py(y) + 4 << "\" text-anchor=\"end\">" << fmt(y)
      << "</text>\n";
  }
  s << "<text x=\"" << Axes::W / 2 << "\" y=\"" << Axes::H - 10 << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n"
    << "<text x=\"14\" y=\"" << Axes::H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << Axes::H / 2
    << ")\">" << ylabel << "</text>\n";
  return s.str();
}

std::pair<double, double> objective_range(const std::vector<double>& values) {
  double lo = 0.0, hi = 1.0;
  for (const double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace

ResultsTable parse_results_csv(std::string_view text, std::string_view source) {
  ResultsTable table;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (!have_header) {
      if (fields.size() < 4) malformed(source, line_no, "header", "expected at least 4 columns");
      for (std::size_t i = 0; i < 4; ++i) {
        if (fields[i] != kFixedColumns[i]) {
          malformed(source, line_no, kFixedColumns[i],
                    "header column " + std::to_string(i + 1) + " is '" + std::string(fields[i]) + "'");
        }
      }
      for (std::size_t i = 4; i < fields.size(); ++i) table.dimensions.emplace_back(fields[i]);
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width) {
      malformed(source, line_no, fields.size() < width ? kFixedColumns[0] : "row",
                "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    ResultRow row;
    {
      std::uint64_t seq = 0;
      const auto f = fields[0];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), seq);
      if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) {
        malformed(source, line_no, "sequence", "not an unsigned integer '" + std::string(f) + "'");
      }
      row.sequence = seq;
    }
    try {
      row.status = parse_status(fields[1]);
    } catch (const Error&) {
      malformed(source, line_no, "status", "unknown status '" + std::string(fields[1]) + "'");
    }
    if (row.status == EvalStatus::Done) {
      if (fields[2].empty()) malformed(source, line_no, "objective", "missing for a done row");
      row.objective = parse_number(fields[2], source, line_no, "objective");
    } else if (!fields[2].empty()) {
      row.objective = parse_number(fields[2], source, line_no, "objective");
    }
    row.wall_time_s = parse_number(fields[3], source, line_no, "wall_time_s");
    for (std::size_t i = 4; i < fields.size(); ++i) row.values.emplace_back(fields[i]);
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(Errc::IoError, std::string(source) + ": missing header");
  return table;
}

ResultsTable load_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_results_csv(buf.str(), path.string());
}

std::vector<ScatterPoint> objective_scatter(const ResultsTable& table) {
  std::vector<ScatterPoint> out;
  for (const auto& r : sorted_rows(table)) {
    if (r.status == EvalStatus::Done) out.push_back({r.sequence, *r.objective});
  }
  return out;
}

std::vector<HistogramBin> objective_histogram(const ResultsTable& table, double bin_width) {
  if (!(bin_width > 0.0)) throw Error(Errc::ConfigError, "bin width must be positive");
  std::vector<double> values;
  for (const auto& r : table.rows) {
    if (r.status == EvalStatus::Done) values.push_back(*r.objective);
  }
  const auto [lo, hi] = objective_range(values);
  const auto first = static_cast<std::int64_t>(std::floor(lo / bin_width + 1e-9));
  auto last = static_cast<std::int64_t>(std::ceil(hi / bin_width - 1e-9));  // exclusive
  if (last <= first) last = first + 1;
  std::vector<HistogramBin> bins;
  for (auto k = first; k < last; ++k) {
    bins.push_back({static_cast<double>(k) * bin_width, static_cast<double>(k + 1) * bin_width, 0});
  }
  for (const double v : values) {
    auto k = static_cast<std::int64_t>(std::floor(v / bin_width + 1e-9));
    k = std::clamp(k, first, last - 1);
    ++bins[static_cast<std::size_t>(k - first)].count;
  }
  return bins;
}

std::vector<TrajectoryPoint> best_so_far(const ResultsTable& table) {
  std::vector<TrajectoryPoint> out;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : objective_scatter(table)) {
    best = std::max(best, p.objective);
    out.push_back({p.sequence, p.objective, best});
  }
  return out;
}

ReportFiles write_report(const ResultsTable& table, const std::filesystem::path& out_dir, double bin_width) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  ReportFiles f{out_dir / "scatter.csv",    out_dir / "histogram.csv", out_dir / "best_so_far.csv",
                out_dir / "scatter.svg",    out_dir / "histogram.svg", out_dir / "best_so_far.svg"};

  const auto scatter = objective_scatter(table);
  const auto hist = objective_histogram(table, bin_width);
  const auto traj = best_so_far(table);

  std::string text = "sequence,objective\n";
  for (const auto& p : scatter) text += std::to_string(p.sequence) + "," + format_double(p.objective) + "\n";
  write_file(f.scatter_csv, text);
  text = "bin_lo,bin_hi,count\n";
  for (const auto& b : hist) {
    text += format_double(b.lo) + "," + format_double(b.hi) + "," + std::to_string(b.count) + "\n";
  }
  write_file(f.histogram_csv, text);
  text = "sequence,objective,best\n";
  for (const auto& p : traj) {
    text += std::to_string(p.sequence) + "," + format_double(p.objective) + "," + format_double(p.best) + "\n";
  }
  write_file(f.trajectory_csv, text);

  std::vector<double> objectives;
  for (const auto& p : scatter) objectives.push_back(p.objective);
  const auto [ylo, yhi] = objective_range(objectives);
  const double xmax = scatter.empty() ? 1.0 : std::max(1.0, static_cast<double>(scatter.back().sequence));

  {
    const Axes a{0.0, xmax, ylo, yhi};
    std::ostringstream s;
    s << svg_open(a, "Objective per evaluation", "sequence", "objective");
    for (const auto& p : scatter) {
      s << "<circle cx=\"" << a.px(static_cast<double>(p.sequence)) << "\" cy=\"" << a.py(p.objective)
        << "\" r=\"2\" fill=\"steelblue\"/>\n";
    }
    s << "</svg>\n";
    write_file(f.scatter_svg, s.str());
  }
  {
    std::size_t peak = 1;
    for (const auto& b : hist) peak = std::max(peak, b.count);
    const Axes a{hist.front().lo, hist.back().hi, 0.0, static_cast<double>(peak)};
    std::ostringstream s;
    s << svg_open(a, "Objective distribution", "objective", "count");
    for (const auto& b : hist) {
      if (b.count == 0) continue;
      const double top = a.py(static_cast<double>(b.count));
      s << "<rect x=\"" << a.px(b.lo) << "\" y=\"" << top << "\" width=\"" << a.px(b.hi) - a.px(b.lo)
        << "\" height=\"" << a.py(0.0) - top << "\" fill=\"steelblue\" stroke=\"white\"/>\n";
    }
    s << "</svg>\n";
    write_file(f.histogram_svg, s.str());
  }
  {
    const Axes a{0.0, xmax, ylo, yhi};
    std::ostringstream s;
    s << svg_open(a, "Best objective so far", "sequence", "best objective");
    if (!traj.empty()) {
      s << "<polyline fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\" points=\"";
      for (const auto& p : traj) s << a.px(static_cast<double>(p.sequence)) << "," << a.py(p.best) << " ";
      s << "\"/>\n";
    }
    s << "</svg>\n";
    write_file(f.trajectory_svg, s.str());
  }
  return f;
}

}  // namespace spikeopt
