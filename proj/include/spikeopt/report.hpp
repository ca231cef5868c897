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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spikeopt/search.hpp"

namespace spikeopt {

struct ResultRow {
  std::uint64_t sequence = 0;
  EvalStatus status = EvalStatus::Pending;
  std::optional<double> objective;
  double wall_time_s = 0.0;
  std::vector<std::string> values;
};

struct ResultsTable {
  std::vector<std::string> dimensions;
  std::vector<ResultRow> rows;
};

/// Throws Errc::IoError naming the offending line and column.
ResultsTable parse_results_csv(std::string_view text, std::string_view source = "results");
ResultsTable load_results_csv(const std::filesystem::path& path);

struct ScatterPoint {
  std::uint64_t sequence;
  double objective;
};

struct HistogramBin {
  double lo;
  double hi;
  std::size_t count;
};

struct TrajectoryPoint {
  std::uint64_t sequence;
  double objective;
  double best;
};

/// Done rows in sequence order.
std::vector<ScatterPoint> objective_scatter(const ResultsTable& table);

/// Fixed-width bins covering [0, 1], widened by whole bins if any objective
/// falls outside. Bins are half-open except the last, which includes its
/// upper edge. Failed and pending rows are excluded.
std::vector<HistogramBin> objective_histogram(const ResultsTable& table, double bin_width = 0.02);

/// Running maximum over done rows in sequence order.
std::vector<TrajectoryPoint> best_so_far(const ResultsTable& table);

struct ReportFiles {
  std::filesystem::path scatter_csv, histogram_csv, trajectory_csv;
  std::filesystem::path scatter_svg, histogram_svg, trajectory_svg;
};

ReportFiles write_report(const ResultsTable& table, const std::filesystem::path& out_dir,
                         double bin_width = 0.02);

}  // namespace spikeopt
