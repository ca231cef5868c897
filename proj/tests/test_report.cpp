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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <unistd.h>

#include "spikeopt/report.hpp"
#include "support.hpp"

using namespace spikeopt;
using spikeopt::testing::error_code_of;
namespace fs = std::filesystem;

namespace {

const char* kThreeRows =
    "sequence,status,objective,wall_time_s,syn.lr\n"
    "2,done,0.95,1.0,0.01\n"
    "0,done,0.105,2.5,0.2\n"
    "1,done,0.11,0.5,0.001\n";

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("histogram of a known three-row table") {
  const auto t = parse_results_csv(kThreeRows);
  CHECK(t.dimensions == std::vector<std::string>{"syn.lr"});
  const auto h = objective_histogram(t, 0.02);
  REQUIRE(h.size() == 50);
  CHECK(h[0].lo == 0.0);
  CHECK(h[49].hi == doctest::Approx(1.0));
  std::size_t total = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    total += h[i].count;
    if (i == 5) CHECK(h[i].count == 2);        // [0.10, 0.12)
    else if (i == 47) CHECK(h[i].count == 1);  // [0.94, 0.96)
    else CHECK(h[i].count == 0);
  }
  CHECK(total == 3);
}

TEST_CASE("histogram edges: 0 and 1 are inside, outliers widen the range") {
  const auto t = parse_results_csv(
      "sequence,status,objective,wall_time_s\n0,done,0,1\n1,done,1,1\n2,done,1.03,1\n3,done,-0.05,1\n");
  const auto h = objective_histogram(t, 0.02);
  CHECK(h.front().lo == doctest::Approx(-0.06));
  CHECK(h.back().hi == doctest::Approx(1.04));
  std::size_t total = 0;
  for (const auto& b : h) {
    total += b.count;
    if (b.lo <= 1.0 + 1e-9 && 1.0 < b.hi - 1e-9) CHECK(b.count == 1);  // 1.0 itself
  }
  CHECK(total == 4);
}

TEST_CASE("failed and pending rows are excluded") {
  const auto t = parse_results_csv(
      "sequence,status,objective,wall_time_s\n0,done,0.5,1\n1,failed,,1\n2,pending,,0\n3,done,0.3,1\n");
  std::size_t total = 0;
  for (const auto& b : objective_histogram(t)) total += b.count;
  CHECK(total == 2);
  CHECK(objective_scatter(t).size() == 2);
  CHECK(best_so_far(t).size() == 2);
}

TEST_CASE("scatter and best-so-far follow sequence order and never decrease") {
  const auto t = parse_results_csv(kThreeRows);
  const auto s = objective_scatter(t);
  REQUIRE(s.size() == 3);
  CHECK(s[0].sequence == 0);
  CHECK(s[0].objective == 0.105);
  const auto b = best_so_far(t);
  REQUIRE(b.size() == 3);
  CHECK(b[0].best == 0.105);
  CHECK(b[1].best == 0.11);
  CHECK(b[2].best == 0.95);

  std::string text = "sequence,status,objective,wall_time_s\n";
  Rng rng(1);
  for (int i = 0; i < 200; ++i) text += std::to_string(i) + ",done," + format_double(uniform01(rng)) + ",1\n";
  const auto traj = best_so_far(parse_results_csv(text));
  for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj[i].best >= traj[i - 1].best);
}

TEST_CASE("malformed CSV names line and column") {
  CHECK(error_code_of([] { parse_results_csv(""); }) == Errc::IoError);
  CHECK(message_of([] { parse_results_csv("seq,status,objective,wall_time_s\n", "r.csv"); }).find("r.csv: line 1") !=
        std::string::npos);
  const auto bad_obj = message_of(
      [] { parse_results_csv("sequence,status,objective,wall_time_s\n0,done,0.5,1\n1,done,abc,1\n", "r.csv"); });
  CHECK(bad_obj.find("line 3") != std::string::npos);
  CHECK(bad_obj.find("column 'objective'") != std::string::npos);
  CHECK(message_of([] { parse_results_csv("sequence,status,objective,wall_time_s\n0,lost,0.5,1\n"); })
            .find("column 'status'") != std::string::npos);
  CHECK(message_of([] { parse_results_csv("sequence,status,objective,wall_time_s\nx,done,0.5,1\n"); })
            .find("column 'sequence'") != std::string::npos);
  CHECK(message_of([] { parse_results_csv("sequence,status,objective,wall_time_s\n0,done,,1\n"); })
            .find("column 'objective'") != std::string::npos);
  CHECK(message_of([] { parse_results_csv("sequence,status,objective,wall_time_s,a\n0,done,0.5,1\n"); })
            .find("line 2") != std::string::npos);
}

TEST_CASE("write_report emits CSV and SVG files") {
  const auto dir = fs::temp_directory_path() / ("spikeopt_test_report_" + std::to_string(::getpid()));
  const auto files = write_report(parse_results_csv(kThreeRows), dir);
  CHECK(slurp(files.scatter_csv) == "sequence,objective\n0,0.105\n1,0.11\n2,0.95\n");
  CHECK(slurp(files.trajectory_csv) == "sequence,objective,best\n0,0.105,0.105\n1,0.11,0.11\n2,0.95,0.95\n");
  const auto hist = slurp(files.histogram_csv);
  CHECK(hist.rfind("bin_lo,bin_hi,count\n", 0) == 0);
  CHECK(hist.find(",2\n") != std::string::npos);
  for (const auto& svg : {files.scatter_svg, files.histogram_svg, files.trajectory_svg}) {
    CHECK(slurp(svg).rfind("<svg", 0) == 0);
  }
  fs::remove_all(dir);
}
