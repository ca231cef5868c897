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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "spikeopt/search.hpp"
#include "support.hpp"

using namespace spikeopt;
using spikeopt::testing::error_code_of;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("spikeopt_test_search_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

ParamSpace unit_line() {
  ParamSpace s;
  s.add_continuous("x", 0.0, 1.0);
  return s;
}

ParamSpace mixed3() {
  ParamSpace s;
  s.add_continuous("x", 0.0, 1.0).add_integer("k", 0, 9).add_categorical("c", {"a", "b", "c"});
  return s;
}

// Deterministic per (config, seed), with a small seed-dependent jitter.
double bumpy(const ParamConfig& c, std::uint64_t seed) {
  const double jitter = static_cast<double>(mix64(seed) % 1000) * 1e-6;
  return -std::pow(c.values[0] - 0.3, 2) - 0.01 * std::pow(c.values[1] - 4, 2) +
         (c.values[2] == 1.0 ? 0.05 : 0.0) + jitter;
}

SearchOptions small_options(std::size_t budget, std::uint64_t seed) {
  SearchOptions o;
  o.budget = budget;
  o.seed = seed;
  o.ambs.n_trees = 30;
  o.ambs.n_candidates = 200;
  return o;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

std::map<std::vector<double>, double> as_set(const SearchResult& r) {
  std::map<std::vector<double>, double> m;
  for (const auto& rec : r.records) m.emplace(rec.config.values, rec.objective);
  return m;
}

}  // namespace

TEST_CASE("acquisition: kappa limits and tie rule") {
  Rng rng(1);
  const auto space = unit_line();
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) {
    const double v = uniform01(rng);
    x.push_back({v});
    y.push_back(std::sin(6 * v) + 0.3 * uniform01(rng));
  }
  const auto model = RandomForest::fit(x, y, {.n_trees = 30}, 2);
  std::vector<ParamConfig> cands;
  for (int i = 0; i < 200; ++i) cands.push_back({{uniform01(rng)}});

  const auto oracle = [&](double kappa) {
    std::size_t best = 0;
    double score = -INFINITY;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto p = model.predict(cands[i].values);
      if (p.mean + kappa * p.spread > score) score = p.mean + kappa * p.spread, best = i;
    }
    return best;
  };
  for (const double kappa : {0.0, 0.5, 1.96, 10.0}) CHECK(acquire_lcb(model, space, cands, kappa) == oracle(kappa));

  std::size_t max_sigma = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (model.predict(cands[i].values).spread > model.predict(cands[max_sigma].values).spread) max_sigma = i;
  }
  CHECK(acquire_lcb(model, space, cands, INFINITY) == max_sigma);

  const std::vector<ParamConfig> twins{{{0.5}}, {{0.5}}};
  CHECK(acquire_lcb(model, space, twins, 1.96) == 0);
}

TEST_CASE("acquisition: equal mean, larger spread wins when kappa > 0") {
  // Targets are symmetric around x = 0.5, so mirrored candidates share a
  // mean; noise on one side only widens the spread there.
  const auto space = unit_line();
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  Rng rng(3);
  for (int i = 0; i < 60; ++i) {
    const double v = (i + 0.5) / 60.0;
    x.push_back({v});
    y.push_back(v < 0.5 ? 0.5 : 0.5 + (i % 2 == 0 ? 0.3 : -0.3));
  }
  const auto model = RandomForest::fit(x, y, {.n_trees = 50, .min_leaf = 1}, 4);
  const std::vector<ParamConfig> c{{{0.2}}, {{0.8}}};
  const auto p0 = model.predict(c[0].values), p1 = model.predict(c[1].values);
  CHECK(p0.spread < p1.spread);
  const double kappa = 1.96;
  CHECK(acquire_lcb(model, space, c, kappa) == (p1.mean + kappa * p1.spread > p0.mean + kappa * p0.spread ? 1u : 0u));
  CHECK(acquire_lcb(model, space, c, INFINITY) == 1);
}

TEST_CASE("surrogate uses done records only") {
  const auto space = unit_line();
  std::vector<EvalRecord> recs(3);
  recs[0] = {0, {{0.1}}, 0, EvalStatus::Done, 1.0};
  recs[1] = {1, {{0.9}}, 0, EvalStatus::Failed, 0.0};
  recs[2] = {2, {{0.5}}, 0, EvalStatus::Pending, 0.0};
  CHECK(error_code_of([&] { fit_surrogate(space, recs, {}, 0); }) == Errc::InsufficientData);
  recs[1].status = EvalStatus::Done;
  recs[1].objective = 3.0;
  const auto m = fit_surrogate(space, recs, {.n_trees = 5, .min_leaf = 1, .bootstrap = false}, 0);
  CHECK(m.predict(std::vector<double>{0.9}).mean == 3.0);
}

TEST_CASE("budget exactness, no duplicates, in-bounds proposals") {
  const auto space = mixed3();
  auto o = small_options(80, 7);
  o.n_workers = 4;
  std::atomic<int> calls{0};
  const auto r = run_search(space, [&](const ParamConfig& c, std::uint64_t s) { ++calls; return bumpy(c, s); }, o);
  CHECK(calls == 80);
  CHECK(r.records.size() == 80);
  CHECK(r.complete);
  CHECK(r.count(EvalStatus::Done) == 80);
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    CHECK(r.records[i].sequence == i);
    CHECK(space.contains(r.records[i].config));
    CHECK(r.records[i].seed == objective_seed(7, i));
    seen.insert(r.records[i].config.values);
  }
  CHECK(seen.size() == 80);
  REQUIRE(r.best_record() != nullptr);
  for (const auto& rec : r.records) CHECK(rec.objective <= r.best_record()->objective);
}

TEST_CASE("small discrete space is searched without duplicates until exhausted") {
  ParamSpace tiny;
  tiny.add_integer("k", 0, 5);
  auto o = small_options(6, 1);
  o.ambs.init_random = 2;
  const auto r = run_search(tiny, [](const ParamConfig& c, std::uint64_t) { return c.values[0]; }, o);
  std::set<double> ks;
  for (const auto& rec : r.records) ks.insert(rec.config.values[0]);
  CHECK(ks.size() == 6);
  o.budget = 7;
  CHECK(error_code_of([&] { run_search(tiny, [](const ParamConfig& c, std::uint64_t) { return c.values[0]; }, o); }) ==
        Errc::SpaceExhausted);
}

TEST_CASE("one worker runs strictly in sequence") {
  auto o = small_options(40, 2);
  std::vector<std::uint64_t> order;
  o.on_record = [&](const EvalRecord& r) { order.push_back(r.sequence); };
  const auto r = run_search(mixed3(), bumpy, o);
  REQUIRE(order.size() == 40);
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
  for (const auto& rec : r.records) CHECK(rec.worker == 0);
}

TEST_CASE("fixed lag: 1 and 8 workers give the same record set under random completion order") {
  const auto space = mixed3();
  const auto slow = [](const ParamConfig& c, std::uint64_t s) {
    std::this_thread::sleep_for(std::chrono::microseconds(mix64(s) % 3000));
    return bumpy(c, s);
  };
  auto o = small_options(60, 11);
  o.ambs.fixed_lag = 8;
  o.n_workers = 1;
  const auto one = run_search(space, slow, o);
  o.n_workers = 8;
  const auto eight = run_search(space, slow, o);
  CHECK(as_set(one) == as_set(eight));
  std::set<int> workers;
  for (const auto& r : eight.records) workers.insert(r.worker);
  CHECK(workers.size() > 1);
}

TEST_CASE("failed evaluations are recorded and the search continues") {
  auto o = small_options(40, 3);
  o.n_workers = 3;
  const auto flaky = [](const ParamConfig& c, std::uint64_t s) {
    if (c.values[2] == 2.0) throw std::runtime_error("simulated crash");
    if (s % 7 == 0) return std::nan("");
    return bumpy(c, s);
  };
  const auto r = run_search(mixed3(), flaky, o);
  CHECK(r.records.size() == 40);
  CHECK(r.complete);
  CHECK(r.count(EvalStatus::Failed) > 0);
  CHECK(r.count(EvalStatus::Done) + r.count(EvalStatus::Failed) == 40);
  for (const auto& rec : r.records) {
    if (rec.status == EvalStatus::Failed) CHECK_FALSE(rec.error.empty());
    if (rec.config.values[2] == 2.0) {
      CHECK(rec.status == EvalStatus::Failed);
      CHECK(rec.error == "simulated crash");
    }
  }
  REQUIRE(r.best_record() != nullptr);
  CHECK(r.best_record()->status == EvalStatus::Done);
}

TEST_CASE("quadratic optimum is located within 0.05 in 50 evaluations (median of 10 seeds)") {
  const auto space = unit_line();
  std::vector<double> err;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SearchOptions o;
    o.budget = 50;
    o.seed = seed;
    const auto r = run_search(space, [](const ParamConfig& c, std::uint64_t) { return -std::pow(c.values[0] - 0.3, 2); }, o);
    err.push_back(std::abs(r.best_record()->config.values[0] - 0.3));
  }
  std::sort(err.begin(), err.end());
  CHECK((err[4] + err[5]) / 2 < 0.05);
}

TEST_CASE("interrupt and resume: budget preserved, CSV complete") {
  const auto space = mixed3();
  const auto csv = scratch("resume.csv"), ckpt = scratch("resume.json");
  auto o = small_options(50, 5);
  o.n_workers = 3;
  o.results_csv = csv;
  o.checkpoint = ckpt;
  o.metadata.set("note", "resume test");
  o.max_new_evaluations = 20;
  std::atomic<int> calls{0};
  const auto counted = [&](const ParamConfig& c, std::uint64_t s) { ++calls; return bumpy(c, s); };
  const auto first = run_search(space, counted, o);
  CHECK_FALSE(first.complete);
  CHECK(first.records.size() == 20);
  CHECK(count_lines(csv) == 21);

  const auto cp = load_checkpoint(ckpt);
  CHECK(cp.seed == 5);
  CHECK(cp.budget == 50);
  CHECK(cp.metadata.get("note") == "resume test");
  CHECK(cp.dimensions == std::vector<std::string>{"x", "k", "c"});
  REQUIRE(cp.records.size() == 20);
  CHECK(cp.records[7].config == first.records[7].config);
  CHECK(cp.records[7].objective == first.records[7].objective);

  o.max_new_evaluations.reset();
  const auto second = run_search(space, counted, o, cp.records);
  CHECK(second.complete);
  CHECK(calls == 50);
  CHECK(second.records.size() == 50);
  CHECK(count_lines(csv) == 51);
  for (std::size_t i = 0; i < 20; ++i) CHECK(second.records[i].config == first.records[i].config);
  std::set<std::vector<double>> seen;
  for (const auto& r : second.records) seen.insert(r.config.values);
  CHECK(seen.size() == 50);
}

TEST_CASE("pending checkpoint records are re-run with their original seed") {
  const auto space = mixed3();
  auto o = small_options(20, 9);
  const auto full = run_search(space, bumpy, o);
  auto prior = std::vector<EvalRecord>(full.records.begin(), full.records.begin() + 10);
  prior[4].status = EvalStatus::Pending;
  prior[4].objective = 0.0;
  std::vector<std::uint64_t> rerun;
  const auto r = run_search(space, [&](const ParamConfig& c, std::uint64_t s) {
    rerun.push_back(s);
    return bumpy(c, s);
  }, o, prior);
  CHECK(r.records[4].status == EvalStatus::Done);
  CHECK(r.records[4].objective == full.records[4].objective);
  CHECK(rerun.front() == objective_seed(9, 4));
  CHECK(rerun.size() == 11);
}

TEST_CASE("cancellation drains in-flight work") {
  std::atomic<bool> cancel{false};
  auto o = small_options(100, 4);
  o.n_workers = 2;
  o.cancel = &cancel;
  o.on_record = [&](const EvalRecord& r) { if (r.sequence >= 5) cancel = true; };
  const auto r = run_search(mixed3(), bumpy, o);
  CHECK_FALSE(r.complete);
  CHECK(r.records.size() < 100);
  for (const auto& rec : r.records) CHECK(rec.status != EvalStatus::Pending);
}

TEST_CASE("results CSV format") {
  const auto space = mixed3();
  CHECK(results_csv_header(space) == "sequence,status,objective,wall_time_s,x,k,c");
  EvalRecord r{3, {{0.25, 7, 1}}, 0, EvalStatus::Done, 0.5, 1.5};
  CHECK(results_csv_row(space, r) == "3,done,0.5,1.5,0.25,7,b");
  r.status = EvalStatus::Failed;
  CHECK(results_csv_row(space, r) == "3,failed,,1.5,0.25,7,b");
  CHECK(parse_status("failed") == EvalStatus::Failed);
  CHECK(error_code_of([] { parse_status("lost"); }) == Errc::ConfigError);
}

TEST_CASE("checkpoint errors") {
  std::ofstream(scratch("junk.json")) << "{ not json";
  CHECK(error_code_of([] { load_checkpoint(scratch("junk.json")); }) == Errc::IoError);
  std::ofstream(scratch("other.json")) << R"({"format": "something-else"})";
  CHECK(error_code_of([] { load_checkpoint(scratch("other.json")); }) == Errc::IoError);
  CHECK(error_code_of([] { load_checkpoint(scratch("absent.json")); }) == Errc::IoError);
}

TEST_CASE("argument validation") {
  const auto space = unit_line();
  auto o = small_options(10, 0);
  CHECK(error_code_of([&] { run_search(ParamSpace{}, bumpy, o); }) == Errc::ConfigError);
  o.budget = 10;  // below the default init_random of 16
  CHECK(error_code_of([&] { run_search(space, bumpy, o); }) == Errc::ConfigError);
  o.ambs.init_random = 1;
  CHECK(error_code_of([&] { run_search(space, bumpy, o); }) == Errc::ConfigError);
  o.ambs.init_random = 4;
  o.n_workers = 0;
  CHECK(error_code_of([&] { run_search(space, bumpy, o); }) == Errc::ConfigError);
  o.n_workers = 1;
  std::vector<EvalRecord> gap(1);
  gap[0].sequence = 3;
  gap[0].config = {{0.5}};
  CHECK(error_code_of([&] { run_search(space, bumpy, o, gap); }) == Errc::ConfigError);
}
