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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikeopt/forest.hpp"
#include "spikeopt/space.hpp"

namespace spikeopt {

struct AmbsParams {
  std::size_t n_trees = 100;
  std::size_t min_leaf = 3;
  std::size_t max_depth = 0;
  /// Defaults to max(16, 2 * dim).
  std::optional<std::size_t> init_random;
  std::size_t n_candidates = 1000;
  double kappa = 1.96;
  /// When set, proposal k is fitted on exactly the records with sequence
  /// below k - fixed_lag, waiting for them if necessary. The record set then
  /// no longer depends on the worker count or on completion order.
  std::optional<std::size_t> fixed_lag;
};

std::size_t default_init_random(std::size_t dim);

enum class EvalStatus { Pending, Done, Failed };

const char* status_name(EvalStatus s);
EvalStatus parse_status(std::string_view s);

struct EvalRecord {
  std::uint64_t sequence = 0;
  ParamConfig config;
  std::uint64_t seed = 0;
  EvalStatus status = EvalStatus::Pending;
  double objective = 0.0;  // meaningful only when done
  double wall_time_s = 0.0;
  int worker = -1;
  std::string error;
};

/// Maximized. Must be deterministic given (config, seed) for reproducible
/// searches. Exceptions and non-finite values mark the record failed.
using Objective = std::function<double(const ParamConfig&, std::uint64_t seed)>;

struct SearchOptions {
  std::size_t budget = 100;
  std::size_t n_workers = 1;
  std::uint64_t seed = 0;
  AmbsParams ambs;
  /// Skip the surrogate entirely (random-search baseline).
  bool random_only = false;
  /// Stop dispatching after this many new evaluations in this call; the
  /// in-flight ones are drained and left done. Used to simulate interrupts.
  std::optional<std::size_t> max_new_evaluations;
  /// Polled by the coordinator; once set, nothing new is dispatched and the
  /// in-flight evaluations are drained.
  const std::atomic<bool>* cancel = nullptr;
  std::filesystem::path results_csv;
  std::filesystem::path checkpoint;
  /// Free-form settings persisted alongside the records.
  FlatConfig metadata;
  /// Called on the coordinator thread after each completion.
  std::function<void(const EvalRecord&)> on_record;
};

struct SearchResult {
  /// Sorted by sequence number.
  std::vector<EvalRecord> records;
  std::optional<std::size_t> best;
  bool complete = false;

  const EvalRecord* best_record() const { return best ? &records[*best] : nullptr; }
  std::size_t count(EvalStatus s) const;
};

std::uint64_t objective_seed(std::uint64_t search_seed, std::uint64_t sequence);

ParamConfig sample_random(const ParamSpace& space, Rng& rng);

/// Fits on the done records only. Throws Errc::InsufficientData with fewer
/// than two.
RandomForest fit_surrogate(const ParamSpace& space, std::span<const EvalRecord> records,
                           const ForestOptions& options, std::uint64_t seed);

/// Index of the candidate maximizing mu + kappa * sigma (lowest index on ties).
std::size_t acquire_lcb(const RandomForest& model, const ParamSpace& space,
                        std::span<const ParamConfig> candidates, double kappa);

/// Runs (or, given `prior` records, continues) a search. Pending prior
/// records are re-dispatched with their original sequence, config and seed.
SearchResult run_search(const ParamSpace& space, const Objective& objective, const SearchOptions& options,
                        std::vector<EvalRecord> prior = {});

struct SearchCheckpoint {
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::vector<std::string> dimensions;
  FlatConfig metadata;
  std::vector<EvalRecord> records;
};

void save_checkpoint(const std::filesystem::path& path, const ParamSpace& space,
                     const SearchOptions& options, std::span<const EvalRecord> records);
/// Throws Errc::IoError for unreadable or malformed files.
SearchCheckpoint load_checkpoint(const std::filesystem::path& path);

std::string results_csv_header(const ParamSpace& space);
std::string results_csv_row(const ParamSpace& space, const EvalRecord& record);

}  // namespace spikeopt
