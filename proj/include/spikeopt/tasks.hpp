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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spikeopt/architectures.hpp"
#include "spikeopt/datasets.hpp"
#include "spikeopt/space.hpp"

namespace spikeopt {

enum class TaskMode { Supervised, Unsupervised };

const char* mode_name(TaskMode m) noexcept;

struct TaskConfig {
  std::size_t n_learn_samples = 10000;
  std::size_t n_eval_samples = 2000;
  std::size_t steps_per_sample = 8;
  /// Evaluation window; defaults to steps_per_sample.
  std::optional<std::size_t> eval_steps_per_sample;
  /// Zero potentials, filters and traces before every sample.
  bool inter_sample_reset = true;
  std::uint64_t seed = 0;
  TaskMode mode = TaskMode::Supervised;
  double encoder_gain = 1.0;

  std::size_t eval_steps() const { return eval_steps_per_sample.value_or(steps_per_sample); }
};

struct SpikeStats {
  std::uint64_t samples = 0;
  std::uint64_t output_spikes = 0;
  double mean_per_sample() const {
    return samples == 0 ? 0.0 : static_cast<double>(output_spikes) / static_cast<double>(samples);
  }
};

struct TaskResult {
  TaskMode mode = TaskMode::Supervised;
  /// Accuracy (supervised) or mean l2 distance (unsupervised).
  double metric = 0.0;
  double accuracy = 0.0;
  std::size_t n_classes = 0;
  /// confusion[true][predicted], row-major n_classes x n_classes.
  std::vector<std::uint64_t> confusion;
  SpikeStats learn_spikes;
  SpikeStats eval_spikes;
  std::uint64_t weights_hash_before_eval = 0;
  std::uint64_t weights_hash_after_eval = 0;
  double wall_time_s = 0.0;
  /// Modelling assumptions the number depends on, echoed by to_flat.
  std::vector<std::pair<std::string, std::string>> assumptions;

  std::uint64_t confusion_total() const;
};

/// Online learning over a stream followed by a frozen evaluation stream.
///
/// Learning phase: each sample is Poisson-encoded for steps_per_sample steps
/// with its class's modulatory line held high and plasticity enabled (the
/// modulatory lines stay silent in unsupervised mode). Evaluation phase:
/// plasticity off, modulatory lines silent, prediction by spike-count argmax.
///
/// Errors: Errc::Exhausted when a pool is too small, Errc::InvalidGraph.
TaskResult run_stream_task(Network& network, const Dataset& data, const TaskConfig& config);

/// Argmax over per-class spike counts; ties go to the lowest index.
std::size_t classify_readout(std::span<const double> counts);

/// One-hot row for `label` when active, zeros otherwise. Throws
/// Errc::InputRangeError when label >= out.size().
void encode_modulatory(std::size_t label, bool active, std::span<double> out);

/// Distance from `x` to the nearest weight row rescaled to ||x||.
/// Zero rows count as the origin.
double unsupervised_l2(std::span<const double> x, std::span<const double> weights,
                       std::size_t n_rows);

/// FNV-1a over the raw bytes of a weight matrix.
std::uint64_t hash_weights(std::span<const double> weights);

/// Flat key = value record; see README for the schema.
FlatConfig to_flat(const TaskResult& result);
/// CSV with header "true,predicted,count".
std::string confusion_csv(const TaskResult& result);

/// Builds the case's network from a flat parameter file, seeded from `seed`.
Network build_case(Case c, const FlatConfig& params, const Dataset& data, std::uint64_t seed,
                   std::size_t n_kenyon = 5000);

/// build_case followed by run_stream_task, both seeded from config.seed.
TaskResult evaluate_case(Case c, const FlatConfig& params, const Dataset& data, const TaskConfig& config,
                         std::size_t n_kenyon = 5000);

}  // namespace spikeopt
