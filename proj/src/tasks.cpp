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

#include "spikeopt/tasks.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "spikeopt/error.hpp"
#include "spikeopt/rng.hpp"
#include "spikeopt/snn.hpp"

namespace spikeopt {

namespace {

constexpr std::uint64_t kLearnStream = 10;
constexpr std::uint64_t kEvalStream = 11;
constexpr std::uint64_t kEncoderStream = 12;
// The evaluation phase draws its own spike trains so that its input does not
// depend on how many samples were learned.
constexpr std::uint64_t kEvalEncoderStream = 13;
constexpr std::uint64_t kNetworkStream = 20;

void to_double(std::span<const float> in, std::vector<double>& out) {
  out.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i];
}

}  // namespace

const char* mode_name(TaskMode m) noexcept {
  return m == TaskMode::Supervised ? "supervised" : "unsupervised";
}

std::uint64_t TaskResult::confusion_total() const {
  return std::accumulate(confusion.begin(), confusion.end(), std::uint64_t{0});
}

std::size_t classify_readout(std::span<const double> counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

void encode_modulatory(std::size_t label, bool active, std::span<double> out) {
  if (label >= out.size()) {
    throw Error(Errc::InputRangeError, "label " + std::to_string(label) + " outside [0, " +
                                           std::to_string(out.size()) + ")");
  }
  std::fill(out.begin(), out.end(), 0.0);
  if (active) out[label] = 1.0;
}

double unsupervised_l2(std::span<const double> x, std::span<const double> weights,
                       std::size_t n_rows) {
  const std::size_t n = x.size();
  if (weights.size() != n_rows * n) throw Error(Errc::WidthMismatch, "weight matrix does not match input width");
  double x_norm2 = 0.0;
  for (const double v : x) x_norm2 += v * v;
  const double x_norm = std::sqrt(x_norm2);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n_rows; ++j) {
    const auto row = weights.subspan(j * n, n);
    double w_norm2 = 0.0;
    for (const double w : row) w_norm2 += w * w;
    const double scale = w_norm2 > 0.0 ? x_norm / std::sqrt(w_norm2) : 0.0;
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i] - scale * row[i];
      d2 += d * d;
    }
    best = std::min(best, std::sqrt(d2));
  }
  return n_rows == 0 ? x_norm : best;
}

std::uint64_t hash_weights(std::span<const double> weights) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(weights.data());
  for (std::size_t i = 0; i < weights.size_bytes(); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

TaskResult run_stream_task(Network& network, const Dataset& data, const TaskConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  if (config.steps_per_sample == 0 || config.eval_steps() == 0) {
    throw Error(Errc::ConfigError, "steps per sample must be at least 1");
  }
  if (config.n_eval_samples == 0) throw Error(Errc::ConfigError, "need at least one evaluation sample");
  if (data.width() != network.n_inputs) {
    throw Error(Errc::WidthMismatch, "dataset width " + std::to_string(data.width()) +
                                         " does not match network input width " +
                                         std::to_string(network.n_inputs));
  }
  if (data.n_classes() > network.n_classes) {
    throw Error(Errc::WidthMismatch, "dataset has more classes than the network has outputs");
  }
  if (network.learned == nullptr) throw Error(Errc::InvalidGraph, "network has no learned synapse");
  if (const auto problems = network.net.validate(); !problems.empty()) {
    throw Error(Errc::InvalidGraph, "network is not fully wired: " + problems.front());
  }
  if (config.mode == TaskMode::Unsupervised && network.learned->n_pre() != network.n_inputs) {
    throw Error(Errc::ConfigError, "the l2 metric needs a learned synapse in input space");
  }

  const auto learn = make_stream(data, config.n_learn_samples, derive_seed(config.seed, kLearnStream), Split::Learn);
  const auto eval = make_stream(data, config.n_eval_samples, derive_seed(config.seed, kEvalStream), Split::Eval);

  const std::size_t n_classes = network.n_classes;
  auto& net = network.net;
  PoissonEncoder encoder(data.width(), config.encoder_gain, derive_seed(config.seed, kEncoderStream));

  std::vector<double> intensities;
  Signal spikes_in(data.width(), 0.0);
  Signal mod(n_classes, 0.0);
  std::vector<Signal> out(1, Signal(n_classes, 0.0));
  std::vector<double> counts(n_classes, 0.0);
  std::array<SignalView, 2> in{};

  TaskResult result;
  result.mode = config.mode;
  result.n_classes = n_classes;
  result.confusion.assign(n_classes * n_classes, 0);
  result.assumptions.emplace_back("eval_split", "test");

  const auto present = [&](std::span<const float> image, std::size_t steps) {
    to_double(image, intensities);
    if (config.inter_sample_reset) net.clear_activity();
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
      encoder.encode(intensities, spikes_in);
      in = {SignalView(spikes_in), SignalView(mod)};
      net.step(in, out);
      for (std::size_t j = 0; j < n_classes; ++j) counts[j] += out[0][j];
    }
  };

  net.set_learning(true);
  for (std::size_t i = 0; i < learn.size(); ++i) {
    const bool supervise = config.mode == TaskMode::Supervised;
    encode_modulatory(static_cast<std::size_t>(learn.label(i)), supervise, mod);
    present(learn.image(i), config.steps_per_sample);
    result.learn_spikes.samples += 1;
    result.learn_spikes.output_spikes += static_cast<std::uint64_t>(std::accumulate(counts.begin(), counts.end(), 0.0));
  }

  net.set_learning(false);
  std::fill(mod.begin(), mod.end(), 0.0);
  encoder.reseed(derive_seed(config.seed, kEvalEncoderStream));
  result.weights_hash_before_eval = hash_weights(network.learned->weights());
  std::uint64_t correct = 0;
  double l2_sum = 0.0;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    present(eval.image(i), config.eval_steps());
    const auto truth = static_cast<std::size_t>(eval.label(i));
    const auto predicted = classify_readout(counts);
    result.confusion[truth * n_classes + predicted] += 1;
    if (predicted == truth) ++correct;
    result.eval_spikes.samples += 1;
    result.eval_spikes.output_spikes += static_cast<std::uint64_t>(std::accumulate(counts.begin(), counts.end(), 0.0));
    if (config.mode == TaskMode::Unsupervised) {
      l2_sum += unsupervised_l2(intensities, network.learned->weights(), n_classes);
    }
  }
  result.weights_hash_after_eval = hash_weights(network.learned->weights());

  result.accuracy = static_cast<double>(correct) / static_cast<double>(eval.size());
  result.metric = config.mode == TaskMode::Supervised ? result.accuracy
                                                      : l2_sum / static_cast<double>(eval.size());
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

FlatConfig to_flat(const TaskResult& r) {
  FlatConfig f;
  f.set("mode", mode_name(r.mode));
  f.set("metric", format_double(r.metric));
  f.set("accuracy", format_double(r.accuracy));
  f.set("n_classes", std::to_string(r.n_classes));
  f.set("n_eval", std::to_string(r.confusion_total()));
  f.set("learn_samples", std::to_string(r.learn_spikes.samples));
  f.set("learn_output_spikes", std::to_string(r.learn_spikes.output_spikes));
  f.set("learn_spikes_per_sample", format_double(r.learn_spikes.mean_per_sample()));
  f.set("eval_output_spikes", std::to_string(r.eval_spikes.output_spikes));
  f.set("eval_spikes_per_sample", format_double(r.eval_spikes.mean_per_sample()));
  f.set("weights_hash_before_eval", std::to_string(r.weights_hash_before_eval));
  f.set("weights_hash_after_eval", std::to_string(r.weights_hash_after_eval));
  f.set("wall_time_s", format_double(r.wall_time_s));
  for (const auto& [key, value] : r.assumptions) f.set("assumption." + key, value);
  return f;
}

std::string confusion_csv(const TaskResult& r) {
  std::string out = "true,predicted,count\n";
  for (std::size_t t = 0; t < r.n_classes; ++t) {
    for (std::size_t p = 0; p < r.n_classes; ++p) {
      out += std::to_string(t) + "," + std::to_string(p) + "," +
             std::to_string(r.confusion[t * r.n_classes + p]) + "\n";
    }
  }
  return out;
}

Network build_case(Case c, const FlatConfig& params, const Dataset& data, std::uint64_t seed,
                   std::size_t n_kenyon) {
  const auto net_seed = derive_seed(seed, kNetworkStream);
  if (c == Case::Shallow) return build_shallow(shallow_from(params), data.width(), data.n_classes(), net_seed);
  return build_complex(complex_from(params), TopologySizes::for_task(data.width(), data.n_classes(), n_kenyon),
                       net_seed);
}

TaskResult evaluate_case(Case c, const FlatConfig& params, const Dataset& data, const TaskConfig& config,
                         std::size_t n_kenyon) {
  auto network = build_case(c, params, data, config.seed, n_kenyon);
  auto result = run_stream_task(network, data, config);
  if (c == Case::Complex) {
    result.assumptions.emplace_back("inh2kc_weight", "glom2inh.w0");
    result.assumptions.emplace_back("inp2glom_wiring", "one-to-one");
  }
  return result;
}

}  // namespace spikeopt
