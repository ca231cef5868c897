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

#include "spikeopt/snn.hpp"

#include <algorithm>
#include <cmath>

#include "spikeopt/error.hpp"

namespace spikeopt {

double decay_factor(double tau) { return std::exp(-1.0 / tau); }

// ---------------------------------------------------------------------------
// LifLayer

LifLayer::LifLayer(std::size_t n, double tau, double v_th)
    : tau_(tau), v_th_(v_th), leak_(decay_factor(tau)), v_(n, 0.0), s_(n, 0.0) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(Errc::RangeError, "LIF time constant must be positive, got " + std::to_string(tau));
  }
  if (!(v_th > 0.0) || !std::isfinite(v_th)) {
    throw Error(Errc::RangeError, "LIF threshold must be positive, got " + std::to_string(v_th));
  }
}

void LifLayer::step(std::span<const double> x, std::span<double> spikes) {
  const std::size_t n = v_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) {
      throw Error(Errc::NumericError, "non-finite LIF input at neuron " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double fired = (v_[i] - v_th_ > 0.0) ? 1.0 : 0.0;
    v_[i] = (1.0 - s_[i]) * (v_[i] * leak_ + x[i]);
    s_[i] = fired;
    spikes[i] = fired;
  }
}

void LifLayer::reset() {
  std::fill(v_.begin(), v_.end(), 0.0);
  std::fill(s_.begin(), s_.end(), 0.0);
}

void LifLayer::set_state(std::span<const double> v, std::span<const double> s) {
  if (v.size() != v_.size() || s.size() != s_.size()) {
    throw Error(Errc::WidthMismatch, "LIF state size mismatch");
  }
  v_.assign(v.begin(), v.end());
  s_.assign(s.begin(), s.end());
}

// ---------------------------------------------------------------------------
// Trace / LowPassFilter

Trace::Trace(std::size_t n, double a, double b) : a_(a), b_(b), t_(n, 0.0) {}

void Trace::step(std::span<const double> s) {
  for (std::size_t i = 0; i < t_.size(); ++i) t_[i] = a_ * t_[i] + b_ * s[i];
}

void Trace::reset() { std::fill(t_.begin(), t_.end(), 0.0); }

LowPassFilter::LowPassFilter(std::size_t n, double tau)
    : tau_(tau), decay_(decay_factor(tau)), y_(n, 0.0) {
  if (!(tau > 0.0)) {
    throw Error(Errc::RangeError, "filter time constant must be positive, got " + std::to_string(tau));
  }
}

void LowPassFilter::step(std::span<const double> u) {
  for (std::size_t i = 0; i < y_.size(); ++i) y_[i] = y_[i] * decay_ + u[i];
}

void LowPassFilter::reset() { std::fill(y_.begin(), y_.end(), 0.0); }

// ---------------------------------------------------------------------------
// Connectivity

Connectivity Connectivity::dense(std::size_t rows, std::size_t cols,
                                 std::span<const double> row_major) {
  if (row_major.size() != rows * cols) {
    throw Error(Errc::WidthMismatch, "dense weight matrix has wrong number of entries");
  }
  Connectivity c;
  c.rows_ = rows;
  c.cols_ = cols;
  c.col_start_.assign(1, 0);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      const double w = row_major[i * cols + j];
      if (w != 0.0) {
        c.row_index_.push_back(static_cast<std::uint32_t>(i));
        c.values_.push_back(w);
      }
    }
    c.col_start_.push_back(c.values_.size());
  }
  return c;
}

Connectivity Connectivity::full(std::size_t rows, std::size_t cols, double w) {
  Connectivity c;
  c.rows_ = rows;
  c.cols_ = cols;
  c.col_start_.assign(1, 0);
  if (w != 0.0) {
    c.row_index_.reserve(rows * cols);
    c.values_.reserve(rows * cols);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (w != 0.0) {
      for (std::size_t i = 0; i < rows; ++i) {
        c.row_index_.push_back(static_cast<std::uint32_t>(i));
        c.values_.push_back(w);
      }
    }
    c.col_start_.push_back(c.values_.size());
  }
  return c;
}

Connectivity Connectivity::one_to_one(std::size_t n, double w) {
  Connectivity c;
  c.rows_ = n;
  c.cols_ = n;
  c.col_start_.assign(1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    if (w != 0.0) {
      c.row_index_.push_back(static_cast<std::uint32_t>(j));
      c.values_.push_back(w);
    }
    c.col_start_.push_back(c.values_.size());
  }
  return c;
}

Connectivity Connectivity::bernoulli(std::size_t rows, std::size_t cols, double p, double w,
                                     std::uint64_t seed) {
  Connectivity c;
  c.rows_ = rows;
  c.cols_ = cols;
  c.col_start_.assign(1, 0);
  Rng rng(seed);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      if (uniform01(rng) < p) {
        c.row_index_.push_back(static_cast<std::uint32_t>(i));
        c.values_.push_back(w);
      }
    }
    c.col_start_.push_back(c.values_.size());
  }
  return c;
}

void Connectivity::accumulate(std::span<const double> pre, std::span<double> post) const {
  for (std::size_t j = 0; j < cols_; ++j) {
    const double x = pre[j];
    if (x == 0.0) continue;
    for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      post[row_index_[k]] += values_[k] * x;
    }
  }
}

std::vector<double> Connectivity::to_dense() const {
  std::vector<double> out(rows_ * cols_, 0.0);
  for (std::size_t j = 0; j < cols_; ++j) {
    for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      out[row_index_[k] * cols_ + j] = values_[k];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// StaticSynapse

StaticSynapse::StaticSynapse(Connectivity weights, SynapseMode mode, double tau_f)
    : weights_(std::move(weights)),
      mode_(mode),
      decay_(mode == SynapseMode::LowPass ? decay_factor(tau_f) : 0.0),
      filtered_(weights_.rows(), 0.0),
      inputs_{{"pre", weights_.cols()}},
      outputs_{{"drive", weights_.rows()}} {
  if (mode == SynapseMode::LowPass && !(tau_f > 0.0)) {
    throw Error(Errc::RangeError, "synapse filter time constant must be positive");
  }
}

void StaticSynapse::propagate(std::span<const double> pre, std::span<double> drive) {
  if (mode_ == SynapseMode::PassThrough) {
    std::fill(drive.begin(), drive.end(), 0.0);
    weights_.accumulate(pre, drive);
    return;
  }
  for (auto& y : filtered_) y *= decay_;
  weights_.accumulate(pre, filtered_);
  std::copy(filtered_.begin(), filtered_.end(), drive.begin());
}

void StaticSynapse::step(std::span<const SignalView> in, std::span<Signal> out) {
  propagate(in[0], out[0]);
}

void StaticSynapse::reset() { std::fill(filtered_.begin(), filtered_.end(), 0.0); }

// ---------------------------------------------------------------------------
// Plasticity

void clip_weights(std::span<double> weights, BoundMode mode, double w_max) {
  const double lo = mode == BoundMode::Bipolar ? -w_max : 0.0;
  for (auto& w : weights) w = std::clamp(w, lo, w_max);
}

void mse_delta_w(double lr, std::span<const double> t_e, std::span<const double> t_o,
                 std::span<const double> t_m, double r0, std::span<double> delta) {
  const std::size_t n_pre = t_e.size();
  for (std::size_t j = 0; j < t_o.size(); ++j) {
    const double error = r0 * t_m[j] - t_o[j];
    for (std::size_t i = 0; i < n_pre; ++i) delta[j * n_pre + i] = lr * t_e[i] * error;
  }
}

namespace {

std::vector<double> random_weights(std::size_t count, const MseRuleParams& p, std::uint64_t seed) {
  Rng rng(seed);
  const double lo = p.bound == BoundMode::Bipolar ? -p.w_lim : 0.0;
  std::vector<double> w(count);
  for (auto& x : w) x = uniform(rng, lo, p.w_lim);
  return w;
}

}  // namespace

PlasticSynapseMSE::PlasticSynapseMSE(std::size_t n_post, std::size_t n_pre,
                                     const MseRuleParams& params, std::uint64_t seed)
    : PlasticSynapseMSE(n_post, n_pre, params, random_weights(n_post * n_pre, params, seed)) {}

PlasticSynapseMSE::PlasticSynapseMSE(std::size_t n_post, std::size_t n_pre,
                                     const MseRuleParams& params,
                                     std::vector<double> initial_weights)
    : n_post_(n_post),
      n_pre_(n_pre),
      params_(params),
      weights_(std::move(initial_weights)),
      pre_filter_(n_pre, params.tau),
      mod_filter_(n_post, params.tau_m),
      pre_trace_(n_pre, params.pre_a, params.pre_b),
      post_trace_(n_post, params.post_a, params.post_b),
      mod_trace_(n_post, params.mod_a, params.mod_b),
      scaled_pre_(n_pre, 0.0),
      error_(n_post, 0.0),
      inputs_{{"pre", n_pre}, {"mod", n_post}, {"post", n_post}},
      outputs_{{"drive", n_post}} {
  if (weights_.size() != n_post * n_pre) {
    throw Error(Errc::WidthMismatch, "initial weight matrix has wrong number of entries");
  }
  if (!(params.w_lim > 0.0)) throw Error(Errc::RangeError, "weight limit must be positive");
  clip_weights(weights_, params_.bound, params_.w_lim);
  initial_ = weights_;
  active_.reserve(n_pre);
}

void PlasticSynapseMSE::update(std::span<const double> pre, std::span<const double> mod,
                               std::span<const double> post, std::span<double> drive) {
  pre_filter_.step(pre);
  mod_filter_.step(mod);
  pre_trace_.step(pre_filter_.values());
  mod_trace_.step(mod_filter_.values());
  post_trace_.step(post);

  if (learning_ && params_.lr != 0.0) {
    const auto t_e = pre_trace_.values();
    const auto t_o = post_trace_.values();
    const auto t_m = mod_trace_.values();
    active_.clear();
    for (std::size_t i = 0; i < n_pre_; ++i) {
      // A zero presynaptic trace gates the update off entirely.
      if (t_e[i] != 0.0) {
        active_.push_back(i);
        scaled_pre_[i] = params_.lr * t_e[i];
      }
    }
    const double lo = params_.bound == BoundMode::Bipolar ? -params_.w_lim : 0.0;
    const double hi = params_.w_lim;
    for (std::size_t j = 0; j < n_post_; ++j) {
      const double error = params_.r0 * t_m[j] - t_o[j];
      double* row = weights_.data() + j * n_pre_;
      for (const auto i : active_) row[i] = std::clamp(row[i] + scaled_pre_[i] * error, lo, hi);
    }
  }

  const auto x = pre_filter_.values();
  active_.clear();
  for (std::size_t i = 0; i < n_pre_; ++i) {
    if (x[i] != 0.0) active_.push_back(i);
  }
  for (std::size_t j = 0; j < n_post_; ++j) {
    const double* row = weights_.data() + j * n_pre_;
    double acc = 0.0;
    for (const auto i : active_) acc += row[i] * x[i];
    drive[j] = acc;
  }
}

void PlasticSynapseMSE::set_weights(std::span<const double> w) {
  if (w.size() != weights_.size()) throw Error(Errc::WidthMismatch, "weight matrix size mismatch");
  weights_.assign(w.begin(), w.end());
  clip_weights(weights_, params_.bound, params_.w_lim);
}

void PlasticSynapseMSE::step(std::span<const SignalView> in, std::span<Signal> out) {
  update(in[0], in[1], in[2], out[0]);
}

void PlasticSynapseMSE::reset() {
  clear_activity();
  weights_ = initial_;
  learning_ = true;
}

void PlasticSynapseMSE::clear_activity() {
  pre_filter_.reset();
  mod_filter_.reset();
  pre_trace_.reset();
  post_trace_.reset();
  mod_trace_.reset();
}

// ---------------------------------------------------------------------------
// PoissonEncoder

PoissonEncoder::PoissonEncoder(std::size_t width, double gain, std::uint64_t seed)
    : width_(width), gain_(gain), rng_(seed) {
  if (!(gain > 0.0 && gain <= 1.0)) {
    throw Error(Errc::RangeError, "encoder gain must lie in (0, 1]");
  }
}

void PoissonEncoder::encode(std::span<const double> x, std::span<double> spikes) {
  if (x.size() != width_ || spikes.size() != width_) {
    throw Error(Errc::WidthMismatch, "encoder width mismatch");
  }
  for (std::size_t i = 0; i < width_; ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
      throw Error(Errc::InputRangeError, "intensity " + std::to_string(x[i]) + " at channel " +
                                             std::to_string(i) + " outside [0, 1]");
    }
  }
  for (std::size_t i = 0; i < width_; ++i) {
    const double p = std::clamp(gain_ * x[i], 0.0, 1.0);
    spikes[i] = (p > 0.0 && uniform01(rng_) < p) ? 1.0 : 0.0;
  }
}

void PoissonEncoder::reseed(std::uint64_t seed) { rng_.seed(seed); }

// ---------------------------------------------------------------------------
// LifPopulation

LifPopulation::LifPopulation(std::size_t n, double tau, double v_th,
                             std::vector<Afferent> afferents)
    : lif_(n, tau, v_th), afferents_(std::move(afferents)), total_(n, 0.0), outputs_{{"s", n}} {
  for (const auto& aff : afferents_) {
    first_input_.push_back(inputs_.size());
    drives_.emplace_back(n, 0.0);
    std::visit(
        [&](const auto& syn) {
          using T = std::decay_t<decltype(syn)>;
          if constexpr (std::is_same_v<T, Direct>) {
            inputs_.push_back({aff.name, n});
          } else if constexpr (std::is_same_v<T, StaticSynapse>) {
            if (syn.weights().rows() != n) {
              throw Error(Errc::WidthMismatch, "afferent '" + aff.name + "' has wrong row count");
            }
            inputs_.push_back({aff.name, syn.weights().cols()});
          } else {
            if (syn.n_post() != n) {
              throw Error(Errc::WidthMismatch, "afferent '" + aff.name + "' has wrong row count");
            }
            inputs_.push_back({aff.name, syn.n_pre()});
            inputs_.push_back({aff.name + ".mod", n});
          }
        },
        aff.synapse);
  }
}

void LifPopulation::step(std::span<const SignalView> in, std::span<Signal> out) {
  std::fill(total_.begin(), total_.end(), 0.0);
  for (std::size_t k = 0; k < afferents_.size(); ++k) {
    const std::size_t idx = first_input_[k];
    auto& drive = drives_[k];
    std::visit(
        [&](auto& syn) {
          using T = std::decay_t<decltype(syn)>;
          if constexpr (std::is_same_v<T, Direct>) {
            std::copy(in[idx].begin(), in[idx].end(), drive.begin());
          } else if constexpr (std::is_same_v<T, StaticSynapse>) {
            syn.propagate(in[idx], drive);
          } else {
            syn.update(in[idx], in[idx + 1], lif_.spikes(), drive);
          }
        },
        afferents_[k].synapse);
    for (std::size_t i = 0; i < total_.size(); ++i) total_[i] += drive[i];
  }
  lif_.step(total_, out[0]);
}

void LifPopulation::reset() {
  lif_.reset();
  for (auto& aff : afferents_) {
    std::visit(
        [](auto& syn) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(syn)>, Direct>) syn.reset();
        },
        aff.synapse);
  }
  for (auto& d : drives_) std::fill(d.begin(), d.end(), 0.0);
}

void LifPopulation::clear_activity() {
  lif_.reset();
  for (auto& aff : afferents_) {
    std::visit(
        [](auto& syn) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(syn)>, Direct>) syn.clear_activity();
        },
        aff.synapse);
  }
  for (auto& d : drives_) std::fill(d.begin(), d.end(), 0.0);
}

void LifPopulation::set_learning(bool enabled) {
  for (auto& aff : afferents_) {
    if (auto* p = std::get_if<PlasticSynapseMSE>(&aff.synapse)) p->set_learning(enabled);
  }
}

std::size_t LifPopulation::find(std::string_view name) const {
  for (std::size_t k = 0; k < afferents_.size(); ++k) {
    if (afferents_[k].name == name) return k;
  }
  throw Error(Errc::UnknownNode, "no afferent named '" + std::string(name) + "'");
}

PlasticSynapseMSE& LifPopulation::plastic(std::string_view name) {
  auto* p = std::get_if<PlasticSynapseMSE>(&afferents_[find(name)].synapse);
  if (p == nullptr) throw Error(Errc::UnknownNode, "afferent '" + std::string(name) + "' is not plastic");
  return *p;
}

const PlasticSynapseMSE& LifPopulation::plastic(std::string_view name) const {
  const auto* p = std::get_if<PlasticSynapseMSE>(&afferents_[find(name)].synapse);
  if (p == nullptr) throw Error(Errc::UnknownNode, "afferent '" + std::string(name) + "' is not plastic");
  return *p;
}

const StaticSynapse& LifPopulation::static_synapse(std::string_view name) const {
  const auto* p = std::get_if<StaticSynapse>(&afferents_[find(name)].synapse);
  if (p == nullptr) throw Error(Errc::UnknownNode, "afferent '" + std::string(name) + "' is not static");
  return *p;
}

std::span<const double> LifPopulation::afferent_drive(std::string_view name) const {
  return drives_[find(name)];
}

}  // namespace spikeopt
