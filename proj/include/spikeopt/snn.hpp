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

// Discrete-time spiking models: leaky integrate-and-fire neurons, spike
// traces, synaptic low-pass filters, static and plastic synapses, and the
// Poisson input encoder. All time constants are in units of the net step.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spikeopt/rng.hpp"
#include "spikeopt/streamnet.hpp"

namespace spikeopt {

inline constexpr double kDefaultThreshold = 1.0;

/// Per-step decay factor exp(-1/tau).
double decay_factor(double tau);

/// Leaky integrate-and-fire layer:
///
///   v(n+1) = (1 - s(n)) * (v(n) * exp(-1/tau) + x(n))
///   s(n+1) = H(v(n) - v_th),  H(z) = 1 iff z > 0
///
/// The reset uses the spike of the previous step, so a neuron that crosses
/// threshold emits two consecutive spikes before its potential is cleared.
class LifLayer {
 public:
  LifLayer(std::size_t n, double tau, double v_th = kDefaultThreshold);

  /// Advances one step. Writes s(n+1) into `spikes`. Throws
  /// Errc::NumericError on non-finite input.
  void step(std::span<const double> x, std::span<double> spikes);

  void reset();

  std::size_t size() const { return v_.size(); }
  double tau() const { return tau_; }
  double threshold() const { return v_th_; }
  std::span<const double> potentials() const { return v_; }
  std::span<const double> spikes() const { return s_; }

  /// Overrides the state; for tests and checkpointing.
  void set_state(std::span<const double> v, std::span<const double> s);

 private:
  double tau_;
  double v_th_;
  double leak_;
  std::vector<double> v_;
  std::vector<double> s_;
};

/// t(n) = a * t(n-1) + b * s(n)
class Trace {
 public:
  Trace(std::size_t n, double a, double b);

  void step(std::span<const double> s);
  void reset();

  double a() const { return a_; }
  double b() const { return b_; }
  std::span<const double> values() const { return t_; }

 private:
  double a_;
  double b_;
  std::vector<double> t_;
};

/// y(n) = y(n-1) * exp(-1/tau) + u(n)
class LowPassFilter {
 public:
  LowPassFilter(std::size_t n, double tau);

  void step(std::span<const double> u);
  void reset();

  double tau() const { return tau_; }
  std::span<const double> values() const { return y_; }

 private:
  double tau_;
  double decay_;
  std::vector<double> y_;
};

/// Fixed sparse weight matrix (rows = postsynaptic, cols = presynaptic),
/// stored column-major so that propagation only touches active inputs.
class Connectivity {
 public:
  Connectivity() = default;

  /// Row-major dense matrix; explicit zeros are dropped.
  static Connectivity dense(std::size_t rows, std::size_t cols, std::span<const double> row_major);
  /// Every pre connects to every post with weight `w`.
  static Connectivity full(std::size_t rows, std::size_t cols, double w);
  /// Identity pattern scaled by `w`.
  static Connectivity one_to_one(std::size_t n, double w);
  /// Each (post, pre) pair connected independently with probability `p`.
  static Connectivity bernoulli(std::size_t rows, std::size_t cols, double p, double w,
                                std::uint64_t seed);

  /// post += W * pre
  void accumulate(std::span<const double> pre, std::span<double> post) const;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  std::vector<double> to_dense() const;
  std::span<const double> values() const { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> col_start_;
  std::vector<std::uint32_t> row_index_;
  std::vector<double> values_;
};

enum class SynapseMode { PassThrough, LowPass };

/// Non-learning synapse. Pass-through mode emits W * pre; low-pass mode
/// emits y(n) = y(n-1) * exp(-1/tau_f) + W * pre(n).
class StaticSynapse final : public Element {
 public:
  explicit StaticSynapse(Connectivity weights, SynapseMode mode = SynapseMode::PassThrough,
                         double tau_f = 1.0);

  /// Writes the postsynaptic drive for one step into `drive` (overwrites).
  void propagate(std::span<const double> pre, std::span<double> drive);

  const Connectivity& weights() const { return weights_; }
  SynapseMode mode() const { return mode_; }

  const std::vector<NodeSpec>& inputs() const override { return inputs_; }
  const std::vector<NodeSpec>& outputs() const override { return outputs_; }
  void step(std::span<const SignalView> in, std::span<Signal> out) override;
  void reset() override;
  void clear_activity() override { reset(); }

 private:
  Connectivity weights_;
  SynapseMode mode_;
  double decay_;
  std::vector<double> filtered_;
  std::vector<NodeSpec> inputs_;
  std::vector<NodeSpec> outputs_;
};

enum class BoundMode { Unipolar, Bipolar };

/// Elementwise clamp to [0, w_max] (unipolar) or [-w_max, w_max] (bipolar).
void clip_weights(std::span<double> weights, BoundMode mode, double w_max);

/// Modulated three-factor update
///
///   dW[j][i] = lr * t_e[i] * (r0 * t_m[j] - t_o[j])
///
/// written row-major into `delta` (t_o.size() rows by t_e.size() cols).
void mse_delta_w(double lr, std::span<const double> t_e, std::span<const double> t_o,
                 std::span<const double> t_m, double r0, std::span<double> delta);

/// Parameters of a plastic synapse governed by the modulated rule.
struct MseRuleParams {
  double tau = 1.0;    ///< input low-pass
  double tau_m = 1.0;  ///< modulatory low-pass
  double pre_a = 0.5, pre_b = 0.5;
  double post_a = 0.5, post_b = 0.5;
  double mod_a = 0.5, mod_b = 0.5;
  double r0 = 1.0;
  double lr = 0.01;
  double w_lim = 0.1;
  BoundMode bound = BoundMode::Unipolar;
};

/// Dense learned synapse with presynaptic, postsynaptic and modulatory
/// traces. One modulatory line per postsynaptic unit.
///
/// Per step: low-pass the pre and modulatory inputs, advance the traces
/// (pre and mod traces from the filtered signals, post trace from raw
/// spikes), apply the weight update if learning is enabled and clip to the
/// bounds, then emit W * filtered_pre.
class PlasticSynapseMSE final : public Element {
 public:
  /// Weights drawn uniformly over the bound interval, seeded.
  PlasticSynapseMSE(std::size_t n_post, std::size_t n_pre, const MseRuleParams& params,
                    std::uint64_t seed);
  /// Explicit initial weights, row-major n_post x n_pre.
  PlasticSynapseMSE(std::size_t n_post, std::size_t n_pre, const MseRuleParams& params,
                    std::vector<double> initial_weights);

  void update(std::span<const double> pre, std::span<const double> mod,
              std::span<const double> post, std::span<double> drive);

  std::size_t n_pre() const { return n_pre_; }
  std::size_t n_post() const { return n_post_; }
  const MseRuleParams& params() const { return params_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> initial_weights() const { return initial_; }
  double weight(std::size_t post, std::size_t pre) const { return weights_[post * n_pre_ + pre]; }

  const Trace& pre_trace() const { return pre_trace_; }
  const Trace& post_trace() const { return post_trace_; }
  const Trace& mod_trace() const { return mod_trace_; }
  std::span<const double> filtered_pre() const { return pre_filter_.values(); }
  std::span<const double> filtered_mod() const { return mod_filter_.values(); }

  bool learning() const { return learning_; }
  void set_learning_rate(double lr) { params_.lr = lr; }
  void set_weights(std::span<const double> w);

  const std::vector<NodeSpec>& inputs() const override { return inputs_; }
  const std::vector<NodeSpec>& outputs() const override { return outputs_; }
  void step(std::span<const SignalView> in, std::span<Signal> out) override;
  void reset() override;
  void clear_activity() override;
  void set_learning(bool enabled) override { learning_ = enabled; }

 private:
  std::size_t n_post_;
  std::size_t n_pre_;
  MseRuleParams params_;
  std::vector<double> weights_;
  std::vector<double> initial_;
  LowPassFilter pre_filter_;
  LowPassFilter mod_filter_;
  Trace pre_trace_;
  Trace post_trace_;
  Trace mod_trace_;
  std::vector<double> scaled_pre_;
  std::vector<double> error_;
  std::vector<std::size_t> active_;
  bool learning_ = true;
  std::vector<NodeSpec> inputs_;
  std::vector<NodeSpec> outputs_;
};

/// Bernoulli rate encoder: channel i spikes with probability clamp(g * x_i, 0, 1).
class PoissonEncoder {
 public:
  PoissonEncoder(std::size_t width, double gain, std::uint64_t seed);

  /// Throws Errc::InputRangeError if any intensity lies outside [0, 1].
  void encode(std::span<const double> x, std::span<double> spikes);
  void reseed(std::uint64_t seed);

  std::size_t width() const { return width_; }
  double gain() const { return gain_; }

 private:
  std::size_t width_;
  double gain_;
  Rng rng_;
};

/// A LIF layer together with its afferent synapses, advanced as one element.
///
/// Each afferent contributes an input node named after it. Plastic afferents
/// add a second node `<name>.mod` for the modulatory lines and see the
/// layer's own previous spikes as their postsynaptic signal. The drive of
/// all afferents is summed into x(n) without an extra step of delay, so one
/// step of latency is paid per axonal hop between populations.
class LifPopulation final : public Element {
 public:
  /// Input added to x(n) unchanged.
  struct Direct {};
  using Synapse = std::variant<Direct, StaticSynapse, PlasticSynapseMSE>;
  struct Afferent {
    std::string name;
    Synapse synapse;
  };

  LifPopulation(std::size_t n, double tau, double v_th, std::vector<Afferent> afferents);

  const LifLayer& neurons() const { return lif_; }
  PlasticSynapseMSE& plastic(std::string_view name);
  const PlasticSynapseMSE& plastic(std::string_view name) const;
  const StaticSynapse& static_synapse(std::string_view name) const;
  /// Drive contributed by one afferent on the last step.
  std::span<const double> afferent_drive(std::string_view name) const;

  const std::vector<NodeSpec>& inputs() const override { return inputs_; }
  const std::vector<NodeSpec>& outputs() const override { return outputs_; }
  void step(std::span<const SignalView> in, std::span<Signal> out) override;
  void reset() override;
  void clear_activity() override;
  void set_learning(bool enabled) override;

 private:
  std::size_t find(std::string_view name) const;

  LifLayer lif_;
  std::vector<Afferent> afferents_;
  std::vector<std::size_t> first_input_;
  std::vector<std::vector<double>> drives_;
  std::vector<double> total_;
  std::vector<NodeSpec> inputs_;
  std::vector<NodeSpec> outputs_;
};

}  // namespace spikeopt
