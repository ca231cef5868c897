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
#include <string>
#include <string_view>

#include "spikeopt/snn.hpp"
#include "spikeopt/space.hpp"
#include "spikeopt/streamnet.hpp"

namespace spikeopt {

enum class Case { Shallow, Complex };

const char* case_name(Case c) noexcept;
/// Throws Errc::ConfigError for anything but "shallow" / "complex".
Case parse_case(std::string_view name);

/// Single layer of output neurons fed directly by the encoded inputs through
/// one plastic synapse.
struct ShallowSpec {
  double neuron_tau = 4.0;
  MseRuleParams synapse;
};

/// Insect olfactory circuit: glomeruli with lateral inhibition, a sparse
/// Kenyon-cell expansion under global inhibition, and plastic Kenyon-cell to
/// output synapses with class-specific modulatory lines.
struct ComplexSpec {
  double glom_tau = 2.0;
  double lat_tau = 2.0;
  double kc_tau = 2.0;
  double inh_tau = 2.0;
  double mbon_tau = 2.0;
  double w_inp2glom = 4.0;
  double w_inp2lat = 0.01;
  double w_lat2glom = 0.5;
  double w_glom2inh = 0.01;
  double w_glom2kc = 0.1;
  double p_glom2kc = 0.02;
  MseRuleParams synapse;
};

struct TopologySizes {
  std::size_t n_inputs = 784;
  std::size_t n_glomeruli = 784;
  std::size_t n_kenyon = 5000;
  std::size_t n_outputs = 10;
  std::size_t n_modulatory = 10;
  std::size_t n_lateral = 1;
  std::size_t n_inhibitory = 1;

  /// One glomerulus per input and one output / modulatory line per class.
  static TopologySizes for_task(std::size_t n_inputs, std::size_t n_classes,
                                std::size_t n_kenyon = 5000);
  std::size_t learned_synapses() const { return n_kenyon * n_outputs; }
};

/// A built network plus a handle on its learned synapse.
///
/// Every network exposes input ports "input" (encoded spikes) and "mod"
/// (one modulatory line per class) and the output port "spikes".
struct Network {
  StreamNet net;
  Case kind = Case::Shallow;
  std::size_t n_inputs = 0;
  std::size_t n_classes = 0;
  /// Owned by an element inside `net`; stable for the net's lifetime.
  PlasticSynapseMSE* learned = nullptr;
};

/// Throws Errc::RangeError naming the offending parameter.
void validate(const ShallowSpec& spec);
void validate(const ComplexSpec& spec);

Network build_shallow(const ShallowSpec& spec, std::size_t n_inputs, std::size_t n_classes,
                      std::uint64_t seed);
Network build_complex(const ComplexSpec& spec, const TopologySizes& sizes, std::uint64_t seed);

/// Search space mirroring the design-space tables: 12 dimensions for the
/// shallow case, 22 for the complex case. The learning rate is log-scaled.
ParamSpace design_space(Case c);

ShallowSpec shallow_from(const ParamConfig& config);
ComplexSpec complex_from(const ParamConfig& config);
ParamConfig to_config(const ShallowSpec& spec);
ParamConfig to_config(const ComplexSpec& spec);

/// Flat config of a case: every design-space key, plus the optional
/// `<synapse>.bound_mode = unipolar|bipolar`.
ShallowSpec shallow_from(const FlatConfig& flat);
ComplexSpec complex_from(const FlatConfig& flat);
FlatConfig to_flat(const ShallowSpec& spec);
FlatConfig to_flat(const ComplexSpec& spec);

/// Key prefix of the learned synapse's parameters ("syn" or "kc2mbon").
std::string_view learned_prefix(Case c);

/// Hand-picked in-range configurations used as defaults and smoke tests.
ShallowSpec reference_shallow();
ComplexSpec reference_complex();

}  // namespace spikeopt
