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

#include "spikeopt/architectures.hpp"

#include <utility>
#include <vector>

#include "spikeopt/error.hpp"
#include "spikeopt/rng.hpp"

namespace spikeopt {

namespace {

// Seed streams derived from the build seed.
constexpr std::uint64_t kMaskStream = 1;
constexpr std::uint64_t kWeightStream = 2;

void add_rule_dims(ParamSpace& space, const std::string& p) {
  space.add_continuous(p + ".tau", 0.1, 4.0, Scale::Linear, "input spike low-pass tau")
      .add_continuous(p + ".tau_m", 0.1, 4.0, Scale::Linear, "modulatory spike low-pass tau")
      .add_continuous(p + ".pre_a", 0.05, 1.0, Scale::Linear, "presynaptic trace a")
      .add_continuous(p + ".pre_b", 0.05, 1.0, Scale::Linear, "presynaptic trace b")
      .add_continuous(p + ".post_a", 0.05, 1.0, Scale::Linear, "postsynaptic trace a")
      .add_continuous(p + ".post_b", 0.05, 1.0, Scale::Linear, "postsynaptic trace b")
      .add_continuous(p + ".mod_a", 0.05, 1.0, Scale::Linear, "modulatory trace a")
      .add_continuous(p + ".mod_b", 0.05, 1.0, Scale::Linear, "modulatory trace b")
      .add_continuous(p + ".r0", 0.1, 4.0, Scale::Linear, "modulatory trace weight R0")
      .add_continuous(p + ".lr", 1e-4, 0.5, Scale::Log, "learning rate")
      .add_continuous(p + ".wlim", 0.01, 0.5, Scale::Linear, "weight limit");
}

void push_rule(std::vector<double>& v, const MseRuleParams& r) {
  v.insert(v.end(), {r.tau, r.tau_m, r.pre_a, r.pre_b, r.post_a, r.post_b, r.mod_a, r.mod_b, r.r0,
                     r.lr, r.w_lim});
}

MseRuleParams pull_rule(const ParamSpace& space, const ParamConfig& c, const std::string& p) {
  MseRuleParams r;
  r.tau = space.value(c, p + ".tau");
  r.tau_m = space.value(c, p + ".tau_m");
  r.pre_a = space.value(c, p + ".pre_a");
  r.pre_b = space.value(c, p + ".pre_b");
  r.post_a = space.value(c, p + ".post_a");
  r.post_b = space.value(c, p + ".post_b");
  r.mod_a = space.value(c, p + ".mod_a");
  r.mod_b = space.value(c, p + ".mod_b");
  r.r0 = space.value(c, p + ".r0");
  r.lr = space.value(c, p + ".lr");
  r.w_lim = space.value(c, p + ".wlim");
  return r;
}

BoundMode take_bound_mode(FlatConfig& flat, std::string_view prefix) {
  const std::string key = std::string(prefix) + ".bound_mode";
  const auto value = flat.find(key);
  if (!value) return BoundMode::Unipolar;
  flat.erase(key);
  if (*value == "unipolar") return BoundMode::Unipolar;
  if (*value == "bipolar") return BoundMode::Bipolar;
  throw Error(Errc::ConfigError, "'" + key + "' must be 'unipolar' or 'bipolar', got '" + *value + "'");
}

const char* bound_name(BoundMode m) { return m == BoundMode::Bipolar ? "bipolar" : "unipolar"; }

}  // namespace

const char* case_name(Case c) noexcept { return c == Case::Shallow ? "shallow" : "complex"; }

Case parse_case(std::string_view name) {
  if (name == "shallow") return Case::Shallow;
  if (name == "complex") return Case::Complex;
  throw Error(Errc::ConfigError, "unknown case '" + std::string(name) + "' (expected shallow|complex)");
}

std::string_view learned_prefix(Case c) { return c == Case::Shallow ? "syn" : "kc2mbon"; }

TopologySizes TopologySizes::for_task(std::size_t n_inputs, std::size_t n_classes,
                                      std::size_t n_kenyon) {
  TopologySizes s;
  s.n_inputs = n_inputs;
  s.n_glomeruli = n_inputs;
  s.n_kenyon = n_kenyon;
  s.n_outputs = n_classes;
  s.n_modulatory = n_classes;
  return s;
}

ParamSpace design_space(Case c) {
  ParamSpace space;
  if (c == Case::Shallow) {
    space.add_continuous("out.tau", 1.0, 8.0, Scale::Linear, "output neuron tau");
    add_rule_dims(space, "syn");
    return space;
  }
  space.add_continuous("glom.tau", 1.0, 8.0, Scale::Linear, "glomerulus neuron tau")
      .add_continuous("lat.tau", 1.0, 8.0, Scale::Linear, "lateral neuron tau")
      .add_continuous("kc.tau", 1.0, 8.0, Scale::Linear, "Kenyon cell neuron tau")
      .add_continuous("inh.tau", 1.0, 8.0, Scale::Linear, "inhibitory neuron tau")
      .add_continuous("mbon.tau", 1.0, 8.0, Scale::Linear, "output neuron tau")
      .add_continuous("inp2glom.w0", 2.0, 10.0, Scale::Linear, "input to glomerulus weight")
      .add_continuous("inp2lat.w0", 0.0, 0.5, Scale::Linear, "input to lateral weight")
      .add_continuous("lat2glom.w0", 0.0, 2.0, Scale::Linear, "lateral to glomerulus weight")
      .add_continuous("glom2inh.w0", 0.0, 0.2, Scale::Linear, "glomerulus to inhibitory weight")
      .add_continuous("glom2kc.w0", 0.0, 0.2, Scale::Linear, "glomerulus to Kenyon cell weight")
      .add_continuous("glom2kc.p0", 0.01, 0.05, Scale::Linear,
                      "glomerulus to Kenyon cell connection probability");
  add_rule_dims(space, "kc2mbon");
  return space;
}

ParamConfig to_config(const ShallowSpec& spec) {
  ParamConfig c;
  c.values.push_back(spec.neuron_tau);
  push_rule(c.values, spec.synapse);
  return c;
}

ParamConfig to_config(const ComplexSpec& s) {
  ParamConfig c;
  c.values = {s.glom_tau,   s.lat_tau,    s.kc_tau,     s.inh_tau,    s.mbon_tau, s.w_inp2glom,
              s.w_inp2lat,  s.w_lat2glom, s.w_glom2inh, s.w_glom2kc, s.p_glom2kc};
  push_rule(c.values, s.synapse);
  return c;
}

ShallowSpec shallow_from(const ParamConfig& config) {
  const auto space = design_space(Case::Shallow);
  space.validate(config);
  ShallowSpec s;
  s.neuron_tau = space.value(config, "out.tau");
  s.synapse = pull_rule(space, config, "syn");
  return s;
}

ComplexSpec complex_from(const ParamConfig& config) {
  const auto space = design_space(Case::Complex);
  space.validate(config);
  ComplexSpec s;
  s.glom_tau = space.value(config, "glom.tau");
  s.lat_tau = space.value(config, "lat.tau");
  s.kc_tau = space.value(config, "kc.tau");
  s.inh_tau = space.value(config, "inh.tau");
  s.mbon_tau = space.value(config, "mbon.tau");
  s.w_inp2glom = space.value(config, "inp2glom.w0");
  s.w_inp2lat = space.value(config, "inp2lat.w0");
  s.w_lat2glom = space.value(config, "lat2glom.w0");
  s.w_glom2inh = space.value(config, "glom2inh.w0");
  s.w_glom2kc = space.value(config, "glom2kc.w0");
  s.p_glom2kc = space.value(config, "glom2kc.p0");
  s.synapse = pull_rule(space, config, "kc2mbon");
  return s;
}

ShallowSpec shallow_from(const FlatConfig& flat) {
  FlatConfig rest = flat;
  const auto bound = take_bound_mode(rest, learned_prefix(Case::Shallow));
  auto spec = shallow_from(design_space(Case::Shallow).from_flat(rest));
  spec.synapse.bound = bound;
  return spec;
}

ComplexSpec complex_from(const FlatConfig& flat) {
  FlatConfig rest = flat;
  const auto bound = take_bound_mode(rest, learned_prefix(Case::Complex));
  auto spec = complex_from(design_space(Case::Complex).from_flat(rest));
  spec.synapse.bound = bound;
  return spec;
}

FlatConfig to_flat(const ShallowSpec& spec) {
  auto flat = design_space(Case::Shallow).to_flat(to_config(spec));
  flat.set("syn.bound_mode", bound_name(spec.synapse.bound));
  return flat;
}

FlatConfig to_flat(const ComplexSpec& spec) {
  auto flat = design_space(Case::Complex).to_flat(to_config(spec));
  flat.set("kc2mbon.bound_mode", bound_name(spec.synapse.bound));
  return flat;
}

void validate(const ShallowSpec& spec) { design_space(Case::Shallow).validate(to_config(spec)); }
void validate(const ComplexSpec& spec) { design_space(Case::Complex).validate(to_config(spec)); }

Network build_shallow(const ShallowSpec& spec, std::size_t n_inputs, std::size_t n_classes,
                      std::uint64_t seed) {
  validate(spec);
  if (n_inputs == 0 || n_classes < 2) {
    throw Error(Errc::ConfigError, "shallow net needs inputs and at least two classes");
  }
  Network nw;
  nw.kind = Case::Shallow;
  nw.n_inputs = n_inputs;
  nw.n_classes = n_classes;
  auto& net = nw.net;
  net.add_input_port("input", n_inputs);
  net.add_input_port("mod", n_classes);
  net.add_output_port("spikes", n_classes);

  std::vector<LifPopulation::Afferent> afferents;
  afferents.push_back({"syn", PlasticSynapseMSE(n_classes, n_inputs, spec.synapse,
                                                derive_seed(seed, kWeightStream))});
  auto& out = net.emplace<LifPopulation>("out", n_classes, spec.neuron_tau, kDefaultThreshold,
                                         std::move(afferents));
  net.connect(NodeRef::port("input"), NodeRef::of("out", "syn"));
  net.connect(NodeRef::port("mod"), NodeRef::of("out", "syn.mod"));
  net.connect(NodeRef::of("out", "s"), NodeRef::port("spikes"));
  nw.learned = &out.plastic("syn");
  return nw;
}

Network build_complex(const ComplexSpec& spec, const TopologySizes& sizes, std::uint64_t seed) {
  validate(spec);
  if (sizes.n_glomeruli != sizes.n_inputs) {
    throw Error(Errc::ConfigError, "glomeruli are wired one-to-one and must match the input width");
  }
  if (sizes.n_modulatory != sizes.n_outputs) {
    throw Error(Errc::ConfigError, "one modulatory line per output neuron is required");
  }
  if (sizes.n_lateral != 1 || sizes.n_inhibitory != 1) {
    throw Error(Errc::ConfigError, "the circuit has exactly one lateral and one inhibitory neuron");
  }
  if (sizes.n_inputs == 0 || sizes.n_kenyon == 0 || sizes.n_outputs < 2) {
    throw Error(Errc::ConfigError, "complex net needs inputs, Kenyon cells and at least two classes");
  }

  const auto n_in = sizes.n_inputs;
  const auto n_glom = sizes.n_glomeruli;
  const auto n_kc = sizes.n_kenyon;
  const auto n_out = sizes.n_outputs;

  Network nw;
  nw.kind = Case::Complex;
  nw.n_inputs = n_in;
  nw.n_classes = n_out;
  auto& net = nw.net;
  net.add_input_port("input", n_in);
  net.add_input_port("mod", n_out);
  net.add_output_port("spikes", n_out);

  using Aff = LifPopulation::Afferent;

  std::vector<Aff> lat;
  lat.push_back({"inp2lat", StaticSynapse(Connectivity::full(1, n_in, spec.w_inp2lat))});
  net.emplace<LifPopulation>("lat", 1, spec.lat_tau, kDefaultThreshold, std::move(lat));

  // Inhibitory projections carry negative weights; the table values are
  // magnitudes.
  std::vector<Aff> glom;
  glom.push_back({"inp2glom", StaticSynapse(Connectivity::one_to_one(n_glom, spec.w_inp2glom))});
  glom.push_back({"lat2glom", StaticSynapse(Connectivity::full(n_glom, 1, -spec.w_lat2glom))});
  net.emplace<LifPopulation>("glom", n_glom, spec.glom_tau, kDefaultThreshold, std::move(glom));

  std::vector<Aff> inh;
  inh.push_back({"glom2inh", StaticSynapse(Connectivity::full(1, n_glom, spec.w_glom2inh))});
  net.emplace<LifPopulation>("inh", 1, spec.inh_tau, kDefaultThreshold, std::move(inh));

  // No separate row exists for the inhibitory-to-Kenyon weight; it reuses
  // the glomerulus-to-inhibitory magnitude.
  std::vector<Aff> kc;
  kc.push_back({"glom2kc", StaticSynapse(Connectivity::bernoulli(n_kc, n_glom, spec.p_glom2kc,
                                                                 spec.w_glom2kc,
                                                                 derive_seed(seed, kMaskStream)))});
  kc.push_back({"inh2kc", StaticSynapse(Connectivity::full(n_kc, 1, -spec.w_glom2inh))});
  net.emplace<LifPopulation>("kc", n_kc, spec.kc_tau, kDefaultThreshold, std::move(kc));

  std::vector<Aff> mbon;
  mbon.push_back({"kc2mbon", PlasticSynapseMSE(n_out, n_kc, spec.synapse,
                                               derive_seed(seed, kWeightStream))});
  auto& out = net.emplace<LifPopulation>("mbon", n_out, spec.mbon_tau, kDefaultThreshold,
                                         std::move(mbon));

  net.connect(NodeRef::port("input"), NodeRef::of("glom", "inp2glom"));
  net.connect(NodeRef::port("input"), NodeRef::of("lat", "inp2lat"));
  net.connect(NodeRef::of("lat", "s"), NodeRef::of("glom", "lat2glom"));
  net.connect(NodeRef::of("glom", "s"), NodeRef::of("inh", "glom2inh"));
  net.connect(NodeRef::of("glom", "s"), NodeRef::of("kc", "glom2kc"));
  net.connect(NodeRef::of("inh", "s"), NodeRef::of("kc", "inh2kc"));
  net.connect(NodeRef::of("kc", "s"), NodeRef::of("mbon", "kc2mbon"));
  net.connect(NodeRef::port("mod"), NodeRef::of("mbon", "kc2mbon.mod"));
  net.connect(NodeRef::of("mbon", "s"), NodeRef::port("spikes"));
  nw.learned = &out.plastic("kc2mbon");
  return nw;
}

ShallowSpec reference_shallow() {
  ShallowSpec s;
  s.neuron_tau = 4.0;
  s.synapse.tau = 1.0;
  s.synapse.tau_m = 1.0;
  s.synapse.pre_a = 0.5;
  s.synapse.pre_b = 0.5;
  s.synapse.post_a = 0.5;
  s.synapse.post_b = 0.5;
  s.synapse.mod_a = 0.5;
  s.synapse.mod_b = 0.5;
  s.synapse.r0 = 1.0;
  s.synapse.lr = 0.01;
  s.synapse.w_lim = 0.1;
  return s;
}

ComplexSpec reference_complex() {
  ComplexSpec s;
  s.synapse = reference_shallow().synapse;
  return s;
}

}  // namespace spikeopt
