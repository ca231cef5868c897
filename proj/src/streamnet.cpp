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

#include "spikeopt/streamnet.hpp"

#include <algorithm>

#include "spikeopt/error.hpp"
#include "spikeopt/rng.hpp"

namespace spikeopt {

namespace {

std::string describe(const NodeRef& ref) {
  if (ref.is_port()) return "port '" + ref.node + "'";
  return "'" + ref.element + "." + ref.node + "'";
}

std::size_t find_node(const std::vector<NodeSpec>& nodes, std::string_view label) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].label == label) return i;
  }
  return nodes.size();
}

void check_port_label(const std::vector<NodeSpec>& ports, const std::string& label) {
  if (find_node(ports, label) != ports.size()) {
    throw Error(Errc::DuplicateName, "port '" + label + "' already declared");
  }
}

}  // namespace

void StreamNet::add_input_port(std::string label, std::size_t width) {
  check_port_label(input_ports_, label);
  input_ports_.push_back({std::move(label), width});
  invalidate();
}

void StreamNet::add_output_port(std::string label, std::size_t width) {
  check_port_label(output_ports_, label);
  output_ports_.push_back({std::move(label), width});
  output_sources_.emplace_back();
  invalidate();
}

Element& StreamNet::add_element(std::string name, std::unique_ptr<Element> elem) {
  if (!elem) throw Error(Errc::Internal, "null element '" + name + "'");
  if (name.empty()) throw Error(Errc::UnknownNode, "element name must not be empty");
  if (contains(name)) {
    throw Error(Errc::DuplicateName, "element '" + name + "' already registered");
  }
  Slot slot;
  slot.name = std::move(name);
  slot.sources.resize(elem->inputs().size());
  for (const auto& out : elem->outputs()) {
    slot.current.emplace_back(out.width, 0.0);
    slot.next.emplace_back(out.width, 0.0);
  }
  slot.views.resize(elem->inputs().size());
  slot.elem = std::move(elem);
  slots_.push_back(std::move(slot));
  order_.push_back(order_.size());
  invalidate();
  return *slots_.back().elem;
}

void StreamNet::connect(const NodeRef& src, const NodeRef& dst) {
  Source source;
  source.wired = true;
  std::size_t src_width = 0;
  if (src.is_port()) {
    const auto idx = find_node(input_ports_, src.node);
    if (idx == input_ports_.size()) {
      throw Error(Errc::UnknownNode, "unknown source " + describe(src));
    }
    source.from_port = true;
    source.node = idx;
    src_width = input_ports_[idx].width;
  } else {
    const auto e = index_of(src.element);
    if (e == slots_.size()) throw Error(Errc::UnknownNode, "unknown source " + describe(src));
    const auto& outs = slots_[e].elem->outputs();
    const auto idx = find_node(outs, src.node);
    if (idx == outs.size()) throw Error(Errc::UnknownNode, "unknown source " + describe(src));
    source.element = e;
    source.node = idx;
    src_width = outs[idx].width;
  }

  Source* target = nullptr;
  std::size_t dst_width = 0;
  if (dst.is_port()) {
    const auto idx = find_node(output_ports_, dst.node);
    if (idx == output_ports_.size()) {
      throw Error(Errc::UnknownNode, "unknown destination " + describe(dst));
    }
    target = &output_sources_[idx];
    dst_width = output_ports_[idx].width;
  } else {
    const auto e = index_of(dst.element);
    if (e == slots_.size()) throw Error(Errc::UnknownNode, "unknown destination " + describe(dst));
    const auto& ins = slots_[e].elem->inputs();
    const auto idx = find_node(ins, dst.node);
    if (idx == ins.size()) throw Error(Errc::UnknownNode, "unknown destination " + describe(dst));
    target = &slots_[e].sources[idx];
    dst_width = ins[idx].width;
  }

  if (target->wired) {
    throw Error(Errc::IndegreeViolation, describe(dst) + " already has a source");
  }
  if (src_width != dst_width) {
    throw Error(Errc::WidthMismatch, "cannot wire " + describe(src) + " (width " +
                                         std::to_string(src_width) + ") to " + describe(dst) +
                                         " (width " + std::to_string(dst_width) + ")");
  }
  *target = source;
  invalidate();
}

std::vector<std::string> StreamNet::validate() const {
  std::vector<std::string> problems;
  for (const auto& slot : slots_) {
    const auto& ins = slot.elem->inputs();
    for (std::size_t i = 0; i < ins.size(); ++i) {
      if (!slot.sources[i].wired) {
        problems.push_back("input '" + slot.name + "." + ins[i].label + "' is unwired");
      }
    }
  }
  for (std::size_t i = 0; i < output_ports_.size(); ++i) {
    if (!output_sources_[i].wired) {
      problems.push_back("output port '" + output_ports_[i].label + "' is unwired");
    }
  }
  return problems;
}

void StreamNet::ensure_valid() {
  if (valid_) return;
  const auto problems = validate();
  if (!problems.empty()) {
    std::string msg = "net is not fully wired:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(Errc::InvalidGraph, msg);
  }
  valid_ = true;
}

void StreamNet::step(std::span<const SignalView> in, std::span<Signal> out) {
  ensure_valid();
  if (in.size() != input_ports_.size()) {
    throw Error(Errc::WidthMismatch, "expected " + std::to_string(input_ports_.size()) +
                                         " input signals, got " + std::to_string(in.size()));
  }
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i].size() != input_ports_[i].width) {
      throw Error(Errc::WidthMismatch, "input port '" + input_ports_[i].label + "' expects width " +
                                           std::to_string(input_ports_[i].width) + ", got " +
                                           std::to_string(in[i].size()));
    }
  }

  if (shuffle_seed_) {
    Rng rng(derive_seed(*shuffle_seed_, shuffle_state_++));
    for (std::size_t i = order_.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i - 1)));
      std::swap(order_[i - 1], order_[j]);
    }
  }

  for (const auto e : order_) {
    auto& slot = slots_[e];
    for (std::size_t i = 0; i < slot.sources.size(); ++i) {
      const auto& src = slot.sources[i];
      slot.views[i] = src.from_port ? in[src.node] : SignalView(slots_[src.element].current[src.node]);
    }
    slot.elem->step(slot.views, slot.next);
  }
  for (auto& slot : slots_) std::swap(slot.current, slot.next);

  for (std::size_t o = 0; o < output_sources_.size(); ++o) {
    const auto& src = output_sources_[o];
    const SignalView value = src.from_port ? in[src.node] : SignalView(slots_[src.element].current[src.node]);
    out[o].assign(value.begin(), value.end());
  }
  ++steps_;
}

std::vector<Signal> StreamNet::step(std::span<const SignalView> inputs) {
  std::vector<Signal> out(output_ports_.size());
  step(inputs, std::span<Signal>(out));
  return out;
}

std::vector<Signal> StreamNet::step(std::initializer_list<SignalView> inputs) {
  return step(std::span<const SignalView>(inputs.begin(), inputs.size()));
}

void StreamNet::reset() {
  for (auto& slot : slots_) {
    slot.elem->reset();
    for (auto& s : slot.current) std::fill(s.begin(), s.end(), 0.0);
    for (auto& s : slot.next) std::fill(s.begin(), s.end(), 0.0);
  }
  steps_ = 0;
  shuffle_state_ = 0;
}

void StreamNet::clear_activity() {
  for (auto& slot : slots_) {
    slot.elem->clear_activity();
    for (auto& s : slot.current) std::fill(s.begin(), s.end(), 0.0);
    for (auto& s : slot.next) std::fill(s.begin(), s.end(), 0.0);
  }
}

void StreamNet::set_learning(bool enabled) {
  for (auto& slot : slots_) slot.elem->set_learning(enabled);
}

std::size_t StreamNet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].name == name) return i;
  }
  return slots_.size();
}

bool StreamNet::contains(std::string_view name) const { return index_of(name) != slots_.size(); }

Element& StreamNet::element(std::string_view name) {
  const auto i = index_of(name);
  if (i == slots_.size()) throw Error(Errc::UnknownNode, "no element named '" + std::string(name) + "'");
  return *slots_[i].elem;
}

const Element& StreamNet::element(std::string_view name) const {
  const auto i = index_of(name);
  if (i == slots_.size()) throw Error(Errc::UnknownNode, "no element named '" + std::string(name) + "'");
  return *slots_[i].elem;
}

std::vector<std::string> StreamNet::element_names() const {
  std::vector<std::string> names;
  names.reserve(slots_.size());
  for (const auto& s : slots_) names.push_back(s.name);
  return names;
}

void StreamNet::set_shuffle_seed(std::optional<std::uint64_t> seed) {
  shuffle_seed_ = seed;
  shuffle_state_ = 0;
  if (!seed) {
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  }
}

void StreamNet::throw_bad_cast(std::string_view name) {
  throw Error(Errc::UnknownNode, "element '" + std::string(name) + "' has a different type");
}

}  // namespace spikeopt
