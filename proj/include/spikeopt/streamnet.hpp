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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spikeopt {

/// Dense payload carried by every edge. Spikes are 0.0 / 1.0 entries.
using Signal = std::vector<double>;
using SignalView = std::span<const double>;

/// A labeled input or output node of an element and the fixed width of the
/// signal it carries.
struct NodeSpec {
  std::string label;
  std::size_t width = 0;
};

/// A stateful unit of computation advancing one time step per call.
///
/// Each call to step() consumes exactly one signal per declared input node
/// and must overwrite every entry of every output signal. Node lists are fixed
/// once the element is constructed.
class Element {
 public:
  virtual ~Element() = default;

  virtual const std::vector<NodeSpec>& inputs() const = 0;
  virtual const std::vector<NodeSpec>& outputs() const = 0;

  /// `in` holds one view per input node; `out` is pre-sized to the output
  /// widths.
  virtual void step(std::span<const SignalView> in, std::span<Signal> out) = 0;

  /// Restores the element to the state it had right after construction,
  /// including any learned parameters.
  virtual void reset() = 0;

  /// Zeroes transient activity (potentials, filters, traces) but keeps
  /// learned parameters. Used between samples of a stream.
  virtual void clear_activity() { reset(); }

  /// Enables or freezes plasticity. No-op for elements that do not learn.
  virtual void set_learning(bool /*enabled*/) {}
};

/// Endpoint of a wire. An empty `element` refers to a port of the enclosing
/// net (an input port when used as a source, an output port as destination).
struct NodeRef {
  std::string element;
  std::string node;

  static NodeRef port(std::string label) { return {std::string{}, std::move(label)}; }
  static NodeRef of(std::string element, std::string node) {
    return {std::move(element), std::move(node)};
  }
  bool is_port() const { return element.empty(); }
};

/// Directed graph of elements where every input node has exactly one source.
///
/// Execution is synchronous: during a step, each element reads its sources'
/// outputs from the previous step (net input ports are read from the current
/// call), so the order in which elements are advanced is irrelevant and cycles
/// are well defined. All outputs are zero before the first step. Net output
/// ports report the freshly produced outputs of their source nodes.
///
/// A StreamNet is itself an Element and can be nested inside another net.
class StreamNet final : public Element {
 public:
  StreamNet() = default;
  StreamNet(const StreamNet&) = delete;
  StreamNet& operator=(const StreamNet&) = delete;
  StreamNet(StreamNet&&) noexcept = default;
  StreamNet& operator=(StreamNet&&) noexcept = default;
  ~StreamNet() override = default;

  void add_input_port(std::string label, std::size_t width);
  void add_output_port(std::string label, std::size_t width);

  /// Registers `elem` under `name` with all of its inputs unwired.
  /// Throws Errc::DuplicateName.
  Element& add_element(std::string name, std::unique_ptr<Element> elem);

  template <class T, class... Args>
  T& emplace(std::string name, Args&&... args) {
    auto owned = std::make_unique<T>(std::forward<Args>(args)...);
    T& ref = *owned;
    add_element(std::move(name), std::move(owned));
    return ref;
  }

  /// Wires `dst` to `src`. Throws Errc::IndegreeViolation if `dst` already
  /// has a source, Errc::UnknownNode, or Errc::WidthMismatch.
  void connect(const NodeRef& src, const NodeRef& dst);

  /// Empty when every element input and every net output port is wired;
  /// otherwise one message per dangling node.
  std::vector<std::string> validate() const;

  /// Advances every element once. Throws Errc::InvalidGraph if validate()
  /// reports problems and Errc::WidthMismatch on malformed inputs.
  std::vector<Signal> step(std::span<const SignalView> inputs);
  std::vector<Signal> step(std::initializer_list<SignalView> inputs);

  // Element interface.
  const std::vector<NodeSpec>& inputs() const override { return input_ports_; }
  const std::vector<NodeSpec>& outputs() const override { return output_ports_; }
  void step(std::span<const SignalView> in, std::span<Signal> out) override;
  void reset() override;
  void clear_activity() override;
  void set_learning(bool enabled) override;

  Element& element(std::string_view name);
  const Element& element(std::string_view name) const;

  template <class T>
  T& element_as(std::string_view name) {
    auto* p = dynamic_cast<T*>(&element(name));
    if (p == nullptr) throw_bad_cast(name);
    return *p;
  }

  bool contains(std::string_view name) const;
  std::size_t size() const { return slots_.size(); }
  std::vector<std::string> element_names() const;

  /// Number of steps taken since construction or the last reset().
  std::uint64_t steps() const { return steps_; }

  /// Advance elements in a random order, reshuffled every step. Results are
  /// unaffected; this exists to exercise the synchronous semantics.
  void set_shuffle_seed(std::optional<std::uint64_t> seed);

 private:
  struct Source {
    bool wired = false;
    bool from_port = false;
    std::size_t element = 0;
    std::size_t node = 0;
  };

  struct Slot {
    std::string name;
    std::unique_ptr<Element> elem;
    std::vector<Source> sources;
    std::vector<Signal> current;
    std::vector<Signal> next;
    std::vector<SignalView> views;
  };

  std::size_t index_of(std::string_view name) const;
  [[noreturn]] static void throw_bad_cast(std::string_view name);
  void ensure_valid();
  void invalidate() { valid_ = false; }

  std::vector<NodeSpec> input_ports_;
  std::vector<NodeSpec> output_ports_;
  std::vector<Source> output_sources_;
  std::vector<Slot> slots_;
  std::vector<std::size_t> order_;
  std::optional<std::uint64_t> shuffle_seed_;
  std::uint64_t shuffle_state_ = 0;
  std::uint64_t steps_ = 0;
  bool valid_ = false;
};

}  // namespace spikeopt
