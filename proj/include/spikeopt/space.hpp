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
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "spikeopt/rng.hpp"

namespace spikeopt {

/// Ordered `key = value` text configuration. '#' starts a comment.
class FlatConfig {
 public:
  /// Throws Errc::ConfigError naming the offending line.
  static FlatConfig parse(std::string_view text);
  static FlatConfig load(const std::filesystem::path& path);

  std::string to_text() const;
  void save(const std::filesystem::path& path) const;

  bool contains(std::string_view key) const;
  /// Throws Errc::ConfigError for a missing key.
  const std::string& get(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;
  void set(std::string key, std::string value);
  bool erase(std::string_view key);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

enum class Scale { Linear, Log };

struct IntegerRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct ContinuousRange {
  double lo = 0.0;
  double hi = 1.0;
  Scale scale = Scale::Linear;
};

struct CategoricalChoices {
  std::vector<std::string> choices;
};

struct Dimension {
  std::string name;
  std::variant<IntegerRange, ContinuousRange, CategoricalChoices> domain;
  std::string description;
};

/// A point in a ParamSpace: one number per dimension. Categorical values are
/// stored as the index of the chosen option.
struct ParamConfig {
  std::vector<double> values;

  friend bool operator==(const ParamConfig&, const ParamConfig&) = default;
};

/// Mixed integer / continuous / categorical search space.
class ParamSpace {
 public:
  ParamSpace& add_integer(std::string name, std::int64_t lo, std::int64_t hi,
                          std::string description = {});
  ParamSpace& add_continuous(std::string name, double lo, double hi, Scale scale = Scale::Linear,
                             std::string description = {});
  ParamSpace& add_categorical(std::string name, std::vector<std::string> choices,
                              std::string description = {});

  std::size_t size() const { return dims_.size(); }
  const std::vector<Dimension>& dimensions() const { return dims_; }
  const Dimension& dimension(std::size_t i) const { return dims_[i]; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Uniform per dimension; log-uniform for log-scaled dimensions.
  ParamConfig sample(Rng& rng) const;

  /// Throws Errc::RangeError naming the first dimension out of range.
  void validate(const ParamConfig& config) const;
  bool contains(const ParamConfig& config) const;

  /// Numeric encoding for the surrogate: log dimensions in log space,
  /// categoricals as ordinal indices.
  std::vector<double> features(const ParamConfig& config) const;

  /// Parses exactly the space's keys. Unknown or missing keys are
  /// Errc::ConfigError; out-of-range values Errc::RangeError.
  ParamConfig from_flat(const FlatConfig& flat) const;
  FlatConfig to_flat(const ParamConfig& config) const;

  /// Value of dimension `name` in `config` (categoricals as index).
  double value(const ParamConfig& config, std::string_view name) const;
  std::string format_value(std::size_t dim, double value) const;

 private:
  std::vector<Dimension> dims_;
};

std::string format_double(double v);

}  // namespace spikeopt
