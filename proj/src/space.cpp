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

#include "spikeopt/space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spikeopt/error.hpp"

namespace spikeopt {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw Error(Errc::ConfigError, "'" + key + "': cannot parse '" + text + "' as a number");
  }
  return v;
}

std::string label_of(const Dimension& d) {
  return d.description.empty() ? d.name : d.description;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// FlatConfig

FlatConfig FlatConfig::parse(std::string_view text) {
  FlatConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": empty key");
    if (cfg.contains(key)) {
      throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": duplicate key '" +
                                         std::string(key) + "'");
    }
    cfg.entries_.emplace_back(std::string(key), std::string(value));
  }
  return cfg;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string FlatConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

void FlatConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  out << to_text();
  if (!out) throw Error(Errc::IoError, "write failed for '" + path.string() + "'");
}

bool FlatConfig::contains(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> FlatConfig::find(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& FlatConfig::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw Error(Errc::ConfigError, "missing key '" + std::string(key) + "'");
}

void FlatConfig::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

bool FlatConfig::erase(std::string_view key) {
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->first == key) {
      entries_.erase(it);
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// ParamSpace

ParamSpace& ParamSpace::add_integer(std::string name, std::int64_t lo, std::int64_t hi,
                                    std::string description) {
  if (lo > hi) throw Error(Errc::ConfigError, "integer dimension '" + name + "' has lo > hi");
  if (index_of(name)) throw Error(Errc::DuplicateName, "dimension '" + name + "' already exists");
  dims_.push_back({std::move(name), IntegerRange{lo, hi}, std::move(description)});
  return *this;
}

ParamSpace& ParamSpace::add_continuous(std::string name, double lo, double hi, Scale scale,
                                       std::string description) {
  if (!(lo < hi)) throw Error(Errc::ConfigError, "continuous dimension '" + name + "' needs lo < hi");
  if (scale == Scale::Log && !(lo > 0.0)) {
    throw Error(Errc::ConfigError, "log-scaled dimension '" + name + "' needs lo > 0");
  }
  if (index_of(name)) throw Error(Errc::DuplicateName, "dimension '" + name + "' already exists");
  dims_.push_back({std::move(name), ContinuousRange{lo, hi, scale}, std::move(description)});
  return *this;
}

ParamSpace& ParamSpace::add_categorical(std::string name, std::vector<std::string> choices,
                                        std::string description) {
  if (choices.empty()) throw Error(Errc::ConfigError, "categorical dimension '" + name + "' has no choices");
  if (index_of(name)) throw Error(Errc::DuplicateName, "dimension '" + name + "' already exists");
  dims_.push_back({std::move(name), CategoricalChoices{std::move(choices)}, std::move(description)});
  return *this;
}

std::optional<std::size_t> ParamSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i].name == name) return i;
  }
  return std::nullopt;
}

ParamConfig ParamSpace::sample(Rng& rng) const {
  ParamConfig c;
  c.values.reserve(dims_.size());
  for (const auto& d : dims_) {
    if (const auto* r = std::get_if<IntegerRange>(&d.domain)) {
      c.values.push_back(static_cast<double>(uniform_int(rng, r->lo, r->hi)));
    } else if (const auto* r = std::get_if<ContinuousRange>(&d.domain)) {
      double v = 0.0;
      if (r->scale == Scale::Log) {
        v = std::exp(uniform(rng, std::log(r->lo), std::log(r->hi)));
      } else {
        v = uniform(rng, r->lo, r->hi);
      }
      c.values.push_back(std::clamp(v, r->lo, r->hi));
    } else {
      const auto& ch = std::get<CategoricalChoices>(d.domain).choices;
      c.values.push_back(static_cast<double>(
          uniform_int(rng, 0, static_cast<std::int64_t>(ch.size()) - 1)));
    }
  }
  return c;
}

void ParamSpace::validate(const ParamConfig& config) const {
  if (config.values.size() != dims_.size()) {
    throw Error(Errc::RangeError, "configuration has " + std::to_string(config.values.size()) +
                                      " values, space has " + std::to_string(dims_.size()) +
                                      " dimensions");
  }
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    const double v = config.values[i];
    bool ok = std::isfinite(v);
    std::string range;
    if (const auto* r = std::get_if<IntegerRange>(&d.domain)) {
      ok = ok && v == std::floor(v) && v >= static_cast<double>(r->lo) && v <= static_cast<double>(r->hi);
      range = "[" + std::to_string(r->lo) + ", " + std::to_string(r->hi) + "]";
    } else if (const auto* r = std::get_if<ContinuousRange>(&d.domain)) {
      ok = ok && v >= r->lo && v <= r->hi;
      range = "[" + format_double(r->lo) + ", " + format_double(r->hi) + "]";
    } else {
      const auto n = std::get<CategoricalChoices>(d.domain).choices.size();
      ok = ok && v == std::floor(v) && v >= 0.0 && v < static_cast<double>(n);
      range = "one of " + std::to_string(n) + " choices";
    }
    if (!ok) {
      throw Error(Errc::RangeError, label_of(d) + ": " + d.name + " = " + format_double(v) +
                                        " outside " + range);
    }
  }
}

bool ParamSpace::contains(const ParamConfig& config) const {
  try {
    validate(config);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::vector<double> ParamSpace::features(const ParamConfig& config) const {
  std::vector<double> f(config.values);
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (const auto* r = std::get_if<ContinuousRange>(&dims_[i].domain); r && r->scale == Scale::Log) {
      f[i] = std::log(f[i]);
    }
  }
  return f;
}

ParamConfig ParamSpace::from_flat(const FlatConfig& flat) const {
  for (const auto& [k, v] : flat.entries()) {
    if (!index_of(k)) throw Error(Errc::ConfigError, "unknown key '" + k + "'");
  }
  ParamConfig c;
  for (const auto& d : dims_) {
    const auto text = flat.find(d.name);
    if (!text) throw Error(Errc::ConfigError, "missing key '" + d.name + "'");
    if (const auto* ch = std::get_if<CategoricalChoices>(&d.domain)) {
      const auto it = std::find(ch->choices.begin(), ch->choices.end(), *text);
      if (it == ch->choices.end()) {
        throw Error(Errc::RangeError, label_of(d) + ": '" + *text + "' is not a valid choice for " + d.name);
      }
      c.values.push_back(static_cast<double>(it - ch->choices.begin()));
    } else {
      c.values.push_back(parse_number(d.name, *text));
    }
  }
  validate(c);
  return c;
}

FlatConfig ParamSpace::to_flat(const ParamConfig& config) const {
  FlatConfig flat;
  for (std::size_t i = 0; i < dims_.size(); ++i) flat.set(dims_[i].name, format_value(i, config.values[i]));
  return flat;
}

double ParamSpace::value(const ParamConfig& config, std::string_view name) const {
  const auto i = index_of(name);
  if (!i) throw Error(Errc::ConfigError, "unknown dimension '" + std::string(name) + "'");
  return config.values.at(*i);
}

std::string ParamSpace::format_value(std::size_t dim, double value) const {
  const auto& d = dims_.at(dim);
  if (std::holds_alternative<IntegerRange>(d.domain)) {
    return std::to_string(static_cast<std::int64_t>(value));
  }
  if (const auto* ch = std::get_if<CategoricalChoices>(&d.domain)) {
    return ch->choices.at(static_cast<std::size_t>(value));
  }
  return format_double(value);
}

}  // namespace spikeopt
