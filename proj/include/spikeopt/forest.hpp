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
#include <span>
#include <vector>

namespace spikeopt {

struct ForestOptions {
  std::size_t n_trees = 100;
  std::size_t min_leaf = 3;
  /// 0 means unbounded.
  std::size_t max_depth = 0;
  /// Fraction of features considered at each split.
  double max_features = 1.0;
  /// Train each tree on a with-replacement resample of the training set.
  bool bootstrap = true;
};

struct Prediction {
  double mean = 0.0;
  /// Standard deviation of the per-tree predictions.
  double spread = 0.0;
};

/// CART regression tree: greedy variance-reduction splits, leaves predict
/// the mean of their targets.
class RegressionTree {
 public:
  /// `features` is row-major with `n_features` columns; `rows` selects the
  /// (possibly repeated) training rows.
  void fit(std::span<const double> features, std::size_t n_features, std::span<const double> targets,
           std::vector<std::uint32_t> rows, const ForestOptions& options, std::uint64_t seed);

  double predict(std::span<const double> x) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t depth() const;

 private:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;
  };
  std::vector<Node> nodes_;
};

/// Bagged ensemble of regression trees.
class RandomForest {
 public:
  /// Throws Errc::InsufficientData with fewer than two samples.
  static RandomForest fit(const std::vector<std::vector<double>>& features,
                          std::span<const double> targets, const ForestOptions& options,
                          std::uint64_t seed);

  Prediction predict(std::span<const double> x) const;
  std::size_t size() const { return trees_.size(); }
  const RegressionTree& tree(std::size_t i) const { return trees_[i]; }

 private:
  std::vector<RegressionTree> trees_;
};

}  // namespace spikeopt
