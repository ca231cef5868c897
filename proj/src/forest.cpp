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

#include "spikeopt/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spikeopt/error.hpp"
#include "spikeopt/rng.hpp"

namespace spikeopt {

namespace {

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // sum_L^2 / n_L + sum_R^2 / n_R, larger is better
};

struct Pending {
  std::uint32_t node;
  std::size_t begin;
  std::size_t end;
  std::size_t depth;
};

}  // namespace

void RegressionTree::fit(std::span<const double> features, std::size_t n_features,
                         std::span<const double> targets, std::vector<std::uint32_t> rows,
                         const ForestOptions& options, std::uint64_t seed) {
  nodes_.clear();
  Rng rng(seed);
  const std::size_t min_leaf = std::max<std::size_t>(1, options.min_leaf);
  const std::size_t n_try = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(options.max_features * static_cast<double>(n_features))), 1,
      n_features);

  std::vector<std::size_t> feature_order(n_features);
  std::iota(feature_order.begin(), feature_order.end(), 0);
  std::vector<std::pair<double, double>> column;  // (feature value, target)

  nodes_.push_back({});
  std::vector<Pending> stack{{0, 0, rows.size(), 0}};
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const std::size_t n = p.end - p.begin;

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = p.begin; k < p.end; ++k) {
      const double y = targets[rows[k]];
      sum += y;
      sum_sq += y * y;
    }
    nodes_[p.node].value = sum / static_cast<double>(n);

    const bool depth_ok = options.max_depth == 0 || p.depth < options.max_depth;
    if (!depth_ok || n < 2 * min_leaf) continue;

    if (n_try < n_features) {
      for (std::size_t i = 0; i < n_try; ++i) {
        const auto j = static_cast<std::size_t>(
            uniform_int(rng, static_cast<std::int64_t>(i), static_cast<std::int64_t>(n_features - 1)));
        std::swap(feature_order[i], feature_order[j]);
      }
    }

    Split best;
    const double parent_score = sum * sum / static_cast<double>(n);
    for (std::size_t f = 0; f < n_try; ++f) {
      const std::size_t feat = feature_order[f];
      column.clear();
      for (std::size_t k = p.begin; k < p.end; ++k) {
        column.emplace_back(features[rows[k] * n_features + feat], targets[rows[k]]);
      }
      std::sort(column.begin(), column.end());
      double left_sum = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        left_sum += column[k - 1].second;
        if (k < min_leaf || n - k < min_leaf) continue;
        if (!(column[k - 1].first < column[k].first)) continue;
        const double right_sum = sum - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(k) +
                             right_sum * right_sum / static_cast<double>(n - k);
        if (!best.found || score > best.score) {
          best.found = true;
          best.feature = feat;
          best.score = score;
          double mid = 0.5 * (column[k - 1].first + column[k].first);
          if (!(mid < column[k].first)) mid = column[k - 1].first;
          best.threshold = mid;
        }
      }
    }
    // Within-node SSE is sum_sq - score; stop when a split cannot reduce it.
    const double parent_sse = sum_sq - parent_score;
    if (!best.found || best.score - parent_score <= 1e-12 * std::max(1.0, std::abs(parent_sse))) continue;

    const auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(p.begin),
                                       rows.begin() + static_cast<std::ptrdiff_t>(p.end),
                                       [&](std::uint32_t r) {
                                         return features[r * n_features + best.feature] <= best.threshold;
                                       });
    const std::size_t split_at = static_cast<std::size_t>(mid_it - rows.begin());

    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    const auto right = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    auto& node = nodes_[p.node];
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    stack.push_back({right, split_at, p.end, p.depth + 1});
    stack.push_back({left, p.begin, split_at, p.depth + 1});
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  std::uint32_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes_[i].feature >= 0) {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return best;
}

RandomForest RandomForest::fit(const std::vector<std::vector<double>>& features,
                               std::span<const double> targets, const ForestOptions& options,
                               std::uint64_t seed) {
  const std::size_t n = features.size();
  if (n < 2) {
    throw Error(Errc::InsufficientData, "surrogate needs at least 2 samples, got " + std::to_string(n));
  }
  if (targets.size() != n) throw Error(Errc::WidthMismatch, "feature and target counts differ");
  if (options.n_trees == 0) throw Error(Errc::ConfigError, "forest needs at least one tree");
  const std::size_t n_features = features.front().size();
  std::vector<double> flat;
  flat.reserve(n * n_features);
  for (const auto& row : features) {
    if (row.size() != n_features) throw Error(Errc::WidthMismatch, "ragged feature matrix");
    flat.insert(flat.end(), row.begin(), row.end());
  }

  RandomForest forest;
  forest.trees_.resize(options.n_trees);
  for (std::size_t t = 0; t < options.n_trees; ++t) {
    Rng rng(derive_seed(seed, 2 * t));
    std::vector<std::uint32_t> rows(n);
    if (options.bootstrap) {
      for (auto& r : rows) {
        r = static_cast<std::uint32_t>(uniform_int(rng, 0, static_cast<std::int64_t>(n - 1)));
      }
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }
    forest.trees_[t].fit(flat, n_features, targets, std::move(rows), options,
                         derive_seed(seed, 2 * t + 1));
  }
  return forest;
}

Prediction RandomForest::predict(std::span<const double> x) const {
  double sum = 0.0;
  std::vector<double> values;
  values.reserve(trees_.size());
  for (const auto& t : trees_) {
    values.push_back(t.predict(x));
    sum += values.back();
  }
  const double mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

}  // namespace spikeopt
