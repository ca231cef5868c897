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
#include <span>
#include <string>
#include <vector>

namespace spikeopt {

enum class Split { Learn, Eval };

const char* split_name(Split split) noexcept;

/// Immutable collection of labeled intensity vectors in [0, 1].
///
/// Indices [0, eval_begin()) form the learning pool and
/// [eval_begin(), size()) the evaluation pool; streams drawn from different
/// pools can never share a sample.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t width, std::vector<float> pixels, std::vector<std::uint8_t> labels,
          std::size_t eval_begin, std::string source);

  std::size_t size() const { return labels_.size(); }
  std::size_t width() const { return width_; }
  std::size_t n_classes() const { return n_classes_; }
  std::size_t eval_begin() const { return eval_begin_; }
  std::size_t pool_size(Split split) const {
    return split == Split::Learn ? eval_begin_ : size() - eval_begin_;
  }
  const std::string& source() const { return source_; }

  std::span<const float> image(std::size_t i) const {
    return {pixels_.data() + i * width_, width_};
  }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const std::uint8_t> labels() const { return labels_; }

  /// Learning pool taken from `learn`, evaluation pool from `eval`.
  static Dataset join(const Dataset& learn, const Dataset& eval);

 private:
  std::size_t width_ = 0;
  std::size_t n_classes_ = 0;
  std::size_t eval_begin_ = 0;
  std::vector<float> pixels_;
  std::vector<std::uint8_t> labels_;
  std::string source_;
};

/// Parses an IDX image file (magic 0x00000803) and label file (0x00000801),
/// gzip-compressed or not. Pixel bytes are scaled by 1/255. Every sample is
/// placed in the learning pool.
///
/// Errors: Errc::IoError, Errc::BadMagic, Errc::TruncatedFile,
/// Errc::CountMismatch.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Standard MNIST layout in `dir` (train-* and t10k-* files, optionally .gz):
/// training images form the learning pool, test images the evaluation pool.
Dataset load_mnist(const std::filesystem::path& dir);

/// IDX byte images of samples [first, first + count); pixels re-quantized as
/// round(255 * x).
std::vector<std::uint8_t> encode_idx_images(const Dataset& data, std::size_t first,
                                            std::size_t count, std::size_t rows,
                                            std::size_t cols);
std::vector<std::uint8_t> encode_idx_labels(const Dataset& data, std::size_t first,
                                            std::size_t count);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

struct BlobOptions {
  /// Per-pixel noise amplitude as a fraction of the largest value that still
  /// keeps every sample closer to its own prototype than to any other.
  double noise = 0.5;
  /// Fraction of prototype pixels that are lit.
  double density = 0.25;
  /// Samples reserved for the evaluation pool (taken from the end).
  std::size_t eval_samples = 0;
};

/// Class-conditional random prototypes plus bounded uniform noise; classes
/// are linearly separable by construction. Labels cycle through the classes.
Dataset synthetic_blobs(std::size_t n_classes, std::size_t width, std::size_t n_samples,
                        std::uint64_t seed, const BlobOptions& options = {});

/// Deterministic shuffled prefix of one pool.
class SampleStream {
 public:
  SampleStream(const Dataset& data, Split split, std::uint64_t seed,
               std::vector<std::uint32_t> order)
      : data_(&data), split_(split), seed_(seed), order_(std::move(order)) {}

  std::size_t size() const { return order_.size(); }
  std::size_t index(std::size_t i) const { return order_[i]; }
  std::span<const float> image(std::size_t i) const { return data_->image(order_[i]); }
  int label(std::size_t i) const { return data_->label(order_[i]); }
  Split split() const { return split_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const std::uint32_t> order() const { return order_; }

 private:
  const Dataset* data_;
  Split split_;
  std::uint64_t seed_;
  std::vector<std::uint32_t> order_;
};

/// Throws Errc::Exhausted if the pool holds fewer than `n_samples`.
SampleStream make_stream(const Dataset& data, std::size_t n_samples, std::uint64_t seed,
                         Split split);

}  // namespace spikeopt
