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

#include "spikeopt/datasets.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "spikeopt/error.hpp"
#include "spikeopt/rng.hpp"

namespace spikeopt {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

// Reads the whole file, inflating it if it is gzip-compressed.
std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes;
  std::uint8_t buf[1 << 16];
  for (;;) {
    const int n = gzread(f, buf, sizeof(buf));
    if (n < 0) {
      gzclose(f);
      throw Error(Errc::IoError, "read error in '" + path.string() + "'");
    }
    if (n == 0) break;
    bytes.insert(bytes.end(), buf, buf + n);
  }
  gzclose(f);
  return bytes;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t offset) {
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 24));
  b.push_back(static_cast<std::uint8_t>(v >> 16));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

std::filesystem::path find_mnist_file(const std::filesystem::path& dir, const std::string& stem) {
  for (const auto& name : {stem, stem + ".gz"}) {
    const auto p = dir / name;
    if (std::filesystem::exists(p)) return p;
  }
  // Some mirrors ship the files with a dot instead of a dash before "idx".
  std::string dotted = stem;
  dotted[dotted.rfind("-idx")] = '.';
  for (const auto& name : {dotted, dotted + ".gz"}) {
    const auto p = dir / name;
    if (std::filesystem::exists(p)) return p;
  }
  throw Error(Errc::IoError, "no '" + stem + "' in '" + dir.string() + "'");
}

}  // namespace

const char* split_name(Split split) noexcept { return split == Split::Learn ? "learn" : "eval"; }

Dataset::Dataset(std::size_t width, std::vector<float> pixels, std::vector<std::uint8_t> labels,
                 std::size_t eval_begin, std::string source)
    : width_(width),
      eval_begin_(eval_begin),
      pixels_(std::move(pixels)),
      labels_(std::move(labels)),
      source_(std::move(source)) {
  if (pixels_.size() != width_ * labels_.size()) {
    throw Error(Errc::CountMismatch, "pixel count does not match labels x width");
  }
  if (eval_begin_ > labels_.size()) throw Error(Errc::Internal, "evaluation pool start out of range");
  for (const auto l : labels_) n_classes_ = std::max<std::size_t>(n_classes_, l + 1u);
}

Dataset Dataset::join(const Dataset& learn, const Dataset& eval) {
  if (learn.width() != eval.width()) {
    throw Error(Errc::CountMismatch, "learning and evaluation images differ in width");
  }
  std::vector<float> pixels(learn.pixels_);
  pixels.insert(pixels.end(), eval.pixels_.begin(), eval.pixels_.end());
  std::vector<std::uint8_t> labels(learn.labels_);
  labels.insert(labels.end(), eval.labels_.begin(), eval.labels_.end());
  return Dataset(learn.width(), std::move(pixels), std::move(labels), learn.size(),
                 learn.source() + " + " + eval.source());
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_all(images);
  const auto lbl = read_all(labels);

  // Magic first, so that swapped or foreign files are reported as such.
  if (img.size() < 4) throw Error(Errc::TruncatedFile, "'" + images.string() + "' is shorter than its header");
  if (lbl.size() < 4) throw Error(Errc::TruncatedFile, "'" + labels.string() + "' is shorter than its header");
  if (read_be32(img, 0) != kImageMagic) {
    throw Error(Errc::BadMagic, "'" + images.string() + "' is not an IDX image file");
  }
  if (read_be32(lbl, 0) != kLabelMagic) {
    throw Error(Errc::BadMagic, "'" + labels.string() + "' is not an IDX label file");
  }
  if (img.size() < 16) throw Error(Errc::TruncatedFile, "'" + images.string() + "' is shorter than its header");
  if (lbl.size() < 8) throw Error(Errc::TruncatedFile, "'" + labels.string() + "' is shorter than its header");
  const std::size_t n_img = read_be32(img, 4);
  const std::size_t rows = read_be32(img, 8);
  const std::size_t cols = read_be32(img, 12);
  const std::size_t n_lbl = read_be32(lbl, 4);
  const std::size_t width = rows * cols;

  if (img.size() < 16 + n_img * width) {
    throw Error(Errc::TruncatedFile, "'" + images.string() + "' declares " + std::to_string(n_img) +
                                         " images but holds fewer bytes");
  }
  if (lbl.size() < 8 + n_lbl) {
    throw Error(Errc::TruncatedFile, "'" + labels.string() + "' declares " + std::to_string(n_lbl) +
                                         " labels but holds fewer bytes");
  }
  if (n_img != n_lbl) {
    throw Error(Errc::CountMismatch, std::to_string(n_img) + " images but " + std::to_string(n_lbl) +
                                         " labels");
  }

  std::vector<float> pixels(n_img * width);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<float>(img[16 + i] / 255.0);
  }
  std::vector<std::uint8_t> label_bytes(lbl.begin() + 8, lbl.begin() + 8 + static_cast<std::ptrdiff_t>(n_lbl));
  return Dataset(width, std::move(pixels), std::move(label_bytes), n_img, images.filename().string());
}

Dataset load_mnist(const std::filesystem::path& dir) {
  const auto train = load_idx(find_mnist_file(dir, "train-images-idx3-ubyte"),
                              find_mnist_file(dir, "train-labels-idx1-ubyte"));
  const auto test = load_idx(find_mnist_file(dir, "t10k-images-idx3-ubyte"),
                             find_mnist_file(dir, "t10k-labels-idx1-ubyte"));
  return Dataset::join(train, test);
}

std::vector<std::uint8_t> encode_idx_images(const Dataset& data, std::size_t first,
                                            std::size_t count, std::size_t rows,
                                            std::size_t cols) {
  if (rows * cols != data.width()) throw Error(Errc::CountMismatch, "rows x cols != image width");
  if (first + count > data.size()) throw Error(Errc::Exhausted, "sample range out of bounds");
  std::vector<std::uint8_t> out;
  out.reserve(16 + count * data.width());
  put_be32(out, kImageMagic);
  put_be32(out, static_cast<std::uint32_t>(count));
  put_be32(out, static_cast<std::uint32_t>(rows));
  put_be32(out, static_cast<std::uint32_t>(cols));
  for (std::size_t i = first; i < first + count; ++i) {
    for (const float x : data.image(i)) {
      out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0f, 1.0f) * 255.0)));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const Dataset& data, std::size_t first,
                                            std::size_t count) {
  if (first + count > data.size()) throw Error(Errc::Exhausted, "sample range out of bounds");
  std::vector<std::uint8_t> out;
  out.reserve(8 + count);
  put_be32(out, kLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(count));
  for (std::size_t i = first; i < first + count; ++i) out.push_back(static_cast<std::uint8_t>(data.label(i)));
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed for '" + path.string() + "'");
}

Dataset synthetic_blobs(std::size_t n_classes, std::size_t width, std::size_t n_samples,
                        std::uint64_t seed, const BlobOptions& options) {
  if (n_classes < 2) throw Error(Errc::ConfigError, "synthetic blobs need at least two classes");
  if (n_classes > 256) throw Error(Errc::ConfigError, "at most 256 classes are supported");
  if (width == 0) throw Error(Errc::ConfigError, "synthetic blobs need a positive width");
  if (!(options.noise >= 0.0 && options.noise < 1.0)) {
    throw Error(Errc::ConfigError, "blob noise must lie in [0, 1)");
  }
  if (options.eval_samples > n_samples) {
    throw Error(Errc::ConfigError, "more evaluation samples than samples");
  }

  Rng rng(derive_seed(seed, 0));
  std::vector<std::vector<double>> prototypes;
  while (prototypes.size() < n_classes) {
    std::vector<double> p(width, 0.0);
    for (auto& x : p) {
      if (uniform01(rng) < options.density) x = uniform(rng, 0.5, 1.0);
    }
    const bool is_new = std::none_of(prototypes.begin(), prototypes.end(),
                                     [&](const auto& q) { return q == p; });
    if (is_new) prototypes.push_back(std::move(p));
  }

  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n_classes; ++a) {
    for (std::size_t b = a + 1; b < n_classes; ++b) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < width; ++i) {
        const double d = prototypes[a][i] - prototypes[b][i];
        d2 += d * d;
      }
      min_dist = std::min(min_dist, std::sqrt(d2));
    }
  }
  // ||noise||_2 <= amplitude * sqrt(width) < min_dist / 2 keeps every sample
  // in its prototype's Voronoi cell.
  const double amplitude = options.noise * min_dist / (2.0 * std::sqrt(static_cast<double>(width)));

  Rng noise_rng(derive_seed(seed, 1));
  std::vector<float> pixels(n_samples * width);
  std::vector<std::uint8_t> labels(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto c = s % n_classes;
    labels[s] = static_cast<std::uint8_t>(c);
    for (std::size_t i = 0; i < width; ++i) {
      double x = prototypes[c][i];
      if (amplitude > 0.0) x = std::clamp(x + uniform(noise_rng, -amplitude, amplitude), 0.0, 1.0);
      pixels[s * width + i] = static_cast<float>(x);
    }
  }
  return Dataset(width, std::move(pixels), std::move(labels), n_samples - options.eval_samples,
                 "synthetic-blobs(seed=" + std::to_string(seed) + ")");
}

SampleStream make_stream(const Dataset& data, std::size_t n_samples, std::uint64_t seed,
                         Split split) {
  const std::size_t pool = data.pool_size(split);
  if (n_samples > pool) {
    throw Error(Errc::Exhausted, std::string("requested ") + std::to_string(n_samples) + " " +
                                     split_name(split) + " samples but the pool holds " +
                                     std::to_string(pool));
  }
  const std::size_t base = split == Split::Learn ? 0 : data.eval_begin();
  std::vector<std::uint32_t> order(pool);
  for (std::size_t i = 0; i < pool; ++i) order[i] = static_cast<std::uint32_t>(base + i);
  Rng rng(seed);
  // Partial Fisher-Yates: only the prefix we hand out needs to be drawn.
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(i),
                                                        static_cast<std::int64_t>(pool - 1)));
    std::swap(order[i], order[j]);
  }
  order.resize(n_samples);
  return SampleStream(data, split, seed, std::move(order));
}

}  // namespace spikeopt
