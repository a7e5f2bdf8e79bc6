// Copyright 2026 The HierNAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nnexec/dataset.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "core/rng.h"

namespace hiernas::nn {
namespace {

constexpr double kFrequency = 2.0;   // cycles across the image
constexpr double kTint = 0.15;
constexpr double kNoise = 1.5;
constexpr double kTrainShare = 0.8;

void draw_image(Tensor& out, std::int64_t row, int label, int classes, Rng& rng) {
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, kNoise);
  const double angle = std::numbers::pi * label / classes;
  const double phase = phase_dist(rng);
  const auto size = out.height();
  const double k = 2.0 * std::numbers::pi * kFrequency / static_cast<double>(size);
  for (std::int64_t c = 0; c < 3; ++c) {
    // Tint: each class leans towards one channel.
    const double tint = (label % 3 == c) ? kTint : -kTint / 2.0;
    for (std::int64_t h = 0; h < size; ++h) {
      for (std::int64_t w = 0; w < size; ++w) {
        const double u = std::cos(angle) * w + std::sin(angle) * h;
        out.at(row, c, h, w) = std::sin(k * u + phase) + tint + noise(rng);
      }
    }
  }
}

}  // namespace

Dataset synth_dataset(int classes, int per_class, int size, std::uint64_t seed) {
  if (classes < 2 || per_class < 2 || size < 4) {
    throw std::invalid_argument("synthetic dataset needs classes >= 2, per_class >= 2, size >= 4");
  }
  const int train_per_class =
      std::clamp(static_cast<int>(std::lround(kTrainShare * per_class)), 1, per_class - 1);
  const int val_per_class = per_class - train_per_class;
  Dataset d;
  d.classes = classes;
  d.train_x = Tensor({static_cast<std::int64_t>(classes) * train_per_class, 3, size, size});
  d.val_x = Tensor({static_cast<std::int64_t>(classes) * val_per_class, 3, size, size});
  std::int64_t train_row = 0;
  std::int64_t val_row = 0;
  for (int label = 0; label < classes; ++label) {
    Rng rng(derive_seed(seed, Stream::kDataset, static_cast<std::uint64_t>(label)));
    for (int s = 0; s < per_class; ++s) {
      if (s < train_per_class) {
        draw_image(d.train_x, train_row++, label, classes, rng);
        d.train_y.push_back(label);
      } else {
        draw_image(d.val_x, val_row++, label, classes, rng);
        d.val_y.push_back(label);
      }
    }
  }
  return d;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  Tensor out({static_cast<std::int64_t>(indices.size()), x.channels(), x.height(), x.width()});
  const auto row = static_cast<std::size_t>(x.channels() * x.plane());
  auto src = x.values();
  auto dst = out.values();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(indices[r] * row), row,
                dst.begin() + static_cast<std::ptrdiff_t>(r * row));
  }
  return out;
}

std::vector<int> gather_labels(std::span<const int> y, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(y[i]);
  return out;
}

}  // namespace hiernas::nn
