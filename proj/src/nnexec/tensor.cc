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

#include "nnexec/tensor.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hiernas::nn {

Tensor::Tensor(const TensorShape& shape, double fill)
    : shape_(shape),
      data_(static_cast<std::size_t>(shape.batch * shape.channels * shape.height * shape.width),
            fill) {}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::add(const Tensor& other) {
  if (!(other.shape_ == shape_)) throw std::invalid_argument("tensor shape mismatch in add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
  if (parts.empty()) throw std::invalid_argument("concat of zero tensors");
  TensorShape shape = parts.front()->shape();
  shape.channels = 0;
  for (const auto* p : parts) {
    if (p->batch() != shape.batch || p->height() != shape.height || p->width() != shape.width) {
      throw std::invalid_argument("concat inputs disagree on batch or spatial size");
    }
    shape.channels += p->channels();
  }
  Tensor out(shape);
  const auto plane = out.plane();
  for (std::int64_t n = 0; n < shape.batch; ++n) {
    std::int64_t offset = 0;
    for (const auto* p : parts) {
      const double* src = p->plane_ptr(n, 0);
      std::copy(src, src + p->channels() * plane, out.plane_ptr(n, offset));
      offset += p->channels();
    }
  }
  return out;
}

std::vector<Tensor> split_channels(const Tensor& t, std::span<const std::int64_t> widths) {
  std::vector<Tensor> out;
  out.reserve(widths.size());
  std::int64_t offset = 0;
  for (auto w : widths) {
    TensorShape shape = t.shape();
    shape.channels = w;
    Tensor part(shape);
    for (std::int64_t n = 0; n < shape.batch; ++n) {
      const double* src = t.plane_ptr(n, offset);
      std::copy(src, src + w * t.plane(), part.plane_ptr(n, 0));
    }
    offset += w;
    out.push_back(std::move(part));
  }
  if (offset != t.channels()) throw std::invalid_argument("split widths do not cover tensor");
  return out;
}

}  // namespace hiernas::nn
