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

#ifndef HIERNAS_NNEXEC_TENSOR_H_
#define HIERNAS_NNEXEC_TENSOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/assembly.h"

namespace hiernas::nn {

// Dense rank-4 array in NCHW row-major order:
// index = ((n * C + c) * H + h) * W + w.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(const TensorShape& shape, double fill = 0.0);

  const TensorShape& shape() const { return shape_; }
  std::int64_t batch() const { return shape_.batch; }
  std::int64_t channels() const { return shape_.channels; }
  std::int64_t height() const { return shape_.height; }
  std::int64_t width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  std::int64_t plane() const { return shape_.height * shape_.width; }

  double& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[index(n, c, h, w)];
  }
  double at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data_[index(n, c, h, w)];
  }
  // Start of the (n, c) plane.
  double* plane_ptr(std::int64_t n, std::int64_t c) {
    return data_.data() + (n * shape_.channels + c) * plane();
  }
  const double* plane_ptr(std::int64_t n, std::int64_t c) const {
    return data_.data() + (n * shape_.channels + c) * plane();
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double value);
  void add(const Tensor& other);  // shapes must match
  bool all_finite() const;

 private:
  std::size_t index(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return static_cast<std::size_t>(((n * shape_.channels + c) * shape_.height + h) *
                                        shape_.width + w);
  }

  TensorShape shape_{0, 0, 0, 0};
  std::vector<double> data_;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool decay = true;  // weight decay applies (conv and linear weights)
};

// Stacks the inputs along channels, in order.
Tensor concat_channels(std::span<const Tensor* const> parts);
// Inverse of concat_channels for gradients: slice `widths` channels in order.
std::vector<Tensor> split_channels(const Tensor& t, std::span<const std::int64_t> widths);

}  // namespace hiernas::nn

#endif  // HIERNAS_NNEXEC_TENSOR_H_
