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

#ifndef HIERNAS_NNEXEC_LAYERS_H_
#define HIERNAS_NNEXEC_LAYERS_H_

#include <memory>
#include <string>
#include <vector>

#include "core/rng.h"
#include "nnexec/tensor.h"

namespace hiernas::nn {

enum class Mode { kTrain, kEval };

// kBatch: batch statistics in train mode, running averages in eval mode.
// kFrozen: running averages in both modes, i.e. a fixed per-channel affine;
// used for finite-difference checks.
enum class NormMode { kBatch, kFrozen };

// A differentiable stage. backward() consumes the cache of the most recent
// forward() and accumulates into parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual void parameters(std::vector<Parameter*>&) {}
  virtual void set_norm_mode(NormMode) {}
};

// Bias-free 2-D convolution with square kernel and same padding (k / 2).
// groups must be 1 (dense) or equal to in_channels (depthwise).
class Conv2d : public Layer {
 public:
  Conv2d(std::int64_t in_channels, std::int64_t out_channels, int kernel, int stride,
         std::int64_t groups, Rng& init);

  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  void parameters(std::vector<Parameter*>& out) override { out.push_back(&weight_); }

  Parameter& weight() { return weight_; }

 private:
  std::int64_t in_, out_, groups_;
  int kernel_, stride_, pad_;
  Parameter weight_;  // (out, in / groups, k, k)
  Tensor input_;
};

class BatchNorm : public Layer {
 public:
  explicit BatchNorm(std::int64_t channels);

  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  void parameters(std::vector<Parameter*>& out) override {
    out.push_back(&scale_);
    out.push_back(&shift_);
  }
  void set_norm_mode(NormMode mode) override { norm_mode_ = mode; }

  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

  std::vector<double>& running_mean() { return running_mean_; }
  std::vector<double>& running_var() { return running_var_; }

 private:
  std::int64_t channels_;
  Parameter scale_, shift_;
  std::vector<double> running_mean_, running_var_;
  NormMode norm_mode_ = NormMode::kBatch;
  bool used_batch_stats_ = false;
  Tensor normalized_;
  std::vector<double> inv_std_;
};

class Relu : public Layer {
 public:
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor output_;
};

class Identity : public Layer {
 public:
  Tensor forward(const Tensor& x, Mode) override { return x; }
  Tensor backward(const Tensor& grad_out) override { return grad_out; }
};

// 3x3 pooling, same padding. Max ignores padded positions; average divides
// by the number of in-bounds positions.
class Pool3x3 : public Layer {
 public:
  enum class Kind { kMax, kAverage };
  Pool3x3(Kind kind, int stride) : kind_(kind), stride_(stride) {}

  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Kind kind_;
  int stride_;
  TensorShape input_shape_;
  std::vector<std::int64_t> argmax_;  // flat input index per output element
};

class GlobalAvgPool : public Layer {
 public:
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  TensorShape input_shape_;
};

// Fully connected layer on the flattened (C * H * W) features; output is
// (batch, out_features, 1, 1).
class Linear : public Layer {
 public:
  Linear(std::int64_t in_features, std::int64_t out_features, Rng& init);

  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  void parameters(std::vector<Parameter*>& out) override {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  std::int64_t in_, out_;
  Parameter weight_;  // (out, in, 1, 1)
  Parameter bias_;    // (1, out, 1, 1)
  Tensor input_;
};

class Sequential : public Layer {
 public:
  Sequential() = default;
  explicit Sequential(std::vector<std::unique_ptr<Layer>> layers) : layers_(std::move(layers)) {}

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  void parameters(std::vector<Parameter*>& out) override;
  void set_norm_mode(NormMode mode) override;

  std::size_t size() const { return layers_.size(); }
  Layer& at(std::size_t i) { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// conv -> normalize -> rectify blocks.
std::unique_ptr<Layer> make_conv_unit(std::int64_t in_channels, std::int64_t out_channels,
                                      int kernel, int stride, Rng& init);
std::unique_ptr<Layer> make_depthwise_unit(std::int64_t channels, Rng& init);
// Depthwise 3x3 (carrying the stride) then pointwise to out_channels, one
// normalization, then rectify.
std::unique_ptr<Layer> make_separable_unit(std::int64_t in_channels, std::int64_t out_channels,
                                           int stride, Rng& init);

// The cell edge for one primitive operation.
std::unique_ptr<Layer> make_primitive(PrimitiveOp op, std::int64_t in_channels,
                                      std::int64_t out_channels, Rng& init);

// Mean softmax cross-entropy over the batch. logits are (B, K, 1, 1).
// When grad is non-null it receives d(loss)/d(logits).
double softmax_cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* grad);

}  // namespace hiernas::nn

#endif  // HIERNAS_NNEXEC_LAYERS_H_
