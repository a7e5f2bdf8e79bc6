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

#ifndef HIERNAS_NNEXEC_MODEL_H_
#define HIERNAS_NNEXEC_MODEL_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "core/assembly.h"
#include "nnexec/layers.h"

namespace hiernas::nn {

// Executes a FlatArchitecture. Every edge owns its own weights; multi-input
// nodes concatenate incoming edge outputs in ascending source order.
class CellLayer : public Layer {
 public:
  // `fixed_channels` is the width C of Conv1x1 / SeparableConv3x3 edges.
  CellLayer(FlatArchitecture arch, std::int64_t in_channels, std::int64_t fixed_channels,
            Rng& init);

  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  void parameters(std::vector<Parameter*>& out) override;
  void set_norm_mode(NormMode mode) override;

  std::int64_t in_channels() const { return in_channels_; }
  std::int64_t out_channels() const { return channels_[arch_.sink]; }
  // Node shapes seen by the most recent forward().
  const std::vector<TensorShape>& last_shapes() const { return last_shapes_; }
  const FlatArchitecture& architecture() const { return arch_; }

 private:
  FlatArchitecture arch_;
  std::int64_t in_channels_;
  std::vector<std::int64_t> channels_;              // per node
  std::vector<std::unique_ptr<Layer>> edge_layers_;  // parallel to arch_.edges
  std::vector<std::int64_t> edge_widths_;            // output channels per edge
  std::vector<std::vector<std::size_t>> incoming_;   // per node, edge indices
  std::vector<TensorShape> last_shapes_;
};

struct ModelSpec {
  FlatArchitecture cell;
  std::int64_t stem_channels = 16;
  int cells_per_group = 1;
  int groups = 3;
  int num_classes = 10;
  std::int64_t input_channels = 3;
  std::int64_t image_size = 8;
};

// Stem 3x3 conv -> groups x N cells, each followed by a separable 3x3
// (stride 1, c channels; or stride 2, 2c channels after the last cell of a
// group) -> global average pool -> linear. A cell with input width c uses
// C = c for its fixed-width primitives.
class Model {
 public:
  // Throws SpatialUnderflow when a stride-2 reduction would see a map
  // smaller than 2x2.
  static Model build(const ModelSpec& spec, std::uint64_t seed);

  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  Tensor forward(const Tensor& x, Mode mode);
  void backward(const Tensor& grad_logits);

  std::vector<Parameter*> parameters();
  void zero_grad();
  void set_norm_mode(NormMode mode);
  std::uint64_t parameter_count();

  const std::vector<CellLayer*>& cells() const { return cells_; }
  const ModelSpec& spec() const { return spec_; }

 private:
  Model() = default;

  ModelSpec spec_;
  Sequential stages_;
  std::vector<CellLayer*> cells_;
};

struct LossValue {
  double loss = 0.0;       // data loss plus weight-decay term
  double data_loss = 0.0;  // softmax cross-entropy alone
};

// Zeroes gradients, then runs a train-mode forward and backward pass. The
// loss carries (weight_decay / 2) * sum(w^2) over decayed parameters, so each
// decayed gradient gains weight_decay * w. Throws NumericFailure on
// non-finite values.
LossValue gradients(Model& model, const Tensor& inputs, std::span<const int> labels,
                    double weight_decay);

}  // namespace hiernas::nn

#endif  // HIERNAS_NNEXEC_MODEL_H_
