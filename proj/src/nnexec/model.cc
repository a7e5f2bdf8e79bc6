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

#include "nnexec/model.h"

#include <cmath>

#include <fmt/format.h>

namespace hiernas::nn {

CellLayer::CellLayer(FlatArchitecture arch, std::int64_t in_channels,
                     std::int64_t fixed_channels, Rng& init)
    : arch_(std::move(arch)), in_channels_(in_channels) {
  const auto shapes = infer_shapes(arch_, {1, in_channels, 1, 1}, fixed_channels);
  channels_.reserve(shapes.size());
  for (const auto& s : shapes) channels_.push_back(s.channels);
  incoming_.resize(arch_.node_count());
  for (std::size_t e = 0; e < arch_.edges.size(); ++e) {
    const auto& edge = arch_.edges[e];
    const auto cin = channels_[edge.src];
    const auto cout = edge_output_channels(edge, cin, fixed_channels, shapes);
    edge_layers_.push_back(make_primitive(edge.op, cin, cout, init));
    edge_widths_.push_back(cout);
    incoming_[edge.dst].push_back(e);
  }
}

Tensor CellLayer::forward(const Tensor& x, Mode mode) {
  std::vector<Tensor> values(arch_.node_count());
  values[arch_.source] = x;
  last_shapes_.assign(arch_.node_count(), TensorShape{});
  last_shapes_[arch_.source] = x.shape();
  for (std::size_t v = 0; v < arch_.node_count(); ++v) {
    if (incoming_[v].empty()) continue;
    std::vector<Tensor> outs;
    outs.reserve(incoming_[v].size());
    for (auto e : incoming_[v]) {
      outs.push_back(edge_layers_[e]->forward(values[arch_.edges[e].src], mode));
    }
    if (outs.size() == 1) {
      values[v] = std::move(outs.front());
    } else {
      std::vector<const Tensor*> parts;
      for (const auto& t : outs) parts.push_back(&t);
      values[v] = concat_channels(parts);
    }
    last_shapes_[v] = values[v].shape();
  }
  return values[arch_.sink];
}

Tensor CellLayer::backward(const Tensor& grad_out) {
  std::vector<Tensor> grads(arch_.node_count());
  grads[arch_.sink] = grad_out;
  for (std::size_t v = arch_.node_count(); v-- > 0;) {
    if (incoming_[v].empty() || grads[v].size() == 0) continue;
    std::vector<Tensor> parts;
    if (incoming_[v].size() == 1) {
      parts.push_back(std::move(grads[v]));
    } else {
      std::vector<std::int64_t> widths;
      for (auto e : incoming_[v]) widths.push_back(edge_widths_[e]);
      parts = split_channels(grads[v], widths);
    }
    for (std::size_t p = 0; p < parts.size(); ++p) {
      const auto e = incoming_[v][p];
      Tensor g = edge_layers_[e]->backward(parts[p]);
      auto& into = grads[arch_.edges[e].src];
      if (into.size() == 0) {
        into = std::move(g);
      } else {
        into.add(g);
      }
    }
  }
  return grads[arch_.source];
}

void CellLayer::parameters(std::vector<Parameter*>& out) {
  for (auto& layer : edge_layers_) layer->parameters(out);
}

void CellLayer::set_norm_mode(NormMode mode) {
  for (auto& layer : edge_layers_) layer->set_norm_mode(mode);
}

// ---------------------------------------------------------------------------
// Model

Model Model::build(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.stem_channels < 1 || spec.cells_per_group < 1 || spec.groups < 1 ||
      spec.num_classes < 2) {
    throw std::invalid_argument("model spec needs c0 >= 1, N >= 1, groups >= 1, classes >= 2");
  }
  Model model;
  model.spec_ = spec;
  Rng init(seed);
  model.stages_.add(make_conv_unit(spec.input_channels, spec.stem_channels, 3, 1, init));
  std::int64_t c = spec.stem_channels;
  std::int64_t size = spec.image_size;
  for (int g = 0; g < spec.groups; ++g) {
    for (int k = 0; k < spec.cells_per_group; ++k) {
      auto cell = std::make_unique<CellLayer>(spec.cell, c, c, init);
      const auto cell_out = cell->out_channels();
      model.cells_.push_back(cell.get());
      model.stages_.add(std::move(cell));
      if (k + 1 < spec.cells_per_group) {
        model.stages_.add(make_separable_unit(cell_out, c, 1, init));
        continue;
      }
      if (size < 2) {
        throw SpatialUnderflow(fmt::format(
            "group {} reduction would shrink a {}x{} map below 1x1", g + 1, size, size));
      }
      model.stages_.add(make_separable_unit(cell_out, 2 * c, 2, init));
      c *= 2;
      size = (size + 1) / 2;
    }
  }
  model.stages_.add(std::make_unique<GlobalAvgPool>());
  model.stages_.add(std::make_unique<Linear>(c, spec.num_classes, init));
  return model;
}

Tensor Model::forward(const Tensor& x, Mode mode) {
  if (x.channels() != spec_.input_channels) {
    throw std::invalid_argument("input channels do not match the model stem");
  }
  Tensor logits = stages_.forward(x, mode);
  if (!logits.all_finite()) throw NumericFailure("non-finite logits");
  return logits;
}

void Model::backward(const Tensor& grad_logits) { stages_.backward(grad_logits); }

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  stages_.parameters(out);
  return out;
}

void Model::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(0.0);
}

void Model::set_norm_mode(NormMode mode) { stages_.set_norm_mode(mode); }

std::uint64_t Model::parameter_count() {
  std::uint64_t total = 0;
  for (auto* p : parameters()) total += p->value.size();
  return total;
}

LossValue gradients(Model& model, const Tensor& inputs, std::span<const int> labels,
                    double weight_decay) {
  model.zero_grad();
  const Tensor logits = model.forward(inputs, Mode::kTrain);
  Tensor grad_logits;
  LossValue out;
  out.data_loss = softmax_cross_entropy(logits, labels, &grad_logits);
  model.backward(grad_logits);
  double penalty = 0.0;
  for (auto* p : model.parameters()) {
    if (!p->decay || weight_decay == 0.0) continue;
    auto w = p->value.values();
    auto g = p->grad.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      penalty += w[i] * w[i];
      g[i] += weight_decay * w[i];
    }
  }
  out.loss = out.data_loss + 0.5 * weight_decay * penalty;
  if (!std::isfinite(out.loss)) throw NumericFailure("non-finite loss");
  return out;
}

}  // namespace hiernas::nn
