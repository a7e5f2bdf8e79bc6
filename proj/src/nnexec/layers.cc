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

#include "nnexec/layers.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace hiernas::nn {

namespace {

void init_uniform(Tensor& t, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.values()) v = dist(rng);
}

std::int64_t conv_out_size(std::int64_t in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::int64_t in_channels, std::int64_t out_channels, int kernel, int stride,
               std::int64_t groups, Rng& init)
    : in_(in_channels),
      out_(out_channels),
      groups_(groups),
      kernel_(kernel),
      stride_(stride),
      pad_(kernel / 2) {
  if (groups != 1 && !(groups == in_channels && out_channels == in_channels)) {
    throw std::invalid_argument("Conv2d supports dense or depthwise grouping only");
  }
  const std::int64_t per_group = in_ / groups_;
  weight_.name = "conv.weight";
  weight_.value = Tensor({out_, per_group, kernel, kernel});
  weight_.grad = Tensor(weight_.value.shape());
  // He-uniform: bound = sqrt(6 / fan_in).
  init_uniform(weight_.value, std::sqrt(6.0 / static_cast<double>(per_group * kernel * kernel)),
               init);
}

Tensor Conv2d::forward(const Tensor& x, Mode) {
  if (x.channels() != in_) {
    throw std::invalid_argument(
        fmt::format("Conv2d expects {} channels, got {}", in_, x.channels()));
  }
  input_ = x;
  const std::int64_t oh_n = conv_out_size(x.height(), kernel_, stride_, pad_);
  const std::int64_t ow_n = conv_out_size(x.width(), kernel_, stride_, pad_);
  Tensor y({x.batch(), out_, oh_n, ow_n});
  const std::int64_t ipg = in_ / groups_;
  const std::int64_t opg = out_ / groups_;
  const std::int64_t H = x.height(), W = x.width();
  for (std::int64_t n = 0; n < x.batch(); ++n) {
    for (std::int64_t oc = 0; oc < out_; ++oc) {
      double* yp = y.plane_ptr(n, oc);
      const std::int64_t g = oc / opg;
      for (std::int64_t icg = 0; icg < ipg; ++icg) {
        const double* xp = x.plane_ptr(n, g * ipg + icg);
        for (int kh = 0; kh < kernel_; ++kh) {
          for (int kw = 0; kw < kernel_; ++kw) {
            const double wv = weight_.value.at(oc, icg, kh, kw);
            for (std::int64_t oh = 0; oh < oh_n; ++oh) {
              const std::int64_t ih = oh * stride_ - pad_ + kh;
              if (ih < 0 || ih >= H) continue;
              for (std::int64_t ow = 0; ow < ow_n; ++ow) {
                const std::int64_t iw = ow * stride_ - pad_ + kw;
                if (iw < 0 || iw >= W) continue;
                yp[oh * ow_n + ow] += wv * xp[ih * W + iw];
              }
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const Tensor& x = input_;
  Tensor dx(x.shape());
  const std::int64_t ipg = in_ / groups_;
  const std::int64_t opg = out_ / groups_;
  const std::int64_t H = x.height(), W = x.width();
  const std::int64_t oh_n = grad_out.height(), ow_n = grad_out.width();
  for (std::int64_t n = 0; n < x.batch(); ++n) {
    for (std::int64_t oc = 0; oc < out_; ++oc) {
      const double* gp = grad_out.plane_ptr(n, oc);
      const std::int64_t g = oc / opg;
      for (std::int64_t icg = 0; icg < ipg; ++icg) {
        const std::int64_t ic = g * ipg + icg;
        const double* xp = x.plane_ptr(n, ic);
        double* dxp = dx.plane_ptr(n, ic);
        for (int kh = 0; kh < kernel_; ++kh) {
          for (int kw = 0; kw < kernel_; ++kw) {
            const double wv = weight_.value.at(oc, icg, kh, kw);
            double dw = 0.0;
            for (std::int64_t oh = 0; oh < oh_n; ++oh) {
              const std::int64_t ih = oh * stride_ - pad_ + kh;
              if (ih < 0 || ih >= H) continue;
              for (std::int64_t ow = 0; ow < ow_n; ++ow) {
                const std::int64_t iw = ow * stride_ - pad_ + kw;
                if (iw < 0 || iw >= W) continue;
                const double go = gp[oh * ow_n + ow];
                dw += go * xp[ih * W + iw];
                dxp[ih * W + iw] += go * wv;
              }
            }
            weight_.grad.at(oc, icg, kh, kw) += dw;
          }
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(std::int64_t channels)
    : channels_(channels),
      running_mean_(static_cast<std::size_t>(channels), 0.0),
      running_var_(static_cast<std::size_t>(channels), 1.0),
      inv_std_(static_cast<std::size_t>(channels), 1.0) {
  scale_.name = "bn.scale";
  scale_.value = Tensor({1, channels, 1, 1}, 1.0);
  scale_.grad = Tensor(scale_.value.shape());
  scale_.decay = false;
  shift_.name = "bn.shift";
  shift_.value = Tensor({1, channels, 1, 1}, 0.0);
  shift_.grad = Tensor(shift_.value.shape());
  shift_.decay = false;
}

Tensor BatchNorm::forward(const Tensor& x, Mode mode) {
  if (x.channels() != channels_) throw std::invalid_argument("BatchNorm channel mismatch");
  used_batch_stats_ = norm_mode_ == NormMode::kBatch && mode == Mode::kTrain;
  const std::int64_t B = x.batch(), P = x.plane();
  const double count = static_cast<double>(B * P);
  normalized_ = Tensor(x.shape());
  Tensor y(x.shape());
  for (std::int64_t c = 0; c < channels_; ++c) {
    double mean = running_mean_[c];
    double var = running_var_[c];
    if (used_batch_stats_) {
      double sum = 0.0;
      for (std::int64_t n = 0; n < B; ++n) {
        const double* xp = x.plane_ptr(n, c);
        for (std::int64_t i = 0; i < P; ++i) sum += xp[i];
      }
      mean = sum / count;
      double sq = 0.0;
      for (std::int64_t n = 0; n < B; ++n) {
        const double* xp = x.plane_ptr(n, c);
        for (std::int64_t i = 0; i < P; ++i) sq += (xp[i] - mean) * (xp[i] - mean);
      }
      var = sq / count;
      const double unbiased = count > 1 ? sq / (count - 1) : var;
      running_mean_[c] = (1 - kMomentum) * running_mean_[c] + kMomentum * mean;
      running_var_[c] = (1 - kMomentum) * running_var_[c] + kMomentum * unbiased;
    }
    const double inv = 1.0 / std::sqrt(var + kEpsilon);
    inv_std_[c] = inv;
    const double gamma = scale_.value.values()[c];
    const double beta = shift_.value.values()[c];
    for (std::int64_t n = 0; n < B; ++n) {
      const double* xp = x.plane_ptr(n, c);
      double* hp = normalized_.plane_ptr(n, c);
      double* yp = y.plane_ptr(n, c);
      for (std::int64_t i = 0; i < P; ++i) {
        hp[i] = (xp[i] - mean) * inv;
        yp[i] = gamma * hp[i] + beta;
      }
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
  const std::int64_t B = grad_out.batch(), P = grad_out.plane();
  const double count = static_cast<double>(B * P);
  Tensor dx(grad_out.shape());
  for (std::int64_t c = 0; c < channels_; ++c) {
    double sum_g = 0.0, sum_gh = 0.0;
    for (std::int64_t n = 0; n < B; ++n) {
      const double* gp = grad_out.plane_ptr(n, c);
      const double* hp = normalized_.plane_ptr(n, c);
      for (std::int64_t i = 0; i < P; ++i) {
        sum_g += gp[i];
        sum_gh += gp[i] * hp[i];
      }
    }
    scale_.grad.values()[c] += sum_gh;
    shift_.grad.values()[c] += sum_g;
    const double gamma = scale_.value.values()[c];
    const double k = gamma * inv_std_[c];
    for (std::int64_t n = 0; n < B; ++n) {
      const double* gp = grad_out.plane_ptr(n, c);
      const double* hp = normalized_.plane_ptr(n, c);
      double* dp = dx.plane_ptr(n, c);
      for (std::int64_t i = 0; i < P; ++i) {
        dp[i] = used_batch_stats_ ? k * (gp[i] - sum_g / count - hp[i] * sum_gh / count)
                                  : k * gp[i];
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Relu

Tensor Relu::forward(const Tensor& x, Mode) {
  output_ = x;
  for (auto& v : output_.values()) v = v > 0.0 ? v : 0.0;
  return output_;
}

Tensor Relu::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  auto out = output_.values();
  auto d = dx.values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (out[i] <= 0.0) d[i] = 0.0;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Pool3x3

Tensor Pool3x3::forward(const Tensor& x, Mode) {
  input_shape_ = x.shape();
  const std::int64_t H = x.height(), W = x.width();
  const std::int64_t oh_n = conv_out_size(H, 3, stride_, 1);
  const std::int64_t ow_n = conv_out_size(W, 3, stride_, 1);
  Tensor y({x.batch(), x.channels(), oh_n, ow_n});
  if (kind_ == Kind::kMax) argmax_.assign(y.size(), 0);
  std::size_t o = 0;
  for (std::int64_t n = 0; n < x.batch(); ++n) {
    for (std::int64_t c = 0; c < x.channels(); ++c) {
      const double* xp = x.plane_ptr(n, c);
      const std::int64_t base = (n * x.channels() + c) * H * W;
      for (std::int64_t oh = 0; oh < oh_n; ++oh) {
        for (std::int64_t ow = 0; ow < ow_n; ++ow, ++o) {
          double best = -std::numeric_limits<double>::infinity();
          std::int64_t best_at = -1;
          double sum = 0.0;
          int valid = 0;
          for (int kh = 0; kh < 3; ++kh) {
            const std::int64_t ih = oh * stride_ - 1 + kh;
            if (ih < 0 || ih >= H) continue;
            for (int kw = 0; kw < 3; ++kw) {
              const std::int64_t iw = ow * stride_ - 1 + kw;
              if (iw < 0 || iw >= W) continue;
              const double v = xp[ih * W + iw];
              sum += v;
              ++valid;
              if (v > best) {
                best = v;
                best_at = ih * W + iw;
              }
            }
          }
          if (kind_ == Kind::kMax) {
            y.values()[o] = best;
            argmax_[o] = base + best_at;
          } else {
            y.values()[o] = sum / valid;
          }
        }
      }
    }
  }
  return y;
}

Tensor Pool3x3::backward(const Tensor& grad_out) {
  Tensor dx(input_shape_);
  if (kind_ == Kind::kMax) {
    auto g = grad_out.values();
    auto d = dx.values();
    for (std::size_t o = 0; o < g.size(); ++o) d[argmax_[o]] += g[o];
    return dx;
  }
  const std::int64_t H = input_shape_.height, W = input_shape_.width;
  const std::int64_t oh_n = grad_out.height(), ow_n = grad_out.width();
  for (std::int64_t n = 0; n < input_shape_.batch; ++n) {
    for (std::int64_t c = 0; c < input_shape_.channels; ++c) {
      const double* gp = grad_out.plane_ptr(n, c);
      double* dp = dx.plane_ptr(n, c);
      for (std::int64_t oh = 0; oh < oh_n; ++oh) {
        for (std::int64_t ow = 0; ow < ow_n; ++ow) {
          const std::int64_t h0 = std::max<std::int64_t>(oh * stride_ - 1, 0);
          const std::int64_t h1 = std::min<std::int64_t>(oh * stride_ + 1, H - 1);
          const std::int64_t w0 = std::max<std::int64_t>(ow * stride_ - 1, 0);
          const std::int64_t w1 = std::min<std::int64_t>(ow * stride_ + 1, W - 1);
          const double share =
              gp[oh * ow_n + ow] / static_cast<double>((h1 - h0 + 1) * (w1 - w0 + 1));
          for (std::int64_t ih = h0; ih <= h1; ++ih) {
            for (std::int64_t iw = w0; iw <= w1; ++iw) dp[ih * W + iw] += share;
          }
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, Mode) {
  input_shape_ = x.shape();
  Tensor y({x.batch(), x.channels(), 1, 1});
  const auto P = x.plane();
  for (std::int64_t n = 0; n < x.batch(); ++n) {
    for (std::int64_t c = 0; c < x.channels(); ++c) {
      const double* xp = x.plane_ptr(n, c);
      double sum = 0.0;
      for (std::int64_t i = 0; i < P; ++i) sum += xp[i];
      y.at(n, c, 0, 0) = sum / static_cast<double>(P);
    }
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
  Tensor dx(input_shape_);
  const auto P = dx.plane();
  for (std::int64_t n = 0; n < dx.batch(); ++n) {
    for (std::int64_t c = 0; c < dx.channels(); ++c) {
      const double g = grad_out.at(n, c, 0, 0) / static_cast<double>(P);
      double* dp = dx.plane_ptr(n, c);
      for (std::int64_t i = 0; i < P; ++i) dp[i] = g;
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(std::int64_t in_features, std::int64_t out_features, Rng& init)
    : in_(in_features), out_(out_features) {
  weight_.name = "linear.weight";
  weight_.value = Tensor({out_, in_, 1, 1});
  weight_.grad = Tensor(weight_.value.shape());
  init_uniform(weight_.value, 1.0 / std::sqrt(static_cast<double>(in_)), init);
  bias_.name = "linear.bias";
  bias_.value = Tensor({1, out_, 1, 1});
  bias_.grad = Tensor(bias_.value.shape());
  bias_.decay = false;
}

Tensor Linear::forward(const Tensor& x, Mode) {
  if (x.channels() * x.plane() != in_) throw std::invalid_argument("Linear input width mismatch");
  input_ = x;
  Tensor y({x.batch(), out_, 1, 1});
  const auto w = weight_.value.values();
  const auto b = bias_.value.values();
  for (std::int64_t n = 0; n < x.batch(); ++n) {
    const double* xp = x.plane_ptr(n, 0);
    for (std::int64_t o = 0; o < out_; ++o) {
      double acc = b[o];
      const double* wp = w.data() + o * in_;
      for (std::int64_t i = 0; i < in_; ++i) acc += wp[i] * xp[i];
      y.at(n, o, 0, 0) = acc;
    }
  }
  return y;
}

Tensor Linear::backward(const Tensor& grad_out) {
  Tensor dx(input_.shape());
  const auto w = weight_.value.values();
  auto dw = weight_.grad.values();
  auto db = bias_.grad.values();
  for (std::int64_t n = 0; n < input_.batch(); ++n) {
    const double* xp = input_.plane_ptr(n, 0);
    double* dxp = dx.plane_ptr(n, 0);
    for (std::int64_t o = 0; o < out_; ++o) {
      const double g = grad_out.at(n, o, 0, 0);
      db[o] += g;
      const double* wp = w.data() + o * in_;
      double* dwp = dw.data() + o * in_;
      for (std::int64_t i = 0; i < in_; ++i) {
        dwp[i] += g * xp[i];
        dxp[i] += g * wp[i];
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Sequential

Tensor Sequential::forward(const Tensor& x, Mode mode) {
  Tensor h = x;
  for (auto& layer : layers_) h = layer->forward(h, mode);
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

void Sequential::parameters(std::vector<Parameter*>& out) {
  for (auto& layer : layers_) layer->parameters(out);
}

void Sequential::set_norm_mode(NormMode mode) {
  for (auto& layer : layers_) layer->set_norm_mode(mode);
}

// ---------------------------------------------------------------------------
// Factories

std::unique_ptr<Layer> make_conv_unit(std::int64_t in_channels, std::int64_t out_channels,
                                      int kernel, int stride, Rng& init) {
  auto unit = std::make_unique<Sequential>();
  unit->add(std::make_unique<Conv2d>(in_channels, out_channels, kernel, stride, 1, init));
  unit->add(std::make_unique<BatchNorm>(out_channels));
  unit->add(std::make_unique<Relu>());
  return unit;
}

std::unique_ptr<Layer> make_depthwise_unit(std::int64_t channels, Rng& init) {
  auto unit = std::make_unique<Sequential>();
  unit->add(std::make_unique<Conv2d>(channels, channels, 3, 1, channels, init));
  unit->add(std::make_unique<BatchNorm>(channels));
  unit->add(std::make_unique<Relu>());
  return unit;
}

std::unique_ptr<Layer> make_separable_unit(std::int64_t in_channels, std::int64_t out_channels,
                                           int stride, Rng& init) {
  auto unit = std::make_unique<Sequential>();
  unit->add(std::make_unique<Conv2d>(in_channels, in_channels, 3, stride, in_channels, init));
  unit->add(std::make_unique<Conv2d>(in_channels, out_channels, 1, 1, 1, init));
  unit->add(std::make_unique<BatchNorm>(out_channels));
  unit->add(std::make_unique<Relu>());
  return unit;
}

std::unique_ptr<Layer> make_primitive(PrimitiveOp op, std::int64_t in_channels,
                                      std::int64_t out_channels, Rng& init) {
  switch (op) {
    case PrimitiveOp::kIdentity:
      return std::make_unique<Identity>();
    case PrimitiveOp::kConv1x1:
      return make_conv_unit(in_channels, out_channels, 1, 1, init);
    case PrimitiveOp::kDepthwiseConv3x3:
      return make_depthwise_unit(in_channels, init);
    case PrimitiveOp::kSeparableConv3x3:
      return make_separable_unit(in_channels, out_channels, 1, init);
    case PrimitiveOp::kMaxPool3x3:
      return std::make_unique<Pool3x3>(Pool3x3::Kind::kMax, 1);
    case PrimitiveOp::kAvgPool3x3:
      return std::make_unique<Pool3x3>(Pool3x3::Kind::kAverage, 1);
    case PrimitiveOp::kNone:
      break;
  }
  throw std::invalid_argument("no layer for the none operation");
}

double softmax_cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* grad) {
  const std::int64_t B = logits.batch(), K = logits.channels();
  if (static_cast<std::int64_t>(labels.size()) != B) {
    throw std::invalid_argument("label count does not match batch");
  }
  if (grad) *grad = Tensor(logits.shape());
  double loss = 0.0;
  std::vector<double> p(static_cast<std::size_t>(K));
  for (std::int64_t n = 0; n < B; ++n) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::int64_t k = 0; k < K; ++k) mx = std::max(mx, logits.at(n, k, 0, 0));
    double z = 0.0;
    for (std::int64_t k = 0; k < K; ++k) {
      p[k] = std::exp(logits.at(n, k, 0, 0) - mx);
      z += p[k];
    }
    const int y = labels[n];
    loss += -(logits.at(n, y, 0, 0) - mx - std::log(z));
    if (grad) {
      for (std::int64_t k = 0; k < K; ++k) {
        grad->at(n, k, 0, 0) = (p[k] / z - (k == y ? 1.0 : 0.0)) / static_cast<double>(B);
      }
    }
  }
  return loss / static_cast<double>(B);
}

}  // namespace hiernas::nn
