/*
 * Copyright 2026 The sptc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sptc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "sptc/error.hpp"

namespace sptc {

namespace {

std::size_t product_of(const std::vector<int>& s) {
  std::size_t n = 1;
  for (int d : s) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)), data(product_of(shape), 0.0) {}

Tensor::Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != product_of(shape)) throw PreconditionError("Tensor: data does not match shape");
}

void Param::resize(std::vector<int> s) {
  shape = std::move(s);
  const std::size_t n = product_of(shape);
  value.assign(n, 0.0);
  grad.assign(n, 0.0);
  m.assign(n, 0.0);
  v.assign(n, 0.0);
}

std::vector<double> quantize_symmetric(std::span<const double> w, int bits) {
  if (bits < 2) throw PreconditionError("quantize_symmetric: need at least 2 bits");
  double m = 0.0;
  for (double x : w) m = std::max(m, std::abs(x));
  std::vector<double> out(w.begin(), w.end());
  if (m == 0.0) return out;
  const double levels = std::ldexp(1.0, bits - 1) - 1.0;
  const double scale = m / levels;
  for (double& x : out) x = std::nearbyint(x / scale) * scale;
  return out;
}

double quantize_unsigned(double x, double max, int bits) noexcept {
  if (!(max > 0.0)) return 0.0;
  const double levels = std::ldexp(1.0, bits) - 1.0;
  const double scale = max / levels;
  const double c = std::clamp(x, 0.0, max);
  return std::nearbyint(c / scale) * scale;
}

MatmulLayer::MatmulLayer(std::string name, int rows, int cols, QuantSpec quant)
    : name_(std::move(name)), rows_(rows), cols_(cols), quant_(quant) {
  if (rows < 1 || cols < 1) throw PreconditionError("MatmulLayer: empty shape");
  weight_.name = name_ + ".weight";
  weight_.resize({rows, cols});
  bias_.name = name_ + ".bias";
  bias_.resize({rows});
  bias_.decay = false;
  dense_grad_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

void MatmulLayer::set_mask(std::vector<std::uint8_t> element_mask,
                           std::vector<std::uint8_t> row_mask) {
  if (!element_mask.empty() && element_mask.size() != weight_.value.size()) {
    throw PreconditionError("MatmulLayer::set_mask: element mask must be rows x cols");
  }
  if (!row_mask.empty() && static_cast<int>(row_mask.size()) != rows_) {
    throw PreconditionError("MatmulLayer::set_mask: row mask must have length rows");
  }
  mask_ = std::move(element_mask);
  row_mask_ = std::move(row_mask);
  apply_mask();
}

void MatmulLayer::apply_mask() {
  if (!mask_.empty()) {
    for (std::size_t i = 0; i < mask_.size(); ++i) {
      if (!mask_[i]) weight_.value[i] = 0.0;
    }
  }
  if (!row_mask_.empty()) {
    for (int o = 0; o < rows_; ++o) {
      if (!row_mask_[o]) bias_.value[o] = 0.0;
    }
  }
}

std::vector<double> MatmulLayer::effective_weights() const {
  std::vector<double> w = weight_.value;
  if (!mask_.empty()) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!mask_[i]) w[i] = 0.0;
    }
  }
  if (quant_.enabled) return quantize_symmetric(w, quant_.weight_bits);
  return w;
}

void MatmulLayer::reset_dense_grad() { std::fill(dense_grad_.begin(), dense_grad_.end(), 0.0); }

std::vector<double> MatmulLayer::product(const std::vector<double>& x, int n, bool training) {
  if (x.size() != static_cast<std::size_t>(n) * cols_) {
    throw PreconditionError("MatmulLayer: input size mismatch in " + name_);
  }
  if (quant_.enabled) {
    double bmax = 0.0;
    for (double v : x) bmax = std::max(bmax, v);
    if (training || !act_init_) {
      if (!act_init_) {
        act_max_ = bmax;
        act_init_ = true;
      } else {
        act_max_ = quant_.act_momentum * act_max_ + (1.0 - quant_.act_momentum) * bmax;
      }
    }
    x_q_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x_q_[i] = quantize_unsigned(x[i], act_max_, quant_.act_bits);
    }
  } else {
    x_q_ = x;
  }
  w_eff_ = effective_weights();

  std::vector<double> y(static_cast<std::size_t>(n) * rows_, 0.0);
  if (backend_ != nullptr && !training) {
    backend_->matmul(*this, x_q_, n, y);
  } else {
    for (int v = 0; v < n; ++v) {
      const double* xv = &x_q_[static_cast<std::size_t>(v) * cols_];
      double* yv = &y[static_cast<std::size_t>(v) * rows_];
      for (int o = 0; o < rows_; ++o) {
        const double* wo = &w_eff_[static_cast<std::size_t>(o) * cols_];
        double acc = 0.0;
        for (int k = 0; k < cols_; ++k) acc += wo[k] * xv[k];
        yv[o] = acc;
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    for (int o = 0; o < rows_; ++o) {
      if (!row_mask_.empty() && !row_mask_[o]) continue;
      y[static_cast<std::size_t>(v) * rows_ + o] += bias_.value[o];
    }
  }
  if (training) {
    x_raw_ = x;
  }
  return y;
}

std::vector<double> MatmulLayer::product_backward(const std::vector<double>& dy, int n) {
  if (dy.size() != static_cast<std::size_t>(n) * rows_ || x_q_.size() != static_cast<std::size_t>(n) * cols_) {
    throw PreconditionError("MatmulLayer: backward without matching forward in " + name_);
  }
  std::vector<double> dw(static_cast<std::size_t>(rows_) * cols_, 0.0);
  std::vector<double> dx(static_cast<std::size_t>(n) * cols_, 0.0);
  for (int v = 0; v < n; ++v) {
    const double* xv = &x_q_[static_cast<std::size_t>(v) * cols_];
    const double* dyv = &dy[static_cast<std::size_t>(v) * rows_];
    double* dxv = &dx[static_cast<std::size_t>(v) * cols_];
    for (int o = 0; o < rows_; ++o) {
      const double g = dyv[o];
      if (g == 0.0) continue;
      double* dwo = &dw[static_cast<std::size_t>(o) * cols_];
      const double* wo = &w_eff_[static_cast<std::size_t>(o) * cols_];
      for (int k = 0; k < cols_; ++k) {
        dwo[k] += g * xv[k];
        dxv[k] += g * wo[k];
      }
      if (row_mask_.empty() || row_mask_[o]) bias_.grad[o] += g;
    }
  }
  for (std::size_t i = 0; i < dw.size(); ++i) {
    dense_grad_[i] += dw[i];
    if (mask_.empty() || mask_[i]) weight_.grad[i] += dw[i];
  }
  if (quant_.enabled) {
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (x_raw_[i] < 0.0 || x_raw_[i] > act_max_) dx[i] = 0.0;
    }
  }
  return dx;
}

Linear::Linear(std::string name, int in, int out, QuantSpec quant)
    : MatmulLayer(std::move(name), out, in, quant) {}

Tensor Linear::forward(const Tensor& x, bool training) {
  const int n = x.dim(0);
  if (x.numel() != static_cast<std::size_t>(n) * cols()) {
    throw PreconditionError("Linear: input features mismatch in " + name());
  }
  in_shape_ = x.shape;
  return Tensor({n, rows()}, product(x.data, n, training));
}

Tensor Linear::backward(const Tensor& grad_out) {
  const int n = grad_out.dim(0);
  return Tensor(in_shape_, product_backward(grad_out.data, n));
}

std::vector<double> im2col(std::span<const double> x, int n, int c, int h, int w, int k, int pad,
                           int& ho, int& wo) {
  ho = h + 2 * pad - k + 1;
  wo = w + 2 * pad - k + 1;
  if (ho < 1 || wo < 1) throw PreconditionError("im2col: kernel larger than padded input");
  const int cols = c * k * k;
  std::vector<double> out(static_cast<std::size_t>(n) * ho * wo * cols, 0.0);
  for (int b = 0; b < n; ++b) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        double* row = &out[((static_cast<std::size_t>(b) * ho + oy) * wo + ox) * cols];
        for (int ch = 0; ch < c; ++ch) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy + ky - pad;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox + kx - pad;
              if (ix < 0 || ix >= w) continue;
              row[(ch * k + ky) * k + kx] =
                  x[((static_cast<std::size_t>(b) * c + ch) * h + iy) * w + ix];
            }
          }
        }
      }
    }
  }
  return out;
}

Conv2d::Conv2d(std::string name, int in_channels, int out_channels, int kernel, int padding,
               QuantSpec quant)
    : MatmulLayer(std::move(name), out_channels, in_channels * kernel * kernel, quant),
      in_c_(in_channels),
      k_(kernel),
      pad_(padding) {}

Tensor Conv2d::forward(const Tensor& x, bool training) {
  if (x.shape.size() != 4 || x.dim(1) != in_c_) {
    throw PreconditionError("Conv2d: expected (N, C, H, W) input in " + name());
  }
  n_ = x.dim(0);
  h_ = x.dim(2);
  w_ = x.dim(3);
  const auto cols = im2col(x.data, n_, in_c_, h_, w_, k_, pad_, ho_, wo_);
  const int npos = n_ * ho_ * wo_;
  const auto y = product(cols, npos, training);
  Tensor out({n_, rows(), ho_, wo_});
  for (int b = 0; b < n_; ++b) {
    for (int p = 0; p < ho_ * wo_; ++p) {
      const double* src = &y[(static_cast<std::size_t>(b) * ho_ * wo_ + p) * rows()];
      for (int o = 0; o < rows(); ++o) {
        out.data[(static_cast<std::size_t>(b) * rows() + o) * ho_ * wo_ + p] = src[o];
      }
    }
  }
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const int npos = n_ * ho_ * wo_;
  std::vector<double> dy(static_cast<std::size_t>(npos) * rows());
  for (int b = 0; b < n_; ++b) {
    for (int p = 0; p < ho_ * wo_; ++p) {
      double* dst = &dy[(static_cast<std::size_t>(b) * ho_ * wo_ + p) * rows()];
      for (int o = 0; o < rows(); ++o) {
        dst[o] = grad_out.data[(static_cast<std::size_t>(b) * rows() + o) * ho_ * wo_ + p];
      }
    }
  }
  const auto dcols = product_backward(dy, npos);
  Tensor dx({n_, in_c_, h_, w_});
  const int cols = in_c_ * k_ * k_;
  for (int b = 0; b < n_; ++b) {
    for (int oy = 0; oy < ho_; ++oy) {
      for (int ox = 0; ox < wo_; ++ox) {
        const double* row = &dcols[((static_cast<std::size_t>(b) * ho_ + oy) * wo_ + ox) * cols];
        for (int ch = 0; ch < in_c_; ++ch) {
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy + ky - pad_;
            if (iy < 0 || iy >= h_) continue;
            for (int kx = 0; kx < k_; ++kx) {
              const int ix = ox + kx - pad_;
              if (ix < 0 || ix >= w_) continue;
              dx.data[((static_cast<std::size_t>(b) * in_c_ + ch) * h_ + iy) * w_ + ix] +=
                  row[(ch * k_ + ky) * k_ + kx];
            }
          }
        }
      }
    }
  }
  return dx;
}

Tensor Relu::forward(const Tensor& x, bool training) {
  Tensor y = x;
  if (training) on_.assign(x.numel(), 0);
  for (std::size_t i = 0; i < y.numel(); ++i) {
    if (y.data[i] > 0.0) {
      if (training) on_[i] = 1;
    } else {
      y.data[i] = 0.0;
    }
  }
  shape_ = x.shape;
  return y;
}

Tensor Relu::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.numel(); ++i) {
    if (!on_[i]) g.data[i] = 0.0;
  }
  return g;
}

Tensor MaxPool2::forward(const Tensor& x, bool training) {
  if (x.shape.size() != 4) throw PreconditionError("MaxPool2: expected (N, C, H, W) input");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int ho = h / 2, wo = w / 2;
  if (ho < 1 || wo < 1) throw PreconditionError("MaxPool2: input smaller than 2x2");
  Tensor y({n, c, ho, wo});
  in_shape_ = x.shape;
  if (training) argmax_.assign(y.numel(), 0);
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t plane = (static_cast<std::size_t>(b) * c + ch) * h * w;
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          std::size_t best = plane + static_cast<std::size_t>(2 * oy) * w + 2 * ox;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const std::size_t idx = plane + static_cast<std::size_t>(2 * oy + dy) * w + 2 * ox + dx;
              if (x.data[idx] > x.data[best]) best = idx;
            }
          }
          const std::size_t out = ((static_cast<std::size_t>(b) * c + ch) * ho + oy) * wo + ox;
          y.data[out] = x.data[best];
          if (training) argmax_[out] = best;
        }
      }
    }
  }
  return y;
}

Tensor MaxPool2::backward(const Tensor& grad_out) {
  Tensor dx(in_shape_);
  for (std::size_t i = 0; i < grad_out.numel(); ++i) dx.data[argmax_[i]] += grad_out.data[i];
  return dx;
}

ModelSpec ModelSpec::desk_cnn() {
  ModelSpec s;
  s.in_c = 1;
  s.in_h = 8;
  s.in_w = 8;
  s.classes = 10;
  using K = LayerSpec::Kind;
  s.layers = {
      {K::Conv, 8, 3, 1, false, false},
      {K::Conv, 16, 3, 1, true, false},
      {K::MaxPool, 0, 0, 0, false, false},
      {K::Conv, 16, 3, 1, true, false},
      {K::MaxPool, 0, 0, 0, false, false},
      {K::Linear, 10, 1, 0, false, true},
  };
  return s;
}

ModelSpec ModelSpec::mlp(int in_features, std::vector<int> hidden, int classes) {
  ModelSpec s;
  s.in_c = in_features;
  s.in_h = 1;
  s.in_w = 1;
  s.classes = classes;
  for (int h : hidden) s.layers.push_back({LayerSpec::Kind::Linear, h, 1, 0, true, false});
  s.layers.push_back({LayerSpec::Kind::Linear, classes, 1, 0, false, true});
  return s;
}

Model::Model(const ModelSpec& spec, QuantSpec quant, Rng& rng) : spec_(spec) {
  int c = spec.in_c, h = spec.in_h, w = spec.in_w;
  int last_matmul = -1;
  for (int i = 0; i < static_cast<int>(spec.layers.size()); ++i) {
    if (spec.layers[i].kind != LayerSpec::Kind::MaxPool) last_matmul = i;
  }
  if (last_matmul < 0) throw PreconditionError("Model: no conv or linear layer");
  if (spec.layers[last_matmul].out != spec.classes) {
    throw PreconditionError("Model: last layer must output one value per class");
  }
  int convs = 0, fcs = 0;
  bool flat = false;
  for (int i = 0; i < static_cast<int>(spec.layers.size()); ++i) {
    const auto& ls = spec.layers[i];
    std::unique_ptr<MatmulLayer> mm;
    int fan_in = 0;
    switch (ls.kind) {
      case LayerSpec::Kind::Conv: {
        if (flat) throw PreconditionError("Model: convolution after a linear layer");
        auto conv = std::make_unique<Conv2d>("conv" + std::to_string(++convs), c, ls.out,
                                             ls.kernel, ls.padding, quant);
        fan_in = c * ls.kernel * ls.kernel;
        h = h + 2 * ls.padding - ls.kernel + 1;
        w = w + 2 * ls.padding - ls.kernel + 1;
        c = ls.out;
        positions_.push_back(h * w);
        mm = std::move(conv);
        break;
      }
      case LayerSpec::Kind::Linear: {
        const int in = flat ? c : c * h * w;
        flat = true;
        mm = std::make_unique<Linear>("fc" + std::to_string(++fcs), in, ls.out, quant);
        fan_in = in;
        c = ls.out;
        h = w = 1;
        positions_.push_back(1);
        break;
      }
      case LayerSpec::Kind::MaxPool:
        layers_.push_back(std::make_unique<MaxPool2>());
        h /= 2;
        w /= 2;
        continue;
    }
    mm->sparse = ls.sparse;
    mm->protect = ls.protect;
    mm->set_index(static_cast<int>(matmuls_.size()));
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& v : mm->weight().value) v = rng.uniform(-bound, bound);
    matmuls_.push_back(mm.get());
    layers_.push_back(std::move(mm));
    if (i != last_matmul) layers_.push_back(std::make_unique<Relu>());
  }
}

Tensor Model::forward(const Tensor& x, bool training) {
  Tensor cur = x;
  if (spec_.layers.front().kind == LayerSpec::Kind::Linear && cur.shape.size() != 2) {
    cur.shape = {x.dim(0), static_cast<int>(x.numel() / x.dim(0))};
  }
  for (auto& layer : layers_) cur = layer->forward(cur, training);
  return cur;
}

void Model::backward(const Tensor& grad_logits) {
  Tensor g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  for (auto& l : layers_) {
    for (Param* p : l->params()) out.push_back(p);
  }
  return out;
}

std::vector<MatmulLayer*> Model::matmul_layers() { return matmuls_; }

void Model::set_backend(MatmulBackend* backend) {
  for (auto* m : matmuls_) m->set_backend(backend);
}

double softmax_cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor& grad) {
  const int n = logits.dim(0);
  const int k = logits.dim(1);
  if (static_cast<int>(labels.size()) != n) throw PreconditionError("cross entropy: label count");
  grad = Tensor({n, k});
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* z = &logits.data[static_cast<std::size_t>(i) * k];
    const double zmax = *std::max_element(z, z + k);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::exp(z[j] - zmax);
    const int y = labels[i];
    if (y < 0 || y >= k) throw PreconditionError("cross entropy: label out of range");
    loss += -(z[y] - zmax - std::log(sum));
    for (int j = 0; j < k; ++j) {
      const double p = std::exp(z[j] - zmax) / sum;
      grad.data[static_cast<std::size_t>(i) * k + j] = (p - (j == y ? 1.0 : 0.0)) / n;
    }
  }
  return loss / n;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const int n = logits.dim(0);
  const int k = logits.dim(1);
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) {
    const double* z = &logits.data[static_cast<std::size_t>(i) * k];
    out[i] = static_cast<int>(std::max_element(z, z + k) - z);
  }
  return out;
}

AdamW::AdamW(double beta1, double beta2, double eps, double weight_decay)
    : b1_(beta1), b2_(beta2), eps_(eps), wd_(weight_decay) {}

void AdamW::step(std::span<Param* const> params, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (Param* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      p->m[i] = b1_ * p->m[i] + (1.0 - b1_) * g;
      p->v[i] = b2_ * p->v[i] + (1.0 - b2_) * g * g;
      const double mh = p->m[i] / c1;
      const double vh = p->v[i] / c2;
      double upd = mh / (std::sqrt(vh) + eps_);
      if (p->decay) upd += wd_ * p->value[i];
      p->value[i] -= lr * upd;
      p->grad[i] = 0.0;
    }
  }
}

double cosine_lr(double lr0, std::int64_t step, std::int64_t total) {
  if (total <= 0) return lr0;
  const double f = std::min(1.0, static_cast<double>(step) / static_cast<double>(total));
  return lr0 / 2.0 * (1.0 + std::cos(std::numbers::pi * f));
}

}  // namespace sptc
