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

/**
 * @file nn.hpp
 * @brief Minimal CPU network with exact backprop: im2col convolution,
 * linear, ReLU, 2x2 max pooling, softmax cross-entropy, AdamW.
 *
 * Convolution and linear layers share MatmulLayer, which applies the
 * element mask, fake-quantizes weights (symmetric per-tensor, b_w bits) and
 * inputs (unsigned, b_in bits, running max), and can hand the product to an
 * external MatmulBackend at inference time. Gradients use the
 * straight-through estimator.
 */

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sptc/rng.hpp"

namespace sptc {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  Tensor(std::vector<int> s, std::vector<double> d);
  std::size_t numel() const noexcept { return data.size(); }
  int dim(int i) const { return shape.at(i); }
};

struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> m;  // Adam moments
  std::vector<double> v;
  bool decay = true;       // weight decay applies

  void resize(std::vector<int> s);
};

class MatmulLayer;

/// Replaces the digital product of a MatmulLayer during inference.
class MatmulBackend {
 public:
  virtual ~MatmulBackend() = default;
  /// x: n input vectors of length layer.cols() (already quantized, >= 0).
  /// y: n output vectors of length layer.rows(), without bias.
  virtual void matmul(const MatmulLayer& layer, std::span<const double> x, int n,
                      std::span<double> y) = 0;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual Tensor forward(const Tensor& x, bool training) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
};

struct QuantSpec {
  bool enabled = true;
  int weight_bits = 8;
  int act_bits = 6;
  double act_momentum = 0.9;  // EMA of the per-batch input max
};

/// Symmetric per-tensor fake quantization to `bits` (scale = max|w| / (2^(b-1) - 1)).
std::vector<double> quantize_symmetric(std::span<const double> w, int bits);

/// Unsigned fake quantization onto [0, max] with 2^bits - 1 steps.
double quantize_unsigned(double x, double max, int bits) noexcept;

class MatmulLayer : public Layer {
 public:
  MatmulLayer(std::string name, int rows, int cols, QuantSpec quant);

  const std::string& name() const noexcept { return name_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  /// Index among the network's matmul layers.
  int index() const noexcept { return index_; }
  void set_index(int i) noexcept { index_ = i; }

  Param& weight() noexcept { return weight_; }
  Param& bias() noexcept { return bias_; }
  const Param& weight() const noexcept { return weight_; }
  const Param& bias() const noexcept { return bias_; }

  /// Element mask over rows x cols (empty = dense) and per-row bias mask.
  void set_mask(std::vector<std::uint8_t> element_mask, std::vector<std::uint8_t> row_mask);
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  /// W <- W (.) m, b <- b (.) m_row.
  void apply_mask();

  /// Masked, quantized weights as used by the forward pass.
  std::vector<double> effective_weights() const;
  double act_max() const noexcept { return act_max_; }
  void set_act_max(double v) noexcept { act_max_ = v; act_init_ = true; }
  const QuantSpec& quant() const noexcept { return quant_; }

  void set_backend(MatmulBackend* backend) noexcept { backend_ = backend; }
  /// Dense (unmasked) gradient w.r.t. the effective weights, accumulated
  /// over backward calls until reset.
  const std::vector<double>& dense_grad() const noexcept { return dense_grad_; }
  void reset_dense_grad();

  bool sparse = false;     // subject to DST
  bool protect = false;    // mapped crosstalk-free on hardware

  std::vector<Param*> params() override { return {&weight_, &bias_}; }

 protected:
  /// y (n x rows) = xq (n x cols) W_eff^T + b; caches for backward.
  std::vector<double> product(const std::vector<double>& x, int n, bool training);
  /// Returns dx (n x cols) given dy (n x rows).
  std::vector<double> product_backward(const std::vector<double>& dy, int n);

 private:
  std::string name_;
  int rows_;
  int cols_;
  int index_ = -1;
  QuantSpec quant_;
  Param weight_;
  Param bias_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::uint8_t> row_mask_;
  double act_max_ = 1.0;
  bool act_init_ = false;
  MatmulBackend* backend_ = nullptr;

  std::vector<double> x_raw_;  // cached input
  std::vector<double> x_q_;    // quantized input
  std::vector<double> w_eff_;
  std::vector<double> dense_grad_;
};

class Linear : public MatmulLayer {
 public:
  Linear(std::string name, int in, int out, QuantSpec quant);
  std::string kind() const override { return "linear"; }
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::vector<int> in_shape_;
};

class Conv2d : public MatmulLayer {
 public:
  Conv2d(std::string name, int in_channels, int out_channels, int kernel, int padding,
         QuantSpec quant);
  std::string kind() const override { return "conv"; }
  int in_channels() const noexcept { return in_c_; }
  int kernel() const noexcept { return k_; }
  int padding() const noexcept { return pad_; }
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  int in_c_;
  int k_;
  int pad_;
  int n_ = 0, h_ = 0, w_ = 0, ho_ = 0, wo_ = 0;
};

class Relu : public Layer {
 public:
  std::string kind() const override { return "relu"; }
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::vector<std::uint8_t> on_;
  std::vector<int> shape_;
};

class MaxPool2 : public Layer {
 public:
  std::string kind() const override { return "maxpool"; }
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::vector<int> in_shape_;
  std::vector<std::size_t> argmax_;
};

/// Im2col: x (N, C, H, W) -> (N Ho Wo) x (C K K) rows, one per output
/// position, column index (c K + ky) K + kx.
std::vector<double> im2col(std::span<const double> x, int n, int c, int h, int w, int k, int pad,
                           int& ho, int& wo);

struct LayerSpec {
  enum class Kind { Conv, Linear, MaxPool };
  Kind kind = Kind::Conv;
  int out = 0;        // output channels / features
  int kernel = 3;
  int padding = 1;
  bool sparse = false;
  bool protect = false;
};

struct ModelSpec {
  int in_c = 1;
  int in_h = 8;
  int in_w = 8;
  int classes = 10;
  std::vector<LayerSpec> layers;  // ReLU follows every conv/linear except the last

  /// conv 1->8 (dense), conv 8->16 (sparse), pool, conv 16->16 (sparse),
  /// pool, linear 64->10 (dense, crosstalk-protected); K3, pad 1.
  static ModelSpec desk_cnn();
  /// Fully connected: in -> hidden... -> classes; hidden layers sparse.
  static ModelSpec mlp(int in_features, std::vector<int> hidden, int classes);
};

class Model {
 public:
  Model(const ModelSpec& spec, QuantSpec quant, Rng& rng);

  const ModelSpec& spec() const noexcept { return spec_; }
  Tensor forward(const Tensor& x, bool training);
  void backward(const Tensor& grad_logits);
  std::vector<Param*> params();
  std::vector<MatmulLayer*> matmul_layers();
  /// Output spatial positions per sample of each matmul layer (1 for linear).
  const std::vector<int>& positions() const noexcept { return positions_; }
  void set_backend(MatmulBackend* backend);

 private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<MatmulLayer*> matmuls_;
  std::vector<int> positions_;
};

/// Mean cross-entropy over the batch; writes d loss / d logits into grad.
double softmax_cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor& grad);

/// Index of the largest logit per sample.
std::vector<int> argmax_rows(const Tensor& logits);

class AdamW {
 public:
  AdamW(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double weight_decay = 1e-4);
  void step(std::span<Param* const> params, double lr);
  std::int64_t steps() const noexcept { return t_; }

 private:
  double b1_, b2_, eps_, wd_;
  std::int64_t t_ = 0;
};

/// lr0 / 2 * (1 + cos(pi step / total)).
double cosine_lr(double lr0, std::int64_t step, std::int64_t total);

}  // namespace sptc
