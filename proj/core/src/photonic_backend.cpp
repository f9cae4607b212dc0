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

#include "sptc/photonic_backend.hpp"

#include <algorithm>
#include <cmath>

#include "sptc/error.hpp"
#include "sptc/rng.hpp"

namespace sptc {

void derive_chunk_masks(std::span<const std::uint8_t> element_mask, const LayerPartition& part,
                        int pi, int qi, std::vector<std::uint8_t>& row_on,
                        std::vector<std::uint8_t>& col_on) {
  row_on.assign(part.chunk_rows, 0);
  col_on.assign(part.chunk_cols, 0);
  for (int i = 0; i < part.chunk_rows; ++i) {
    const int o = pi * part.chunk_rows + i;
    if (o >= part.rows) continue;
    for (int j = 0; j < part.chunk_cols; ++j) {
      const int k = qi * part.chunk_cols + j;
      if (k >= part.cols) continue;
      if (element_mask.empty() || element_mask[static_cast<std::size_t>(o) * part.cols + k]) {
        row_on[i] = 1;
        col_on[j] = 1;
      }
    }
  }
}

MappedMatrix::MappedMatrix(std::span<const double> normalized, int rows, int cols,
                           std::span<const std::uint8_t> element_mask, const ArchConfig& arch,
                           std::shared_ptr<const CrosstalkKernel> kernel,
                           const DeviceParams& device, MvmOptions options)
    : k1_(arch.k1), k2_(arch.k2), r_(arch.r), c_(arch.c) {
  if (normalized.size() != static_cast<std::size_t>(rows) * cols) {
    throw PreconditionError("MappedMatrix: matrix size does not match rows x cols");
  }
  if (!element_mask.empty() && element_mask.size() != normalized.size()) {
    throw PreconditionError("MappedMatrix: element mask size does not match the matrix");
  }
  part_.rows = rows;
  part_.cols = cols;
  part_.chunk_rows = arch.chunk_rows();
  part_.chunk_cols = arch.chunk_cols();
  part_.p = (rows + part_.chunk_rows - 1) / part_.chunk_rows;
  part_.q = (cols + part_.chunk_cols - 1) / part_.chunk_cols;
  masked_.assign(normalized.begin(), normalized.end());
  if (!element_mask.empty()) {
    for (std::size_t i = 0; i < masked_.size(); ++i) {
      if (!element_mask[i]) masked_[i] = 0.0;
    }
  }

  const CoreShape shape{k1_, k2_};
  std::vector<std::uint8_t> row_on, col_on;
  std::vector<double> core_w(static_cast<std::size_t>(shape.size()));
  std::vector<std::uint8_t> core_rows(k1_), core_cols(k2_);
  cores_.reserve(static_cast<std::size_t>(part_.chunk_count()) * r_ * c_);
  for (int pi = 0; pi < part_.p; ++pi) {
    for (int qi = 0; qi < part_.q; ++qi) {
      const auto chunk = extract_chunk(masked_, part_, pi, qi);
      derive_chunk_masks(element_mask, part_, pi, qi, row_on, col_on);
      for (int t = 0; t < r_; ++t) {
        for (int g = 0; g < c_; ++g) {
          for (int i = 0; i < k1_; ++i) {
            core_rows[i] = row_on[t * k1_ + i];
            for (int j = 0; j < k2_; ++j) {
              core_w[static_cast<std::size_t>(i) * k2_ + j] =
                  chunk[static_cast<std::size_t>(t * k1_ + i) * part_.chunk_cols + g * k2_ + j];
            }
          }
          for (int j = 0; j < k2_; ++j) core_cols[j] = col_on[g * k2_ + j];
          cores_.emplace_back(shape, core_w, core_rows, core_cols, kernel, device, options);
        }
      }
    }
  }
}

void MappedMatrix::set_gating(ExecutionMode mode, bool output_gating) noexcept {
  for (auto& core : cores_) core.set_gating(mode, output_gating);
}

void MappedMatrix::multiply(std::span<const double> x, int n, Rng& rng, std::span<double> y) const {
  const int rows = part_.rows;
  const int cols = part_.cols;
  if (x.size() != static_cast<std::size_t>(n) * cols || y.size() != static_cast<std::size_t>(n) * rows) {
    throw PreconditionError("MappedMatrix::multiply: vector size mismatch");
  }
  std::vector<double> xn(part_.padded_cols(), 0.0);
  std::vector<double> acc(part_.padded_rows(), 0.0);
  for (int v = 0; v < n; ++v) {
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(v) * cols, cols, xn.begin());
    std::fill(acc.begin(), acc.end(), 0.0);
    std::size_t core = 0;
    for (int pi = 0; pi < part_.p; ++pi) {
      for (int qi = 0; qi < part_.q; ++qi) {
        for (int t = 0; t < r_; ++t) {
          std::span<double> out(&acc[static_cast<std::size_t>(pi) * part_.chunk_rows + t * k1_], k1_);
          for (int g = 0; g < c_; ++g, ++core) {
            std::span<const double> in(&xn[static_cast<std::size_t>(qi) * part_.chunk_cols + g * k2_], k2_);
            cores_[core].mvm_accumulate(in, rng, out);
          }
        }
      }
    }
    std::copy_n(acc.begin(), rows, y.begin() + static_cast<std::ptrdiff_t>(v) * rows);
  }
}

void MappedMatrix::ideal(std::span<const double> x, int n, std::span<double> y) const {
  const int rows = part_.rows;
  const int cols = part_.cols;
  for (int v = 0; v < n; ++v) {
    const double* xv = &x[static_cast<std::size_t>(v) * cols];
    for (int o = 0; o < rows; ++o) {
      const double* wo = &masked_[static_cast<std::size_t>(o) * cols];
      double s = 0.0;
      for (int k = 0; k < cols; ++k) s += wo[k] * xv[k];
      y[static_cast<std::size_t>(v) * rows + o] = s;
    }
  }
}

PhotonicBackend::PhotonicBackend(PhotonicSetup setup) : setup_(std::move(setup)) {
  setup_.arch.validate();
  setup_.device.validate();
  setup_.layout.validate(setup_.device);
  kernel_ = std::make_shared<const CrosstalkKernel>(CoreShape{setup_.arch.k1, setup_.arch.k2},
                                                    setup_.layout, setup_.fit);
}

void PhotonicBackend::map_model(Model& model) {
  layers_.clear();
  for (MatmulLayer* layer : model.matmul_layers()) {
    if (layer->index() != static_cast<int>(layers_.size())) {
      throw PreconditionError("PhotonicBackend: matmul layers must be indexed in order");
    }
    MappedLayer ml;
    ml.w_eff = layer->effective_weights();
    for (double v : ml.w_eff) ml.w_scale = std::max(ml.w_scale, std::abs(v));
    MvmOptions opts = setup_.options;
    if (layer->protect) opts.crosstalk = false;
    ml.matrix = std::make_unique<MappedMatrix>(normalize_weights(ml.w_eff), layer->rows(),
                                               layer->cols(), layer->mask(), setup_.arch,
                                               kernel_, setup_.device, opts);
    layers_.push_back(std::move(ml));
    layer->set_backend(this);
  }
}

void PhotonicBackend::matmul(const MatmulLayer& layer, std::span<const double> x, int n,
                             std::span<double> y) {
  if (layer.index() < 0 || layer.index() >= static_cast<int>(layers_.size())) {
    throw PreconditionError("PhotonicBackend: layer " + layer.name() + " is not mapped");
  }
  MappedLayer& ml = layers_[layer.index()];
  const int rows = layer.rows();
  const int cols = layer.cols();

  double x_scale = layer.quant().enabled ? layer.act_max() : 0.0;
  if (!(x_scale > 0.0)) {
    for (double v : x) x_scale = std::max(x_scale, v);
  }
  std::vector<double> xn(x.size(), 0.0);
  if (x_scale > 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) xn[i] = std::clamp(x[i] / x_scale, 0.0, 1.0);
  }
  Rng rng(derive_seed({setup_.seed, static_cast<std::uint64_t>(layer.index()), ml.calls++}));
  ml.matrix->multiply(xn, n, rng, y);

  const double scale = ml.w_scale * x_scale;
  for (int v = 0; v < n; ++v) {
    const double* xv = &x[static_cast<std::size_t>(v) * cols];
    for (int o = 0; o < rows; ++o) {
      double& yo = y[static_cast<std::size_t>(v) * rows + o];
      yo *= scale;
      double ideal = 0.0;
      const double* wo = &ml.w_eff[static_cast<std::size_t>(o) * cols];
      for (int k = 0; k < cols; ++k) ideal += wo[k] * xv[k];
      abs_err_ += std::abs(yo - ideal);
      abs_ref_ += std::abs(ideal);
    }
  }
}

double PhotonicBackend::nmae() const {
  if (!(abs_ref_ > 0.0)) throw DomainError("N-MAE undefined: all reference outputs are zero");
  return abs_err_ / abs_ref_;
}

void PhotonicBackend::reset_stats() {
  abs_err_ = 0.0;
  abs_ref_ = 0.0;
}

}  // namespace sptc
