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
 * @file photonic_backend.hpp
 * @brief Runs the matmul layers of a Model on simulated tensor cores.
 *
 * Each layer's effective weight matrix is partitioned into (r k1) x (c k2)
 * chunks and every chunk into r x c cores. Chunk row and column masks are
 * derived from the layer's element mask: a chunk row (column) is active when
 * it keeps at least one element inside the chunk. Weights are normalized by
 * max |W| and inputs by the layer's activation range; outputs are scaled
 * back. Partial sums of the c cores and q chunk columns add digitally.
 */

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sptc/arch_model.hpp"
#include "sptc/nn.hpp"
#include "sptc/partition.hpp"
#include "sptc/ptc_core.hpp"

namespace sptc {

struct PhotonicSetup {
  ArchConfig arch;
  DeviceParams device;
  LayoutParams layout;
  GammaFit fit;
  MvmOptions options;
  std::uint64_t seed = 1;
};

/// Chunk-level masks of chunk (pi, qi) derived from an element mask over
/// rows x cols (empty = dense). Padded rows and columns are off.
void derive_chunk_masks(std::span<const std::uint8_t> element_mask, const LayerPartition& part,
                        int pi, int qi, std::vector<std::uint8_t>& row_on,
                        std::vector<std::uint8_t>& col_on);

/// A rows x cols matrix (normalized into [-1, 1]) programmed onto the
/// chunks and cores of an accelerator.
class MappedMatrix {
 public:
  /// element_mask: rows x cols or empty (dense).
  MappedMatrix(std::span<const double> normalized, int rows, int cols,
               std::span<const std::uint8_t> element_mask, const ArchConfig& arch,
               std::shared_ptr<const CrosstalkKernel> kernel, const DeviceParams& device,
               MvmOptions options);

  const LayerPartition& partition() const noexcept { return part_; }
  void set_gating(ExecutionMode mode, bool output_gating) noexcept;
  /// x: n x cols in [0, 1]; y: n x rows (overwritten).
  void multiply(std::span<const double> x, int n, Rng& rng, std::span<double> y) const;
  /// Noise-free product of the masked matrix.
  void ideal(std::span<const double> x, int n, std::span<double> y) const;

 private:
  int k1_, k2_, r_, c_;
  LayerPartition part_;
  std::vector<double> masked_;
  std::vector<PtcCore> cores_;  // (pi, qi, t, g) row-major
};

class PhotonicBackend : public MatmulBackend {
 public:
  explicit PhotonicBackend(PhotonicSetup setup);

  /// Programs every matmul layer of the model (weights must be final) and
  /// attaches this backend to them. Protected layers map crosstalk-free.
  void map_model(Model& model);
  void matmul(const MatmulLayer& layer, std::span<const double> x, int n,
              std::span<double> y) override;

  /// Aggregate N-MAE over all products since the last reset:
  /// sum |y - y_ideal| / sum |y_ideal| against the digital product of the
  /// same quantized inputs and weights.
  double nmae() const;
  void reset_stats();

 private:
  struct MappedLayer {
    double w_scale = 0.0;
    std::vector<double> w_eff;
    std::unique_ptr<MappedMatrix> matrix;
    std::uint64_t calls = 0;
  };

  PhotonicSetup setup_;
  std::shared_ptr<const CrosstalkKernel> kernel_;
  std::vector<MappedLayer> layers_;
  double abs_err_ = 0.0;
  double abs_ref_ = 0.0;
};

}  // namespace sptc
