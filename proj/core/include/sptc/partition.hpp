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
 * @file partition.hpp
 * @brief Chunking of an im2col weight matrix onto (r k1) x (c k2) blocks and
 * the structured row/column sparsity mask defined over those blocks.
 *
 * A layer's weight matrix has C_o rows and C_i K^2 columns, zero-padded to
 * (p r k1) x (q c k2). Chunk (pi, qi) covers rows [pi r k1, (pi+1) r k1) and
 * columns [qi c k2, (qi+1) c k2).
 *
 * Row mask: length r k1, the same for every chunk; row o of the matrix is
 * kept when row[o % (r k1)] is set. Column mask: one entry per column
 * vector, i.e. per (pi, padded column), id = pi * (q c k2) + column. Padded
 * columns are always 0 and are left out of density accounting.
 */

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sptc/arch_model.hpp"

namespace sptc {

struct LayerPartition {
  int rows = 0;        // C_o
  int cols = 0;        // C_i K^2
  int p = 0;
  int q = 0;
  int chunk_rows = 0;  // r k1
  int chunk_cols = 0;  // c k2

  int padded_rows() const noexcept { return p * chunk_rows; }
  int padded_cols() const noexcept { return q * chunk_cols; }
  int column_vectors() const noexcept { return p * padded_cols(); }
  int chunk_count() const noexcept { return p * q; }

  int col_id(int pi, int col) const noexcept { return pi * padded_cols() + col; }
  int pi_of(int id) const noexcept { return id / padded_cols(); }
  int col_of(int id) const noexcept { return id % padded_cols(); }
  bool is_padded(int id) const noexcept { return col_of(id) >= cols; }
  /// Number of non-padded columns inside chunk column block qi.
  int real_cols_in(int qi) const noexcept;
};

LayerPartition make_partition(const LayerDims& dims, const ArchConfig& config);

struct SparsityMask {
  std::vector<std::uint8_t> row;  // chunk_rows
  std::vector<std::uint8_t> col;  // column_vectors

  bool element(const LayerPartition& part, int o, int k) const {
    return row[o % part.chunk_rows] && col[part.col_id(o / part.chunk_rows, k)];
  }
};

/// All rows and non-padded columns kept.
SparsityMask dense_mask(const LayerPartition& part);

/// Shape checks plus "padded columns are 0". Throws PreconditionError.
void check_mask(const SparsityMask& mask, const LayerPartition& part);

/// Active rows per chunk (sum of the row mask).
int active_rows(const SparsityMask& mask);

/// Number of kept matrix elements over the real columns.
std::int64_t kept_elements(const SparsityMask& mask, const LayerPartition& part);

/// Denominator for density: p r k1 * C_i K^2.
std::int64_t mask_capacity(const LayerPartition& part);

double density(const SparsityMask& mask, const LayerPartition& part);

/// W <- W (.) m for a row-major C_o x C_i K^2 matrix.
template <typename T>
void apply_mask(std::span<T> weights, const SparsityMask& mask, const LayerPartition& part) {
  for (int o = 0; o < part.rows; ++o) {
    for (int k = 0; k < part.cols; ++k) {
      if (!mask.element(part, o, k)) weights[static_cast<std::size_t>(o) * part.cols + k] = T(0);
    }
  }
}

/// Chunk (pi, qi) of a C_o x C_i K^2 matrix, zero padded, row-major.
std::vector<double> extract_chunk(std::span<const double> matrix, const LayerPartition& part,
                                  int pi, int qi);

/// Chunk states in (pi, qi) row-major order, for power accounting. `matrix`
/// must already be normalized into [-1, 1]. The chunk row mask also turns
/// off padded rows.
std::vector<ChunkState> chunk_states(std::span<const double> matrix, const SparsityMask& mask,
                                     const LayerPartition& part);

/// Divides by max |w| (no-op for an all-zero matrix).
std::vector<double> normalize_weights(std::span<const double> matrix);

/// l2 norm of each column vector over its chunk's kept rows, indexed by id.
/// Padded column vectors get 0.
std::vector<double> column_norms(std::span<const double> matrix, const SparsityMask& mask,
                                 const LayerPartition& part);

}  // namespace sptc
