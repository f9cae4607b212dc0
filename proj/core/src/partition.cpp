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

#include "sptc/partition.hpp"

#include <algorithm>
#include <cmath>

#include "sptc/error.hpp"

namespace sptc {

int LayerPartition::real_cols_in(int qi) const noexcept {
  return std::clamp(cols - qi * chunk_cols, 0, chunk_cols);
}

LayerPartition make_partition(const LayerDims& dims, const ArchConfig& config) {
  LayerPartition part;
  part.rows = dims.c_out;
  part.cols = dims.c_in * dims.kernel * dims.kernel;
  part.p = chunks_p(dims, config);
  part.q = chunks_q(dims, config);
  part.chunk_rows = config.chunk_rows();
  part.chunk_cols = config.chunk_cols();
  return part;
}

SparsityMask dense_mask(const LayerPartition& part) {
  SparsityMask m;
  m.row.assign(part.chunk_rows, 1);
  m.col.assign(part.column_vectors(), 0);
  for (int id = 0; id < part.column_vectors(); ++id) m.col[id] = part.is_padded(id) ? 0 : 1;
  return m;
}

void check_mask(const SparsityMask& mask, const LayerPartition& part) {
  if (static_cast<int>(mask.row.size()) != part.chunk_rows) {
    throw PreconditionError("row mask length must equal r k1");
  }
  if (static_cast<int>(mask.col.size()) != part.column_vectors()) {
    throw PreconditionError("column mask length must equal p q c k2");
  }
  for (int id = 0; id < part.column_vectors(); ++id) {
    if (part.is_padded(id) && mask.col[id]) {
      throw PreconditionError("padded column vectors must stay pruned");
    }
  }
}

int active_rows(const SparsityMask& mask) {
  return static_cast<int>(std::count_if(mask.row.begin(), mask.row.end(), [](auto v) { return v != 0; }));
}

std::int64_t kept_elements(const SparsityMask& mask, const LayerPartition& part) {
  std::int64_t cols = 0;
  for (int id = 0; id < part.column_vectors(); ++id) {
    if (!part.is_padded(id) && mask.col[id]) ++cols;
  }
  return cols * active_rows(mask);
}

std::int64_t mask_capacity(const LayerPartition& part) {
  return static_cast<std::int64_t>(part.padded_rows()) * part.cols;
}

double density(const SparsityMask& mask, const LayerPartition& part) {
  return static_cast<double>(kept_elements(mask, part)) / static_cast<double>(mask_capacity(part));
}

std::vector<double> extract_chunk(std::span<const double> matrix, const LayerPartition& part,
                                  int pi, int qi) {
  if (matrix.size() != static_cast<std::size_t>(part.rows) * part.cols) {
    throw PreconditionError("extract_chunk: matrix size does not match partition");
  }
  std::vector<double> out(static_cast<std::size_t>(part.chunk_rows) * part.chunk_cols, 0.0);
  for (int i = 0; i < part.chunk_rows; ++i) {
    const int o = pi * part.chunk_rows + i;
    if (o >= part.rows) break;
    for (int j = 0; j < part.chunk_cols; ++j) {
      const int k = qi * part.chunk_cols + j;
      if (k >= part.cols) break;
      out[static_cast<std::size_t>(i) * part.chunk_cols + j] =
          matrix[static_cast<std::size_t>(o) * part.cols + k];
    }
  }
  return out;
}

std::vector<ChunkState> chunk_states(std::span<const double> matrix, const SparsityMask& mask,
                                     const LayerPartition& part) {
  check_mask(mask, part);
  std::vector<ChunkState> out;
  out.reserve(part.chunk_count());
  for (int pi = 0; pi < part.p; ++pi) {
    for (int qi = 0; qi < part.q; ++qi) {
      ChunkState st;
      st.weights = extract_chunk(matrix, part, pi, qi);
      st.row_mask = mask.row;
      for (int i = 0; i < part.chunk_rows; ++i) {
        if (pi * part.chunk_rows + i >= part.rows) st.row_mask[i] = 0;
      }
      st.col_mask.assign(part.chunk_cols, 0);
      for (int j = 0; j < part.chunk_cols; ++j) {
        st.col_mask[j] = mask.col[part.col_id(pi, qi * part.chunk_cols + j)];
      }
      out.push_back(std::move(st));
    }
  }
  return out;
}

std::vector<double> normalize_weights(std::span<const double> matrix) {
  double m = 0.0;
  for (double v : matrix) m = std::max(m, std::abs(v));
  std::vector<double> out(matrix.begin(), matrix.end());
  if (m > 0.0) {
    for (double& v : out) v = std::clamp(v / m, -1.0, 1.0);
  }
  return out;
}

std::vector<double> column_norms(std::span<const double> matrix, const SparsityMask& mask,
                                 const LayerPartition& part) {
  if (matrix.size() != static_cast<std::size_t>(part.rows) * part.cols) {
    throw PreconditionError("column_norms: matrix size does not match partition");
  }
  std::vector<double> sq(part.column_vectors(), 0.0);
  for (int o = 0; o < part.rows; ++o) {
    if (!mask.row[o % part.chunk_rows]) continue;
    const int pi = o / part.chunk_rows;
    for (int k = 0; k < part.cols; ++k) {
      const double v = matrix[static_cast<std::size_t>(o) * part.cols + k];
      sq[part.col_id(pi, k)] += v * v;
    }
  }
  for (double& v : sq) v = std::sqrt(v);
  return sq;
}

}  // namespace sptc
