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

#include "sptc/mask_power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "sptc/error.hpp"

namespace sptc {

u128 binomial_saturating(int n, int k) noexcept {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  constexpr u128 kMax = ~static_cast<u128>(0);
  auto gcd = [](u128 a, u128 b) {
    while (b != 0) {
      const u128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  };
  u128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i is an integer; with g = gcd(acc, i), i / g
    // divides n - k + i.
    const u128 g = gcd(acc, static_cast<u128>(i));
    const u128 factor = static_cast<u128>(n - k + i) / (static_cast<u128>(i) / g);
    const u128 base = acc / g;
    if (factor != 0 && base > kMax / factor) return kMax;
    acc = base * factor;
  }
  return acc;
}

std::vector<int> unrank_combination(int n, int k, u128 rank) {
  if (k < 0 || k > n) throw PreconditionError("unrank_combination: need 0 <= k <= n");
  std::vector<int> out;
  out.reserve(k);
  int next = 0;
  for (int slot = 0; slot < k; ++slot) {
    for (int e = next; e < n; ++e) {
      const u128 block = binomial_saturating(n - e - 1, k - slot - 1);
      if (rank < block) {
        out.push_back(e);
        next = e + 1;
        break;
      }
      rank -= block;
    }
  }
  if (static_cast<int>(out.size()) != k) throw PreconditionError("unrank_combination: rank out of range");
  return out;
}

CombinationSampler::CombinationSampler(int n, int k, std::uint64_t cap) : n_(n), k_(k) {
  if (k < 0 || k > n) throw PreconditionError("CombinationSampler: need 0 <= k <= n");
  if (cap == 0) throw PreconditionError("CombinationSampler: cap must be >= 1");
  total_ = binomial_saturating(n, k);
  exhaustive_ = total_ <= cap;
  size_ = exhaustive_ ? static_cast<std::uint64_t>(total_) : cap;
}

std::vector<int> CombinationSampler::at(std::uint64_t i) const {
  if (i >= size_) throw PreconditionError("CombinationSampler: index out of range");
  if (exhaustive_) return unrank_combination(n_, k_, i);
  const u128 cap = size_;
  const u128 rank = (total_ / cap) * i + ((total_ % cap) * i) / cap;
  return unrank_combination(n_, k_, rank);
}

Selection select_min_power(std::vector<int> pool, int k, std::uint64_t cap,
                           const std::function<double(std::span<const int>)>& cost) {
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  Selection best;
  if (k <= 0) {
    best.power_mw = cost({});
    best.evaluated = 1;
    return best;
  }
  if (k >= static_cast<int>(pool.size())) {
    best.chosen = pool;
    best.power_mw = cost(best.chosen);
    best.evaluated = 1;
    return best;
  }
  CombinationSampler sampler(static_cast<int>(pool.size()), k, cap);
  best.power_mw = std::numeric_limits<double>::infinity();
  std::vector<int> trial(k);
  // Sequential lexicographic walk when exhaustive; unranking otherwise.
  std::vector<int> idx;
  for (std::uint64_t i = 0; i < sampler.size(); ++i) {
    if (sampler.exhaustive()) {
      if (i == 0) {
        idx.resize(k);
        for (int t = 0; t < k; ++t) idx[t] = t;
      } else {
        int t = k - 1;
        const int n = static_cast<int>(pool.size());
        while (idx[t] == n - k + t) --t;
        ++idx[t];
        for (int u = t + 1; u < k; ++u) idx[u] = idx[u - 1] + 1;
      }
    } else {
      idx = sampler.at(i);
    }
    for (int t = 0; t < k; ++t) trial[t] = pool[idx[t]];
    const double p = cost(trial);
    ++best.evaluated;
    const double tol = 1e-12 * std::max(1.0, std::abs(best.power_mw));
    if (best.chosen.empty() || p < best.power_mw - tol) {
      best.power_mw = p;
      best.chosen = trial;
    }
  }
  return best;
}

ChunkPowerModel::ChunkPowerModel(const ArchConfig& config, const DeviceParams& device,
                                 const LayoutParams& layout, const GammaFit& fit,
                                 const ChunkState& chunk, GatingPolicy policy)
    : k2_(config.k2),
      c_(config.c),
      lr_(policy.mode == ExecutionMode::InputGatingRedistribution),
      l_s_(layout.l_s_um),
      device_(device),
      fit_(fit) {
  const int rows = config.chunk_rows();
  const int cols = config.chunk_cols();
  if (chunk.weights.size() != static_cast<std::size_t>(rows) * cols) {
    throw PreconditionError("ChunkPowerModel: chunk weights must be (r k1) x (c k2)");
  }
  const bool ig = policy.mode != ExecutionMode::PruneOnly;
  const double in_ch = input_channel_power(config, device);
  const double per_rad = mzi_power(std::numbers::pi, layout.l_s_um, device, fit) / std::numbers::pi;
  const double pd_col = 2.0 * device.p_pd_mw * rows;

  input_on_.assign(cols, in_ch);
  input_off_.assign(cols, ig ? 0.0 : in_ch);
  weight_on_.assign(cols, pd_col);
  weight_off_.assign(cols, lr_ ? 0.0 : pd_col);
  for (int i = 0; i < rows; ++i) {
    if (!chunk.row_mask.empty() && !chunk.row_mask[i]) continue;
    for (int j = 0; j < cols; ++j) {
      weight_on_[j] += std::abs(weight_to_phase(chunk.weights[static_cast<std::size_t>(i) * cols + j])) * per_rad;
    }
  }
  const double out_ch = readout_channel_power(config, device);
  for (int i = 0; i < rows; ++i) {
    if (policy.output_gating && !chunk.row_mask.empty() && !chunk.row_mask[i]) continue;
    readout_mw_ += out_ch;
  }
}

PowerBreakdown ChunkPowerModel::breakdown(std::span<const std::uint8_t> col_mask) const {
  if (col_mask.size() != input_on_.size()) {
    throw PreconditionError("ChunkPowerModel: column mask must have length c k2");
  }
  PowerBreakdown p;
  for (std::size_t j = 0; j < col_mask.size(); ++j) {
    if (col_mask[j]) {
      p.input_mw += input_on_[j];
      p.weight_mw += weight_on_[j];
    } else {
      p.input_mw += input_off_[j];
      p.weight_mw += weight_off_[j];
    }
  }
  p.readout_mw = readout_mw_;
  if (lr_) {
    for (int g = 0; g < c_; ++g) {
      p.rerouter_mw += rerouter_configure(col_mask.subspan(static_cast<std::size_t>(g) * k2_, k2_),
                                          l_s_, device_, fit_)
                           .total_power_mw;
    }
  }
  p.finalize();
  return p;
}

LayerPowerModel::LayerPowerModel(const ArchConfig& config, const DeviceParams& device,
                                 const LayoutParams& layout, const GammaFit& fit,
                                 std::span<const double> matrix, const SparsityMask& row_source,
                                 const LayerPartition& part, GatingPolicy policy)
    : part_(part) {
  const auto states = chunk_states(matrix, row_source, part);
  chunks_.reserve(states.size());
  for (const auto& st : states) chunks_.emplace_back(config, device, layout, fit, st, policy);
}

double LayerPowerModel::chunk_mw(const SparsityMask& mask, int pi, int qi) const {
  const auto first = mask.col.begin() + part_.col_id(pi, qi * part_.chunk_cols);
  std::vector<std::uint8_t> slice(first, first + part_.chunk_cols);
  return chunks_[static_cast<std::size_t>(pi) * part_.q + qi].total_mw(slice);
}

double LayerPowerModel::total_mw(const SparsityMask& mask) const {
  double total = 0.0;
  for (int pi = 0; pi < part_.p; ++pi) {
    for (int qi = 0; qi < part_.q; ++qi) total += chunk_mw(mask, pi, qi);
  }
  return total;
}

double LayerPowerModel::delta_mw(const SparsityMask& mask, std::span<const int> ids,
                                 bool value) const {
  std::set<std::pair<int, int>> touched;
  std::vector<std::uint8_t> slice(part_.chunk_cols);
  for (int id : ids) {
    touched.emplace(part_.pi_of(id), part_.col_of(id) / part_.chunk_cols);
  }
  double delta = 0.0;
  for (const auto& [pi, qi] : touched) {
    const int base = part_.col_id(pi, qi * part_.chunk_cols);
    const auto& chunk = chunks_[static_cast<std::size_t>(pi) * part_.q + qi];
    std::copy_n(mask.col.begin() + base, part_.chunk_cols, slice.begin());
    const double before = chunk.total_mw(slice);
    for (int id : ids) {
      if (id >= base && id < base + part_.chunk_cols) slice[id - base] = value ? 1 : 0;
    }
    delta += chunk.total_mw(slice) - before;
  }
  return delta;
}

double mask_power(const SparsityMask& mask, std::span<const double> matrix,
                  const LayerPartition& part, const ArchConfig& config,
                  const DeviceParams& device, const LayoutParams& layout, const GammaFit& fit,
                  GatingPolicy policy) {
  double total = 0.0;
  for (const auto& st : chunk_states(matrix, mask, part)) {
    total += chunk_power(config, device, layout, fit, st, policy).total_mw;
  }
  return total;
}

}  // namespace sptc
