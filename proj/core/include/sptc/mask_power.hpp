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
 * @file mask_power.hpp
 * @brief Modeled power of a sparsity mask and the power-minimizing
 * combination search used by mask initialization and DST.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sptc/arch_model.hpp"
#include "sptc/partition.hpp"

namespace sptc {

__extension__ typedef unsigned __int128 u128;

/// C(n, k), saturating at the largest u128.
u128 binomial_saturating(int n, int k) noexcept;

/// The combination of rank `rank` (lexicographic, 0-based) among the
/// k-subsets of {0..n-1}, as ascending indices. rank < C(n, k).
std::vector<int> unrank_combination(int n, int k, u128 rank);

/// Visits k-subsets of n items: all of them in lexicographic order when
/// C(n, k) <= cap, otherwise cap ranks spread evenly over the lexicographic
/// order (rank_i = floor(i C(n,k) / cap)).
class CombinationSampler {
 public:
  CombinationSampler(int n, int k, std::uint64_t cap);

  bool exhaustive() const noexcept { return exhaustive_; }
  std::uint64_t size() const noexcept { return size_; }
  std::vector<int> at(std::uint64_t i) const;

 private:
  int n_;
  int k_;
  u128 total_;
  std::uint64_t size_;
  bool exhaustive_;
};

struct Selection {
  std::vector<int> chosen;  // values taken from the pool
  double power_mw = 0.0;
  std::uint64_t evaluated = 0;
};

/// Picks k entries of `pool` (sorted ascending first) minimizing `cost`.
/// Ties within a relative 1e-12 keep the lexicographically first subset.
/// k >= pool size selects the whole pool.
Selection select_min_power(std::vector<int> pool, int k, std::uint64_t cap,
                           const std::function<double(std::span<const int>)>& cost);

/// Fast power of one chunk as a function of its c k2 column mask, with the
/// weights and row mask fixed. Agrees with chunk_power().
class ChunkPowerModel {
 public:
  ChunkPowerModel(const ArchConfig& config, const DeviceParams& device,
                  const LayoutParams& layout, const GammaFit& fit, const ChunkState& chunk,
                  GatingPolicy policy);

  PowerBreakdown breakdown(std::span<const std::uint8_t> col_mask) const;
  double total_mw(std::span<const std::uint8_t> col_mask) const {
    return breakdown(col_mask).total_mw;
  }

 private:
  int k2_;
  int c_;
  bool lr_;
  double l_s_;
  DeviceParams device_;
  GammaFit fit_;
  double readout_mw_ = 0.0;
  std::vector<double> input_on_, input_off_;
  std::vector<double> weight_on_, weight_off_;
};

/// Power of a whole layer under a mask (sum of its chunk powers), with
/// chunk models cached so that trial masks are cheap to evaluate.
class LayerPowerModel {
 public:
  /// `matrix` is the C_o x C_i K^2 weight matrix normalized into [-1, 1].
  LayerPowerModel(const ArchConfig& config, const DeviceParams& device,
                  const LayoutParams& layout, const GammaFit& fit,
                  std::span<const double> matrix, const SparsityMask& row_source,
                  const LayerPartition& part, GatingPolicy policy);

  const LayerPartition& partition() const noexcept { return part_; }

  double total_mw(const SparsityMask& mask) const;
  double chunk_mw(const SparsityMask& mask, int pi, int qi) const;

  /// Change in layer power when the column vectors `ids` are set to `value`
  /// in `mask`. Only the chunks the ids fall in are re-evaluated.
  double delta_mw(const SparsityMask& mask, std::span<const int> ids, bool value) const;

 private:
  LayerPartition part_;
  std::vector<ChunkPowerModel> chunks_;
};

/// Total modeled layer power for `mask`, evaluated with chunk_power().
double mask_power(const SparsityMask& mask, std::span<const double> matrix,
                  const LayerPartition& part, const ArchConfig& config,
                  const DeviceParams& device, const LayoutParams& layout, const GammaFit& fit,
                  GatingPolicy policy);

}  // namespace sptc
