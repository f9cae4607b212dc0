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
 * @file dst.hpp
 * @brief Power/crosstalk-aware dynamic sparse training: mask initialization
 * and the periodic prune/grow update of column masks.
 *
 * Density s is the fraction of kept elements. Rows keep s_r = max(s, 0.5)
 * with interleaved zeros; columns keep s_c = s / s_r per chunk. Prune/grow
 * acts on column vectors only and is skipped when s_c = 1.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sptc/mask_power.hpp"
#include "sptc/partition.hpp"
#include "sptc/rng.hpp"

namespace sptc {

enum class MaskInit { PowerAware, Random };

std::string to_string(MaskInit init);
MaskInit mask_init_from_string(const std::string& name);

/// Everything the power model needs to score a mask.
struct PowerContext {
  ArchConfig arch;
  DeviceParams device;
  LayoutParams layout;
  GammaFit fit;
  GatingPolicy policy{ExecutionMode::InputGatingRedistribution, true};
};

struct DstSchedule {
  double alpha0 = 0.5;
  int delta_t = 1;                    // steps between mask updates
  int t_end = 1;                      // prune/grow stops at this step
  int delta_m = 2;                    // selection margin
  std::uint64_t max_combinations = 10000;

  void validate() const;
};

/// Round half away from zero for non-negative values, i.e. floor(x + 0.5).
std::int64_t round_half_up(double x);

/// Length-n row pattern keeping round(n s) ones; zeros are placed at
/// n-1, n-3, ... (then the remaining slots from the tail).
std::vector<std::uint8_t> interleaved_ones(int n, double density);

/// Row and column densities for a target s: {max(s, 0.5), s / max(s, 0.5)}.
std::pair<double, double> split_density(double s);

/// alpha0 / 2 * (1 + cos(t pi / t_end)).
double death_rate(double alpha0, int t, int t_end);

/// Interleaved row mask and per-chunk column masks keeping
/// round(real_cols s_c) columns, chosen to minimize the modeled power of
/// each chunk (PowerAware) or uniformly at random. `matrix` is the layer
/// weight matrix normalized into [-1, 1].
SparsityMask init_masks(double s, const LayerPartition& part, std::span<const double> matrix,
                        MaskInit init, const PowerContext& ctx, std::uint64_t max_combinations,
                        Rng& rng);

struct StepReport {
  double alpha = 0.0;
  std::int64_t death_elements = 0;  // D
  int target_columns = 0;           // n_c
  std::vector<int> columns;         // column-vector ids changed
  double power_mw = 0.0;            // layer power change of the chosen set
};

/// Prune: D = round(alpha nnz), n_c = round(D / active rows), pool = n_c +
/// delta_m unpruned columns of smallest l2 norm (ties by id), remove the
/// power-minimizing n_c of them. `latent` is the full-precision weight
/// matrix; `scored` the normalized matrix used for power.
StepReport prune_step(SparsityMask& mask, const LayerPartition& part,
                      std::span<const double> latent, std::span<const double> scored,
                      const DstSchedule& schedule, int t, const PowerContext& ctx);

/// Grow: n_c = round((s capacity - nnz) / active rows), pool = n_c + delta_m
/// pruned columns of largest gradient l2 norm (ties by id), add the
/// power-minimizing n_c of them.
StepReport grow_step(SparsityMask& mask, const LayerPartition& part, double s,
                     std::span<const double> gradient, std::span<const double> scored,
                     const DstSchedule& schedule, const PowerContext& ctx);

}  // namespace sptc
