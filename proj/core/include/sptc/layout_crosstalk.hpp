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
 * @file layout_crosstalk.hpp
 * @brief Crossbar geometry and inter-MZI thermal crosstalk.
 *
 * A k1 x k2 core holds weight W[a][b] (a = output, b = input). Its MZI sits
 * in physical row b (vertical pitch l_v) and physical column a (horizontal
 * pitch l_h). Within a node the upper arm is at the column origin and the
 * lower arm l_s to its left, which is the placement under which the
 * sign-dependent distance formula holds literally:
 *
 *   d_up = sqrt((dR l_v)^2 + (dC l_h - l_s [dphi_j < 0])^2)
 *   d_lo = sqrt((dR l_v)^2 + (dC l_h + l_s [dphi_j >= 0])^2)
 *
 * with dR = R(j) - R(i), dC = C(j) - C(i) for victim i and aggressor j.
 * Flat MZI index is a * k2 + b (row-major weights).
 */

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sptc/device_models.hpp"

namespace sptc {

struct LayoutParams {
  double l_s_um = 9.0;    // arm spacing
  double l_g_um = 5.0;    // gap between neighbouring MZIs
  double l_v_um = 120.0;  // row pitch
  double l_h_um = 20.0;   // column pitch, derived: node width + l_g

  /// Builds a layout with l_h derived from the device node width.
  static LayoutParams make(double l_s_um, double l_g_um, double l_v_um, const DeviceParams& device);

  /// Spacings positive, l_h consistent with the device, rows not overlapping.
  void validate(const DeviceParams& device) const;
};

struct CoreShape {
  int k1 = 0;  // outputs, physical columns
  int k2 = 0;  // inputs, physical rows
  int size() const noexcept { return k1 * k2; }
  int row_of(int index) const noexcept { return index % k2; }
  int col_of(int index) const noexcept { return index / k2; }
};

struct ArmDistances {
  double up = 0.0;
  double lo = 0.0;
};

/// Distances from aggressor j's heated arm to victim i's upper and lower
/// arms. Throws PreconditionError when i == j or an index is out of range.
ArmDistances aggressor_distances(int victim, int aggressor, bool aggressor_negative,
                                 CoreShape shape, const LayoutParams& layout);

/// Same as above from row/column offsets (aggressor minus victim).
ArmDistances arm_distances(int d_row, int d_col, bool aggressor_negative,
                           const LayoutParams& layout) noexcept;

/// Table of differential couplings gamma(d_up) - gamma(d_lo) over every
/// (row offset, column offset, aggressor sign) a core can produce.
/// Immutable after construction; safe to share between threads.
class CrosstalkKernel {
 public:
  CrosstalkKernel(CoreShape shape, const LayoutParams& layout, const GammaFit& fit);

  CoreShape shape() const noexcept { return shape_; }
  double delta_gamma(int d_row, int d_col, bool aggressor_negative) const noexcept;

  /// phases + sum_j dgamma_ij |phase_j| over aggressors with on[j] != 0.
  /// Empty `on` means every MZI is powered.
  std::vector<double> perturb(std::span<const double> phases,
                              std::span<const std::uint8_t> on = {}) const;

  /// Largest |dgamma| in the table (bounded by gamma at the smallest
  /// arm-to-arm distance in the layout).
  double max_abs_delta_gamma() const noexcept;

 private:
  std::size_t slot(int d_row, int d_col, bool negative) const noexcept;

  CoreShape shape_;
  std::vector<double> table_;
  // Same values laid out [neg][d_col][d_row] so the victim loop in perturb()
  // walks memory contiguously.
  std::vector<double> by_col_;
};

/// Signed differential coupling matrix for one phase-sign configuration.
struct CrosstalkMatrix {
  int k1 = 0;
  int k2 = 0;
  std::vector<double> delta_gamma;  // (k1*k2)^2, row = victim, col = aggressor

  double at(int victim, int aggressor) const {
    return delta_gamma[static_cast<std::size_t>(victim) * (k1 * k2) + aggressor];
  }
};

CrosstalkMatrix crosstalk_matrix(std::span<const double> phases, CoreShape shape,
                                 const LayoutParams& layout, const GammaFit& fit);

/// Crosstalk-perturbed phases of every MZI. Inputs must lie in
/// [-pi/2, pi/2]; outputs are not clamped.
std::vector<double> perturbed_phases(std::span<const double> phases, CoreShape shape,
                                     const LayoutParams& layout, const GammaFit& fit);

/// As perturbed_phases, but MZIs whose output row (row_mask, length k1) or
/// input column (col_mask, length k2) is pruned are powered off: their
/// nominal phase is 0 and they do not aggress. Every victim is still
/// computed.
std::vector<double> perturbed_phases_gated(std::span<const double> phases,
                                           std::span<const std::uint8_t> row_mask,
                                           std::span<const std::uint8_t> col_mask,
                                           CoreShape shape, const LayoutParams& layout,
                                           const GammaFit& fit);

}  // namespace sptc
