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
 * @file ptc_core.hpp
 * @brief Noisy sparse MVM on one k1 x k2 photonic tensor core, plus the
 * input light rerouter (binary MZI splitter tree).
 *
 * Noise model per MVM, drawn in row-major node order (a, b), two standard
 * normals per node: phase noise (phase_noise_sigma_rad) and photodetector
 * noise (pd_noise_sigma). An active node realizes w = -sin(phi~ + n_phi);
 * a pruned node sits at nominal phase 0 and leaks
 * dw = sign * max(|-sin(phi~ + n_phi)|, 10^(-ER/10)).
 *
 * Light reaching input column b:
 *   PruneOnly                 x_b
 *   InputGating               x_b, or 10^(-ER/10) x_b on pruned columns
 *   InputGatingRedistribution x_b k2/k2' on active columns, 0 on pruned,
 *                             and the TIA gain scales the row by k2'/k2
 *
 * Output gating turns off TIA/ADC on pruned rows, which then read exactly 0.
 */

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sptc/device_models.hpp"
#include "sptc/layout_crosstalk.hpp"
#include "sptc/rng.hpp"

namespace sptc {

enum class ExecutionMode { PruneOnly, InputGating, InputGatingRedistribution };

/// "prune", "ig", "ig_lr".
std::string to_string(ExecutionMode mode);
ExecutionMode execution_mode_from_string(const std::string& name);

struct MvmOptions {
  ExecutionMode mode = ExecutionMode::PruneOnly;
  bool output_gating = false;
  bool crosstalk = true;  // false models a crosstalk-free mapping
};

/// Smallest power of two >= n (n >= 1).
int next_pow2(int n);

struct RerouterState {
  std::vector<std::uint8_t> col_mask;  // length k2, as configured
  int leaves = 0;                      // padded to a power of two
  // Heap order, root at 0, children 2i+1 (upper half) and 2i+2 (lower half).
  std::vector<int> up;
  std::vector<int> lo;
  std::vector<double> node_phases;
  double total_power_mw = 0.0;

  int root_up() const { return up.empty() ? 0 : up.front(); }
  int root_lo() const { return lo.empty() ? 0 : lo.front(); }

  /// Intensity at each of the k2 output ports for a given input intensity.
  /// Splits follow the configured ratios exactly; a node with no active leaf
  /// below it sits at the bias point and splits evenly.
  std::vector<double> output_intensities(double input = 1.0) const;
};

/// Upper-port power fraction of a splitter node at phase dphi:
/// cos^2((dphi + pi/2) / 2).
double splitter_upper_fraction(double dphi) noexcept;

/// Configures the tree for a column mask. Node phase is
/// 2 arccos(sqrt(up / (up + lo))) - pi/2, or 0 when up + lo = 0; power is
/// the sum of mzi_power over nodes.
RerouterState rerouter_configure(std::span<const std::uint8_t> col_mask, double l_s_um,
                                 const DeviceParams& params, const GammaFit& fit);

/// One configured core: target weights, masks and crosstalk-perturbed
/// phases are fixed at construction; mvm() only draws noise.
class PtcCore {
 public:
  /// weights: k1*k2 row-major in [-1, 1]. row_mask length k1, col_mask
  /// length k2 ({0,1}); empty masks mean dense. `kernel` may be shared
  /// between cores of the same shape and layout.
  PtcCore(CoreShape shape, std::span<const double> weights,
          std::span<const std::uint8_t> row_mask, std::span<const std::uint8_t> col_mask,
          std::shared_ptr<const CrosstalkKernel> kernel, const DeviceParams& params,
          MvmOptions options);

  CoreShape shape() const noexcept { return shape_; }
  int active_columns() const noexcept { return active_cols_; }
  const std::vector<double>& perturbed() const noexcept { return perturbed_; }
  const MvmOptions& options() const noexcept { return options_; }
  /// Switches the light/readout gating without re-solving crosstalk (the
  /// perturbed phases depend on the masks only).
  void set_gating(ExecutionMode mode, bool output_gating) noexcept {
    options_.mode = mode;
    options_.output_gating = output_gating;
  }

  /// Noisy product; x has length k2, entries in [0, 1].
  std::vector<double> mvm(std::span<const double> x, Rng& rng) const;

  /// Accumulating variant: y[a] += result[a]. y has length k1.
  void mvm_accumulate(std::span<const double> x, Rng& rng, std::span<double> y) const;

  /// Noise-free masked product sum_b W[a][b] m[a][b] x[b].
  std::vector<double> ideal(std::span<const double> x) const;

 private:
  CoreShape shape_;
  MvmOptions options_;
  std::vector<double> weights_;        // masked targets
  std::vector<std::uint8_t> active_;   // per node
  std::vector<std::uint8_t> row_on_;   // per output
  std::vector<std::uint8_t> col_on_;   // per input
  std::vector<double> perturbed_;      // phi~ per node
  int active_cols_ = 0;
  double leak_ = 0.0;
  double phase_sigma_ = 0.0;
  double pd_sigma_ = 0.0;
};

/// Single-shot convenience wrapper: builds a PtcCore and runs one MVM with
/// Rng(rng_seed). Throws DomainError for |W| > 1 or x outside [0, 1].
std::vector<double> simulate_mvm(std::span<const double> x, std::span<const double> weights,
                                 CoreShape shape, std::span<const std::uint8_t> row_mask,
                                 std::span<const std::uint8_t> col_mask, MvmOptions options,
                                 const LayoutParams& layout, const DeviceParams& params,
                                 const GammaFit& fit, std::uint64_t rng_seed);

/// mean|y_noisy - y_ideal| / mean|y_ideal|.
double nmae(std::span<const double> y_noisy, std::span<const double> y_ideal);

/// SNR gain of redistribution over an even split in dB, photocurrent
/// convention: 10 log10(sigma_even / sigma_lr) = 10 log10(k2 / k2').
double snr_gain_db(int k2, int k2_active);

}  // namespace sptc
