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
 * @file arch_model.hpp
 * @brief Power, area and energy accounting for an R-tile x C-core
 * accelerator with input sharing r and readout sharing c.
 *
 * Grouping: a "slot" is r tiles x c cores that jointly hold one
 * (r k1) x (c k2) weight chunk. The r cores stacked along the output axis
 * (one per tile, consecutive tiles) share the c k2 input channels; the c
 * cores side by side within a tile share the r k1 readout channels of that
 * tile. There are R C / (r c) slots, and r must divide R and c must divide C.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sptc/device_models.hpp"
#include "sptc/layout_crosstalk.hpp"
#include "sptc/ptc_core.hpp"

namespace sptc {

enum class DacKind { EDac, EoDac };

std::string to_string(DacKind kind);
DacKind dac_kind_from_string(const std::string& name);

struct ArchConfig {
  int R = 4;
  int C = 4;
  int k1 = 16;
  int k2 = 16;
  int r = 4;
  int c = 4;
  double f_ghz = 5.0;
  int b_in = 6;
  int b_w = 8;
  int b_o = 8;
  DacKind dac_kind = DacKind::EDac;
  std::vector<int> eodac_segments{3, 3};  // used when dac_kind == EoDac

  int slots() const noexcept { return (R / r) * (C / c); }
  int chunk_rows() const noexcept { return r * k1; }
  int chunk_cols() const noexcept { return c * k2; }
  int dac_segments() const noexcept;

  /// Throws ConfigError (path-qualified) on bad counts, bits, clock,
  /// grouping or eoDAC segmentation.
  void validate() const;
};

struct PowerBreakdown {
  double input_mw = 0.0;
  double weight_mw = 0.0;
  double readout_mw = 0.0;
  double rerouter_mw = 0.0;
  double total_mw = 0.0;

  PowerBreakdown& operator+=(const PowerBreakdown& o);
  void finalize() { total_mw = input_mw + weight_mw + readout_mw + rerouter_mw; }
};

struct AreaBreakdown {
  double ptc_weight_mm2 = 0.0;
  double splitter_mm2 = 0.0;
  double pd_mm2 = 0.0;
  double dac_mzm_rerouter_mm2 = 0.0;
  double adc_tia_mm2 = 0.0;
  double total_mm2 = 0.0;
};

/// One (r k1) x (c k2) chunk mapped on a slot.
struct ChunkState {
  std::vector<double> weights;     // r k1 x c k2 row-major, entries in [-1, 1]
  std::vector<std::uint8_t> row_mask;  // r k1; empty = dense
  /// c k2 (shared by the r sharers) or r c k2 (one c k2 slice per sharer,
  /// which must agree). Empty = dense.
  std::vector<std::uint8_t> col_mask;
};

struct GatingPolicy {
  ExecutionMode mode = ExecutionMode::PruneOnly;
  bool output_gating = false;
};

/// Input-channel cost of one ungated channel: P_mod + P_DAC.
double input_channel_power(const ArchConfig& config, const DeviceParams& device);
/// Readout cost of one ungated row: P_TIA + P_ADC.
double readout_channel_power(const ArchConfig& config, const DeviceParams& device);

/// Power drawn by one slot while it processes `chunk`.
///   input    c k2 channels, each gated off under IG / IG+LR when its column is pruned
///   weight   mzi_power of every unpruned node + 2 P_PD per node; PDs of
///            pruned columns are off under IG+LR (no light reaches them)
///   readout  r k1 rows, each gated off under output gating when pruned
///   rerouter c trees under IG+LR, configured by the column mask
PowerBreakdown chunk_power(const ArchConfig& config, const DeviceParams& device,
                           const LayoutParams& layout, const GammaFit& fit,
                           const ChunkState& chunk, GatingPolicy policy);

/// Whole-accelerator power with `chunks` mapped on the first slots. Idle
/// slots count as fully pruned chunks. More chunks than slots is an error.
PowerBreakdown power(const ArchConfig& config, const DeviceParams& device,
                     const LayoutParams& layout, const GammaFit& fit,
                     std::span<const ChunkState> chunks, GatingPolicy policy);

/// Footprint of one k1 x k2 weight array, um^2.
double ptc_weight_area_um2(const ArchConfig& config, const DeviceParams& device,
                           const LayoutParams& layout);

AreaBreakdown area(const ArchConfig& config, const DeviceParams& device,
                   const LayoutParams& layout);

struct LayerDims {
  int c_out = 1;
  int c_in = 1;
  int kernel = 1;                // K, square
  std::int64_t n_vectors = 1;    // im2col input columns per inference
};

/// p = ceil(C_o / (r k1)), q = ceil(C_i K^2 / (c k2)).
int chunks_p(const LayerDims& dims, const ArchConfig& config);
int chunks_q(const LayerDims& dims, const ArchConfig& config);

/// p q n_vectors, independent of sparsity.
std::int64_t cycles_for_layer(const LayerDims& dims, const ArchConfig& config);

struct ScheduleEntry {
  std::string layer;
  int wave = 0;              // group of chunks mapped concurrently
  std::int64_t cycles = 0;
  PowerBreakdown power;      // whole accelerator during this wave
};

/// Maps the chunks of one layer onto the slots in waves of config.slots()
/// chunks; each wave holds its chunks for n_vectors cycles.
std::vector<ScheduleEntry> layer_schedule(const std::string& layer, const LayerDims& dims,
                                          std::span<const ChunkState> chunks,
                                          const ArchConfig& config, const DeviceParams& device,
                                          const LayoutParams& layout, const GammaFit& fit,
                                          GatingPolicy policy);

struct EnergyResult {
  double e_tot_mj = 0.0;
  double p_avg_w = 0.0;
  std::int64_t total_cycles = 0;
  PowerBreakdown avg;  // cycle-weighted average breakdown, mW
};

/// E = sum P cycles / f and P_avg = E / (cycles / f). Zero total cycles or
/// negative cycles throw PreconditionError.
EnergyResult energy(const ArchConfig& config, std::span<const ScheduleEntry> schedule);

/// Power-area product, W x mm^2. Both arguments must be > 0.
double pap(double p_avg_w, double area_mm2);

}  // namespace sptc
