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

#include "sptc/arch_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "sptc/error.hpp"

namespace sptc {

std::string to_string(DacKind kind) { return kind == DacKind::EoDac ? "eodac" : "edac"; }

DacKind dac_kind_from_string(const std::string& name) {
  if (name == "edac") return DacKind::EDac;
  if (name == "eodac") return DacKind::EoDac;
  throw ConfigError("arch.dac_kind must be \"edac\" or \"eodac\" (got \"" + name + "\")");
}

int ArchConfig::dac_segments() const noexcept {
  return dac_kind == DacKind::EoDac ? static_cast<int>(eodac_segments.size()) : 1;
}

void ArchConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (R < 1) fail("arch.R must be >= 1");
  if (C < 1) fail("arch.C must be >= 1");
  if (k1 < 1) fail("arch.k1 must be >= 1");
  if (k2 < 1) fail("arch.k2 must be >= 1");
  if (r < 1) fail("arch.r must be >= 1");
  if (c < 1) fail("arch.c must be >= 1");
  if (!(f_ghz > 0.0) || !std::isfinite(f_ghz)) fail("arch.f_ghz must be > 0");
  if (b_in < 1) fail("arch.b_in must be >= 1");
  if (b_w < 1) fail("arch.b_w must be >= 1");
  if (b_o < 1) fail("arch.b_o must be >= 1");
  if (R % r != 0) {
    std::ostringstream os;
    os << "arch.r: input sharing groups r=" << r << " consecutive tiles, which does not divide R="
       << R;
    fail(os.str());
  }
  if (C % c != 0) {
    std::ostringstream os;
    os << "arch.c: readout sharing groups c=" << c << " cores of a tile, which does not divide C="
       << C;
    fail(os.str());
  }
  if (dac_kind == DacKind::EoDac) {
    if (eodac_segments.empty()) fail("arch.eodac_segments must not be empty");
    for (int b : eodac_segments) {
      if (b < 1) fail("arch.eodac_segments entries must be >= 1");
    }
    const int sum = std::accumulate(eodac_segments.begin(), eodac_segments.end(), 0);
    if (sum != b_in) {
      std::ostringstream os;
      os << "arch.eodac_segments sum to " << sum << " bits but arch.b_in is " << b_in;
      fail(os.str());
    }
  }
}

PowerBreakdown& PowerBreakdown::operator+=(const PowerBreakdown& o) {
  input_mw += o.input_mw;
  weight_mw += o.weight_mw;
  readout_mw += o.readout_mw;
  rerouter_mw += o.rerouter_mw;
  total_mw += o.total_mw;
  return *this;
}

double input_channel_power(const ArchConfig& config, const DeviceParams& device) {
  const double dac = config.dac_kind == DacKind::EoDac
                         ? eodac_power(config.b_in, config.eodac_segments, config.f_ghz, device)
                         : edac_power(config.b_in, config.f_ghz, device);
  return modulator_power(config.f_ghz, device) + dac;
}

double readout_channel_power(const ArchConfig& config, const DeviceParams& device) {
  return device.p_tia_mw + adc_power(config.b_o, config.f_ghz, device);
}

namespace {

struct ChunkView {
  int rows;
  int cols;
  std::span<const std::uint8_t> row_mask;
  std::span<const std::uint8_t> col_mask;
  bool per_sharer;

  bool row_on(int i) const { return row_mask.empty() || row_mask[i]; }
  // Column j as seen by the sharer holding output row i.
  bool col_on(int i, int j, int k1) const {
    if (col_mask.empty()) return true;
    if (!per_sharer) return col_mask[j];
    return col_mask[static_cast<std::size_t>(i / k1) * cols + j];
  }
  bool shared_col_on(int j) const { return col_mask.empty() || col_mask[j]; }
};

ChunkView check_chunk(const ArchConfig& config, const ChunkState& chunk) {
  const int rows = config.chunk_rows();
  const int cols = config.chunk_cols();
  if (chunk.weights.size() != static_cast<std::size_t>(rows) * cols) {
    throw PreconditionError("chunk weights must be (r k1) x (c k2)");
  }
  if (!chunk.row_mask.empty() && static_cast<int>(chunk.row_mask.size()) != rows) {
    throw PreconditionError("chunk row mask must have length r k1");
  }
  bool per_sharer = false;
  if (!chunk.col_mask.empty()) {
    if (static_cast<int>(chunk.col_mask.size()) == cols) {
      per_sharer = false;
    } else if (static_cast<int>(chunk.col_mask.size()) == config.r * cols) {
      per_sharer = true;
      for (int t = 1; t < config.r; ++t) {
        if (!std::equal(chunk.col_mask.begin(), chunk.col_mask.begin() + cols,
                        chunk.col_mask.begin() + static_cast<std::ptrdiff_t>(t) * cols)) {
          std::ostringstream os;
          os << "column mask of sharer " << t
             << " differs from sharer 0; the r PTCs sharing an input must use one column mask";
          throw ConfigError(os.str());
        }
      }
    } else {
      throw PreconditionError("chunk column mask must have length c k2 or r c k2");
    }
  }
  return {rows, cols, chunk.row_mask, chunk.col_mask, per_sharer};
}

}  // namespace

PowerBreakdown chunk_power(const ArchConfig& config, const DeviceParams& device,
                           const LayoutParams& layout, const GammaFit& fit,
                           const ChunkState& chunk, GatingPolicy policy) {
  const ChunkView v = check_chunk(config, chunk);
  const bool ig = policy.mode != ExecutionMode::PruneOnly;
  const bool lr = policy.mode == ExecutionMode::InputGatingRedistribution;

  PowerBreakdown p;
  const double in_ch = input_channel_power(config, device);
  for (int j = 0; j < v.cols; ++j) {
    if (ig && !v.shared_col_on(j)) continue;
    p.input_mw += in_ch;
  }

  // mzi_power is linear in |dphi|; evaluate the spacing penalty once.
  const double per_rad = mzi_power(std::numbers::pi, layout.l_s_um, device, fit) / std::numbers::pi;
  const double pd_pair = 2.0 * device.p_pd_mw;
  for (int i = 0; i < v.rows; ++i) {
    const bool row_on = v.row_on(i);
    for (int j = 0; j < v.cols; ++j) {
      const bool col_on = v.col_on(i, j, config.k1);
      if (row_on && col_on) {
        const double w = chunk.weights[static_cast<std::size_t>(i) * v.cols + j];
        p.weight_mw += std::abs(weight_to_phase(w)) * per_rad;
      }
      if (!(lr && !col_on)) p.weight_mw += pd_pair;
    }
  }

  const double out_ch = readout_channel_power(config, device);
  for (int i = 0; i < v.rows; ++i) {
    if (policy.output_gating && !v.row_on(i)) continue;
    p.readout_mw += out_ch;
  }

  if (lr) {
    std::vector<std::uint8_t> slice(config.k2, 1);
    for (int g = 0; g < config.c; ++g) {
      for (int b = 0; b < config.k2; ++b) slice[b] = v.shared_col_on(g * config.k2 + b) ? 1 : 0;
      p.rerouter_mw += rerouter_configure(slice, layout.l_s_um, device, fit).total_power_mw;
    }
  }
  p.finalize();
  return p;
}

PowerBreakdown power(const ArchConfig& config, const DeviceParams& device,
                     const LayoutParams& layout, const GammaFit& fit,
                     std::span<const ChunkState> chunks, GatingPolicy policy) {
  const int slots = config.slots();
  if (static_cast<int>(chunks.size()) > slots) {
    std::ostringstream os;
    os << chunks.size() << " chunks exceed the " << slots << " available slots";
    throw PreconditionError(os.str());
  }
  PowerBreakdown total;
  for (const auto& ch : chunks) total += chunk_power(config, device, layout, fit, ch, policy);
  const int idle = slots - static_cast<int>(chunks.size());
  if (idle > 0) {
    ChunkState empty;
    empty.weights.assign(static_cast<std::size_t>(config.chunk_rows()) * config.chunk_cols(), 0.0);
    empty.row_mask.assign(config.chunk_rows(), 0);
    empty.col_mask.assign(config.chunk_cols(), 0);
    PowerBreakdown one = chunk_power(config, device, layout, fit, empty, policy);
    one.input_mw *= idle;
    one.weight_mw *= idle;
    one.readout_mw *= idle;
    one.rerouter_mw *= idle;
    one.finalize();
    total += one;
  }
  total.finalize();
  return total;
}

double ptc_weight_area_um2(const ArchConfig& config, const DeviceParams& device,
                           const LayoutParams& layout) {
  const double length = (config.k2 - 1) * layout.l_v_um + device.node_length();
  const double width = (config.k1 - 1) * layout.l_h_um + device.node_width(layout.l_s_um);
  return length * width;
}

AreaBreakdown area(const ArchConfig& config, const DeviceParams& device,
                   const LayoutParams& layout) {
  constexpr double um2_to_mm2 = 1e-6;
  const double rc = static_cast<double>(config.R) * config.C;
  const double k1 = config.k1;
  const double k2 = config.k2;
  AreaBreakdown a;
  a.ptc_weight_mm2 = rc * ptc_weight_area_um2(config, device, layout) * um2_to_mm2;
  a.splitter_mm2 = rc * k2 * device.a_mmi_um2 * um2_to_mm2;
  a.pd_mm2 = rc * 2.0 * k1 * k2 * device.a_pd_um2 * um2_to_mm2;
  a.dac_mzm_rerouter_mm2 = rc / config.r *
                           (k2 * device.a_dac_um2 * config.dac_segments() +
                            k2 * device.a_mzm_um2 + device.a_rerouter_um2) *
                           um2_to_mm2;
  a.adc_tia_mm2 = rc / config.c * k1 * (device.a_adc_um2 + device.a_tia_um2) * um2_to_mm2;
  a.total_mm2 = a.ptc_weight_mm2 + a.splitter_mm2 + a.pd_mm2 + a.dac_mzm_rerouter_mm2 +
                a.adc_tia_mm2;
  return a;
}

int chunks_p(const LayerDims& dims, const ArchConfig& config) {
  if (dims.c_out < 1) throw PreconditionError("layer c_out must be >= 1");
  return (dims.c_out + config.chunk_rows() - 1) / config.chunk_rows();
}

int chunks_q(const LayerDims& dims, const ArchConfig& config) {
  if (dims.c_in < 1 || dims.kernel < 1) throw PreconditionError("layer c_in and kernel must be >= 1");
  const int cols = dims.c_in * dims.kernel * dims.kernel;
  return (cols + config.chunk_cols() - 1) / config.chunk_cols();
}

std::int64_t cycles_for_layer(const LayerDims& dims, const ArchConfig& config) {
  if (dims.n_vectors < 0) throw PreconditionError("layer n_vectors must be >= 0");
  return static_cast<std::int64_t>(chunks_p(dims, config)) * chunks_q(dims, config) *
         dims.n_vectors;
}

std::vector<ScheduleEntry> layer_schedule(const std::string& layer, const LayerDims& dims,
                                          std::span<const ChunkState> chunks,
                                          const ArchConfig& config, const DeviceParams& device,
                                          const LayoutParams& layout, const GammaFit& fit,
                                          GatingPolicy policy) {
  const std::size_t expected = static_cast<std::size_t>(chunks_p(dims, config)) * chunks_q(dims, config);
  if (chunks.size() != expected) {
    std::ostringstream os;
    os << "layer " << layer << ": expected " << expected << " chunks, got " << chunks.size();
    throw PreconditionError(os.str());
  }
  const std::size_t slots = static_cast<std::size_t>(config.slots());
  std::vector<ScheduleEntry> out;
  for (std::size_t start = 0, wave = 0; start < chunks.size(); start += slots, ++wave) {
    const std::size_t n = std::min(slots, chunks.size() - start);
    ScheduleEntry e;
    e.layer = layer;
    e.wave = static_cast<int>(wave);
    // Each chunk in a wave sees every input vector once.
    e.cycles = dims.n_vectors;
    e.power = power(config, device, layout, fit, chunks.subspan(start, n), policy);
    out.push_back(std::move(e));
  }
  return out;
}

EnergyResult energy(const ArchConfig& config, std::span<const ScheduleEntry> schedule) {
  EnergyResult r;
  const double hz = config.f_ghz * 1e9;
  for (const auto& e : schedule) {
    if (e.cycles < 0) throw PreconditionError("energy: negative cycle count");
    r.total_cycles += e.cycles;
    const double s = static_cast<double>(e.cycles) / hz;
    r.e_tot_mj += e.power.total_mw * s;
    r.avg.input_mw += e.power.input_mw * static_cast<double>(e.cycles);
    r.avg.weight_mw += e.power.weight_mw * static_cast<double>(e.cycles);
    r.avg.readout_mw += e.power.readout_mw * static_cast<double>(e.cycles);
    r.avg.rerouter_mw += e.power.rerouter_mw * static_cast<double>(e.cycles);
  }
  if (r.total_cycles == 0) throw PreconditionError("energy: schedule has zero total cycles");
  const double t = static_cast<double>(r.total_cycles) / hz;
  r.p_avg_w = r.e_tot_mj * 1e-3 / t;
  const double n = static_cast<double>(r.total_cycles);
  r.avg.input_mw /= n;
  r.avg.weight_mw /= n;
  r.avg.readout_mw /= n;
  r.avg.rerouter_mw /= n;
  r.avg.finalize();
  return r;
}

double pap(double p_avg_w, double area_mm2) {
  if (!(p_avg_w > 0.0) || !(area_mm2 > 0.0)) {
    throw PreconditionError("pap: power and area must be > 0");
  }
  return p_avg_w * area_mm2;
}

}  // namespace sptc
