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

#include "sptc/layout_crosstalk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sptc/error.hpp"

namespace sptc {

LayoutParams LayoutParams::make(double l_s_um, double l_g_um, double l_v_um,
                                const DeviceParams& device) {
  LayoutParams p;
  p.l_s_um = l_s_um;
  p.l_g_um = l_g_um;
  p.l_v_um = l_v_um;
  p.l_h_um = device.node_width(l_s_um) + l_g_um;
  return p;
}

void LayoutParams::validate(const DeviceParams& device) const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "layout." << key << " must be > 0 (got " << v << ")";
      throw ConfigError(os.str());
    }
  };
  positive(l_s_um, "l_s_um");
  positive(l_g_um, "l_g_um");
  positive(l_v_um, "l_v_um");
  positive(l_h_um, "l_h_um");
  const double expected = device.node_width(l_s_um) + l_g_um;
  if (std::abs(l_h_um - expected) > 1e-9 * std::max(1.0, expected)) {
    std::ostringstream os;
    os << "layout.l_h_um (" << l_h_um << ") must equal node width + l_g = " << expected;
    throw ConfigError(os.str());
  }
  if (l_v_um < device.node_length()) {
    std::ostringstream os;
    os << "layout.l_v_um (" << l_v_um << ") is smaller than the MZI length "
       << device.node_length();
    throw ConfigError(os.str());
  }
}

ArmDistances arm_distances(int d_row, int d_col, bool aggressor_negative,
                           const LayoutParams& layout) noexcept {
  const double dy = d_row * layout.l_v_um;
  const double dx = d_col * layout.l_h_um;
  const double dx_up = dx - (aggressor_negative ? layout.l_s_um : 0.0);
  const double dx_lo = dx + (aggressor_negative ? 0.0 : layout.l_s_um);
  return {std::hypot(dy, dx_up), std::hypot(dy, dx_lo)};
}

ArmDistances aggressor_distances(int victim, int aggressor, bool aggressor_negative,
                                 CoreShape shape, const LayoutParams& layout) {
  if (victim == aggressor) throw PreconditionError("aggressor_distances: victim == aggressor");
  if (victim < 0 || aggressor < 0 || victim >= shape.size() || aggressor >= shape.size()) {
    throw PreconditionError("aggressor_distances: index out of range");
  }
  return arm_distances(shape.row_of(aggressor) - shape.row_of(victim),
                       shape.col_of(aggressor) - shape.col_of(victim), aggressor_negative,
                       layout);
}

CrosstalkKernel::CrosstalkKernel(CoreShape shape, const LayoutParams& layout,
                                 const GammaFit& fit)
    : shape_(shape) {
  if (shape.k1 < 1 || shape.k2 < 1) throw PreconditionError("CrosstalkKernel: empty core");
  table_.resize(static_cast<std::size_t>(2 * shape.k2 - 1) * (2 * shape.k1 - 1) * 2, 0.0);
  for (int dr = -(shape.k2 - 1); dr < shape.k2; ++dr) {
    for (int dc = -(shape.k1 - 1); dc < shape.k1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      for (int neg = 0; neg < 2; ++neg) {
        const auto d = arm_distances(dr, dc, neg != 0, layout);
        table_[slot(dr, dc, neg != 0)] = fit(d.up) - fit(d.lo);
      }
    }
  }
  by_col_.resize(table_.size());
  for (int neg = 0; neg < 2; ++neg) {
    for (int dc = -(shape.k1 - 1); dc < shape.k1; ++dc) {
      for (int dr = -(shape.k2 - 1); dr < shape.k2; ++dr) {
        by_col_[(static_cast<std::size_t>(neg) * (2 * shape.k1 - 1) + (dc + shape.k1 - 1)) *
                    (2 * shape.k2 - 1) + (dr + shape.k2 - 1)] = table_[slot(dr, dc, neg != 0)];
      }
    }
  }
}

std::size_t CrosstalkKernel::slot(int d_row, int d_col, bool negative) const noexcept {
  const std::size_t r = static_cast<std::size_t>(d_row + shape_.k2 - 1);
  const std::size_t c = static_cast<std::size_t>(d_col + shape_.k1 - 1);
  return ((r * (2 * shape_.k1 - 1)) + c) * 2 + (negative ? 1 : 0);
}

double CrosstalkKernel::delta_gamma(int d_row, int d_col, bool aggressor_negative) const noexcept {
  return table_[slot(d_row, d_col, aggressor_negative)];
}

double CrosstalkKernel::max_abs_delta_gamma() const noexcept {
  double m = 0.0;
  for (double v : table_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> CrosstalkKernel::perturb(std::span<const double> phases,
                                             std::span<const std::uint8_t> on) const {
  const int n = shape_.size();
  const int k1 = shape_.k1;
  const int k2 = shape_.k2;
  if (static_cast<int>(phases.size()) != n) {
    throw PreconditionError("CrosstalkKernel::perturb: phase count does not match core");
  }
  if (!on.empty() && static_cast<int>(on.size()) != n) {
    throw PreconditionError("CrosstalkKernel::perturb: power mask does not match core");
  }
  std::vector<double> out(phases.begin(), phases.end());
  for (int j = 0; j < n; ++j) {
    if (!on.empty() && !on[j]) continue;
    const double mag = std::abs(phases[j]);
    if (mag == 0.0) continue;
    const int neg = phases[j] < 0.0 ? 1 : 0;
    const int rj = shape_.row_of(j);
    const int cj = shape_.col_of(j);
    // The (0, 0) entry is zero, so the aggressor itself is left unchanged.
    for (int ci = 0; ci < k1; ++ci) {
      const double* t = &by_col_[(static_cast<std::size_t>(neg) * (2 * k1 - 1) + (cj - ci + k1 - 1)) *
                                     (2 * k2 - 1) + (rj + k2 - 1)];
      double* o = &out[static_cast<std::size_t>(ci) * k2];
      for (int ri = 0; ri < k2; ++ri) o[ri] += t[-ri] * mag;
    }
  }
  return out;
}

CrosstalkMatrix crosstalk_matrix(std::span<const double> phases, CoreShape shape,
                                 const LayoutParams& layout, const GammaFit& fit) {
  const int n = shape.size();
  if (static_cast<int>(phases.size()) != n) {
    throw PreconditionError("crosstalk_matrix: phase count does not match core");
  }
  CrosstalkKernel kernel(shape, layout, fit);
  CrosstalkMatrix m{shape.k1, shape.k2, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      m.delta_gamma[static_cast<std::size_t>(i) * n + j] =
          kernel.delta_gamma(shape.row_of(j) - shape.row_of(i), shape.col_of(j) - shape.col_of(i),
                             phases[j] < 0.0);
    }
  }
  return m;
}

namespace {

void check_phase_range(std::span<const double> phases) {
  constexpr double half_pi = std::numbers::pi / 2;
  for (double p : phases) {
    if (!(std::abs(p) <= half_pi + 1e-12)) {
      std::ostringstream os;
      os << "target phase " << p << " outside [-pi/2, pi/2]";
      throw DomainError(os.str());
    }
  }
}

}  // namespace

std::vector<double> perturbed_phases(std::span<const double> phases, CoreShape shape,
                                     const LayoutParams& layout, const GammaFit& fit) {
  check_phase_range(phases);
  return CrosstalkKernel(shape, layout, fit).perturb(phases);
}

std::vector<double> perturbed_phases_gated(std::span<const double> phases,
                                           std::span<const std::uint8_t> row_mask,
                                           std::span<const std::uint8_t> col_mask,
                                           CoreShape shape, const LayoutParams& layout,
                                           const GammaFit& fit) {
  if (static_cast<int>(row_mask.size()) != shape.k1 ||
      static_cast<int>(col_mask.size()) != shape.k2 ||
      static_cast<int>(phases.size()) != shape.size()) {
    throw PreconditionError("perturbed_phases_gated: mask or phase shape mismatch");
  }
  check_phase_range(phases);
  std::vector<double> nominal(phases.begin(), phases.end());
  std::vector<std::uint8_t> on(nominal.size(), 0);
  for (int i = 0; i < shape.size(); ++i) {
    on[i] = (row_mask[shape.col_of(i)] && col_mask[shape.row_of(i)]) ? 1 : 0;
    if (!on[i]) nominal[i] = 0.0;
  }
  return CrosstalkKernel(shape, layout, fit).perturb(nominal, on);
}

}  // namespace sptc
