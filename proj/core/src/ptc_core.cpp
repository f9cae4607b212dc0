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

#include "sptc/ptc_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sptc/error.hpp"

namespace sptc {

std::string to_string(ExecutionMode mode) {
  switch (mode) {
    case ExecutionMode::PruneOnly:
      return "prune";
    case ExecutionMode::InputGating:
      return "ig";
    case ExecutionMode::InputGatingRedistribution:
      return "ig_lr";
  }
  return "prune";
}

ExecutionMode execution_mode_from_string(const std::string& name) {
  if (name == "prune") return ExecutionMode::PruneOnly;
  if (name == "ig") return ExecutionMode::InputGating;
  if (name == "ig_lr") return ExecutionMode::InputGatingRedistribution;
  throw ConfigError("execution mode must be one of prune, ig, ig_lr (got \"" + name + "\")");
}

int next_pow2(int n) {
  if (n < 1) throw PreconditionError("next_pow2: n must be >= 1");
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

double splitter_upper_fraction(double dphi) noexcept {
  const double c = std::cos((dphi + std::numbers::pi / 2) / 2);
  return c * c;
}

RerouterState rerouter_configure(std::span<const std::uint8_t> col_mask, double l_s_um,
                                 const DeviceParams& params, const GammaFit& fit) {
  if (col_mask.empty()) throw PreconditionError("rerouter_configure: empty column mask");
  RerouterState st;
  st.col_mask.assign(col_mask.begin(), col_mask.end());
  st.leaves = next_pow2(static_cast<int>(col_mask.size()));
  const int internal = st.leaves - 1;
  st.up.assign(internal, 0);
  st.lo.assign(internal, 0);
  st.node_phases.assign(internal, 0.0);

  // Active-leaf counts per heap node, bottom-up.
  std::vector<int> count(2 * st.leaves - 1, 0);
  for (int b = 0; b < static_cast<int>(col_mask.size()); ++b) {
    count[internal + b] = col_mask[b] ? 1 : 0;
  }
  for (int i = internal - 1; i >= 0; --i) {
    st.up[i] = count[2 * i + 1];
    st.lo[i] = count[2 * i + 2];
    count[i] = st.up[i] + st.lo[i];
  }
  for (int i = 0; i < internal; ++i) {
    const int total = st.up[i] + st.lo[i];
    if (total == 0) continue;
    const double ratio = static_cast<double>(st.up[i]) / total;
    st.node_phases[i] = 2.0 * std::acos(std::sqrt(ratio)) - std::numbers::pi / 2;
    st.total_power_mw += mzi_power(st.node_phases[i], l_s_um, params, fit);
  }
  return st;
}

std::vector<double> RerouterState::output_intensities(double input) const {
  const int internal = leaves - 1;
  std::vector<double> level(2 * leaves - 1, 0.0);
  level[0] = input;
  for (int i = 0; i < internal; ++i) {
    const int total = up[i] + lo[i];
    const double f = total == 0 ? 0.5 : static_cast<double>(up[i]) / total;
    level[2 * i + 1] = level[i] * f;
    level[2 * i + 2] = level[i] - level[2 * i + 1];
  }
  return {level.begin() + internal, level.begin() + internal + col_mask.size()};
}

PtcCore::PtcCore(CoreShape shape, std::span<const double> weights,
                 std::span<const std::uint8_t> row_mask, std::span<const std::uint8_t> col_mask,
                 std::shared_ptr<const CrosstalkKernel> kernel, const DeviceParams& params,
                 MvmOptions options)
    : shape_(shape), options_(options) {
  const int n = shape.size();
  if (shape.k1 < 1 || shape.k2 < 1) throw PreconditionError("PtcCore: empty core");
  if (static_cast<int>(weights.size()) != n) {
    throw PreconditionError("PtcCore: weight count does not match core shape");
  }
  if (!row_mask.empty() && static_cast<int>(row_mask.size()) != shape.k1) {
    throw PreconditionError("PtcCore: row mask length must be k1");
  }
  if (!col_mask.empty() && static_cast<int>(col_mask.size()) != shape.k2) {
    throw PreconditionError("PtcCore: column mask length must be k2");
  }
  row_on_.assign(shape.k1, 1);
  col_on_.assign(shape.k2, 1);
  if (!row_mask.empty()) std::transform(row_mask.begin(), row_mask.end(), row_on_.begin(), [](auto v) { return v ? 1 : 0; });
  if (!col_mask.empty()) std::transform(col_mask.begin(), col_mask.end(), col_on_.begin(), [](auto v) { return v ? 1 : 0; });
  active_cols_ = static_cast<int>(std::count(col_on_.begin(), col_on_.end(), 1));

  weights_.assign(n, 0.0);
  active_.assign(n, 0);
  std::vector<double> nominal(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double phase = weight_to_phase(weights[i]);  // range check on every entry
    active_[i] = row_on_[shape.col_of(i)] && col_on_[shape.row_of(i)];
    if (active_[i]) {
      weights_[i] = weights[i];
      nominal[i] = phase;
    }
  }
  if (options.crosstalk) {
    if (!kernel) throw PreconditionError("PtcCore: crosstalk enabled without a kernel");
    if (kernel->shape().k1 != shape.k1 || kernel->shape().k2 != shape.k2) {
      throw PreconditionError("PtcCore: kernel shape does not match core");
    }
    perturbed_ = kernel->perturb(nominal, active_);
  } else {
    perturbed_ = std::move(nominal);
  }

  leak_ = leakage_transmission(params);
  phase_sigma_ = params.phase_noise_sigma_rad;
  pd_sigma_ = params.pd_noise_sigma;
}

void PtcCore::mvm_accumulate(std::span<const double> x, Rng& rng, std::span<double> y) const {
  if (static_cast<int>(x.size()) != shape_.k2 || static_cast<int>(y.size()) != shape_.k1) {
    throw PreconditionError("PtcCore::mvm: vector length mismatch");
  }
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) {
      std::ostringstream os;
      os << "PtcCore::mvm: input " << v << " outside [0, 1]";
      throw DomainError(os.str());
    }
  }

  double light_on = 1.0;
  double light_off = 1.0;
  double out_scale = 1.0;
  switch (options_.mode) {
    case ExecutionMode::PruneOnly:
      break;
    case ExecutionMode::InputGating:
      light_off = leak_;
      break;
    case ExecutionMode::InputGatingRedistribution:
      light_off = 0.0;
      if (active_cols_ > 0) {
        light_on = static_cast<double>(shape_.k2) / active_cols_;
        out_scale = static_cast<double>(active_cols_) / shape_.k2;
      } else {
        out_scale = 0.0;
      }
      break;
  }

  const int k1 = shape_.k1;
  const int k2 = shape_.k2;
  for (int a = 0; a < k1; ++a) {
    double acc = 0.0;
    for (int b = 0; b < k2; ++b) {
      const int i = a * k2 + b;
      const double n_phi = rng.normal() * phase_sigma_;
      const double n_pd = rng.normal() * pd_sigma_;
      double w = -std::sin(perturbed_[i] + n_phi);
      if (!active_[i]) w = std::copysign(std::max(std::abs(w), leak_), w);
      acc += w * x[b] * (col_on_[b] ? light_on : light_off) + n_pd;
    }
    if (options_.output_gating && !row_on_[a]) continue;
    y[a] += out_scale * acc;
  }
}

std::vector<double> PtcCore::mvm(std::span<const double> x, Rng& rng) const {
  std::vector<double> y(shape_.k1, 0.0);
  mvm_accumulate(x, rng, y);
  return y;
}

std::vector<double> PtcCore::ideal(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != shape_.k2) {
    throw PreconditionError("PtcCore::ideal: vector length mismatch");
  }
  std::vector<double> y(shape_.k1, 0.0);
  for (int a = 0; a < shape_.k1; ++a) {
    double acc = 0.0;
    for (int b = 0; b < shape_.k2; ++b) acc += weights_[a * shape_.k2 + b] * x[b];
    y[a] = acc;
  }
  return y;
}

std::vector<double> simulate_mvm(std::span<const double> x, std::span<const double> weights,
                                 CoreShape shape, std::span<const std::uint8_t> row_mask,
                                 std::span<const std::uint8_t> col_mask, MvmOptions options,
                                 const LayoutParams& layout, const DeviceParams& params,
                                 const GammaFit& fit, std::uint64_t rng_seed) {
  std::shared_ptr<const CrosstalkKernel> kernel;
  if (options.crosstalk) kernel = std::make_shared<CrosstalkKernel>(shape, layout, fit);
  PtcCore core(shape, weights, row_mask, col_mask, std::move(kernel), params, options);
  Rng rng(rng_seed);
  return core.mvm(x, rng);
}

double nmae(std::span<const double> y_noisy, std::span<const double> y_ideal) {
  if (y_noisy.size() != y_ideal.size()) throw PreconditionError("nmae: length mismatch");
  if (y_ideal.empty()) throw PreconditionError("nmae: empty vectors");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < y_ideal.size(); ++i) {
    num += std::abs(y_noisy[i] - y_ideal[i]);
    den += std::abs(y_ideal[i]);
  }
  if (den == 0.0) throw DomainError("nmae: reference vector is all zero");
  return num / den;
}

double snr_gain_db(int k2, int k2_active) {
  if (k2 < 1 || k2_active < 1 || k2_active > k2) {
    throw PreconditionError("snr_gain_db: need 1 <= k2' <= k2");
  }
  return 10.0 * std::log10(static_cast<double>(k2) / k2_active);
}

}  // namespace sptc
