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

#include "sptc/device_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "sptc/error.hpp"

namespace sptc {

namespace {

void require_finite_nonneg(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    std::ostringstream os;
    os << "device." << name << " must be finite and >= 0 (got " << v << ")";
    throw ConfigError(os.str());
  }
}

}  // namespace

ConfigErrorList::ConfigErrorList(std::vector<std::string> errors)
    : ConfigError([&] {
        std::string joined;
        for (const auto& e : errors) {
          if (!joined.empty()) joined += "; ";
          joined += e;
        }
        return joined;
      }()),
      errors_(std::move(errors)) {}

std::string to_string(MziType type) {
  return type == MziType::Foundry ? "foundry" : "lp";
}

MziType mzi_type_from_string(const std::string& name) {
  if (name == "lp") return MziType::LowPower;
  if (name == "foundry") return MziType::Foundry;
  throw ConfigError("device.mzi_type must be \"lp\" or \"foundry\" (got \"" + name + "\")");
}

double DeviceParams::p_pi() const noexcept {
  return mzi_type == MziType::Foundry ? foundry_p_pi_mw : p_pi_mw;
}

double DeviceParams::node_length() const noexcept {
  return mzi_type == MziType::Foundry ? foundry_mzi_length_um : node_length_um;
}

double DeviceParams::node_width(double arm_spacing_um) const noexcept {
  return mzi_type == MziType::Foundry ? foundry_mzi_width_um : arm_spacing_um + ps_width_um;
}

void DeviceParams::validate() const {
  require_finite_nonneg(p_pi_mw, "p_pi_mw");
  require_finite_nonneg(foundry_p_pi_mw, "foundry_p_pi_mw");
  require_finite_nonneg(ps_width_um, "ps_width_um");
  require_finite_nonneg(node_length_um, "node_length_um");
  require_finite_nonneg(foundry_mzi_length_um, "foundry_mzi_length_um");
  require_finite_nonneg(foundry_mzi_width_um, "foundry_mzi_width_um");
  require_finite_nonneg(p0_edac_mw, "p0_edac_mw");
  require_finite_nonneg(p0_adc_mw_per_bit_ghz, "p0_adc_mw_per_bit_ghz");
  require_finite_nonneg(p_mod_static_mw, "p_mod_static_mw");
  require_finite_nonneg(e_mod_pj, "e_mod_pj");
  require_finite_nonneg(p_pd_mw, "p_pd_mw");
  require_finite_nonneg(p_tia_mw, "p_tia_mw");
  require_finite_nonneg(pd_noise_sigma, "pd_noise_sigma");
  require_finite_nonneg(phase_noise_sigma_rad, "phase_noise_sigma_rad");
  require_finite_nonneg(a_mmi_um2, "a_mmi_um2");
  require_finite_nonneg(a_pd_um2, "a_pd_um2");
  require_finite_nonneg(a_dac_um2, "a_dac_um2");
  require_finite_nonneg(a_mzm_um2, "a_mzm_um2");
  require_finite_nonneg(a_rerouter_um2, "a_rerouter_um2");
  require_finite_nonneg(a_adc_um2, "a_adc_um2");
  require_finite_nonneg(a_tia_um2, "a_tia_um2");
  if (!(extinction_ratio_db > 0.0) || std::isnan(extinction_ratio_db)) {
    throw ConfigError("device.extinction_ratio_db must be > 0");
  }
}

GammaFit::GammaFit()
    : GammaFit({1.0, -1.76e-1, 9.9e-3, -8.30e-6, -1.56e-5, 3.55e-7}, {0.217, 0.127}, 23.0) {}

GammaFit::GammaFit(std::array<double, 6> poly, std::array<double, 2> exp_coeffs,
                   double breakpoint_um)
    : poly_(poly), exp_(exp_coeffs), breakpoint_(breakpoint_um) {
  const double gap = std::abs(poly_branch(breakpoint_) - exp_branch(breakpoint_));
  if (!(gap < kContinuityTolerance)) {
    std::ostringstream os;
    os << "gamma fit is discontinuous at " << breakpoint_ << " um (|poly - exp| = " << gap
       << ")";
    throw ConfigError(os.str());
  }
}

double GammaFit::poly_branch(double d) const noexcept {
  double acc = 0.0;
  for (auto it = poly_.rbegin(); it != poly_.rend(); ++it) acc = acc * d + *it;
  return acc;
}

double GammaFit::exp_branch(double d) const noexcept { return exp_[0] * std::exp(-exp_[1] * d); }

double GammaFit::operator()(double d) const noexcept {
  const double tail = exp_branch(d);
  if (d >= breakpoint_) return tail;
  return std::max(poly_branch(d), tail);
}

double gamma(double d_um, const GammaFit& fit) {
  if (!(d_um >= 0.0)) throw DomainError("gamma: distance must be >= 0");
  return fit(d_um);
}

double weight_to_phase(double w) {
  if (!(std::abs(w) <= 1.0)) {
    std::ostringstream os;
    os << "weight_to_phase: |w| must be <= 1 (got " << w << ")";
    throw DomainError(os.str());
  }
  return -std::asin(w);
}

double phase_to_weight(double dphi) noexcept { return -std::sin(dphi); }

double mzi_power(double dphi, double arm_spacing_um, const DeviceParams& params,
                 const GammaFit& fit) {
  const double base = std::abs(dphi) / std::numbers::pi * params.p_pi();
  if (params.mzi_type == MziType::Foundry) return base;
  if (!(arm_spacing_um > 0.0)) throw ConfigError("mzi_power: arm spacing must be > 0");
  const double g = fit(arm_spacing_um);
  if (g >= 1.0) {
    std::ostringstream os;
    os << "arm spacing " << arm_spacing_um << " um is too small: gamma = " << g << " >= 1";
    throw ConfigError(os.str());
  }
  return base / (1.0 - g);
}

double edac_power(int bits, double f_ghz, const DeviceParams& params) {
  if (bits < 1) throw PreconditionError("edac_power: bits must be >= 1");
  if (!(f_ghz > 0.0)) throw PreconditionError("edac_power: frequency must be > 0");
  return params.p0_edac_mw * std::ldexp(1.0, bits) / (bits + 1) * f_ghz;
}

double eodac_power(int total_bits, std::span<const int> segment_bits, double f_ghz,
                   const DeviceParams& params) {
  if (segment_bits.empty()) throw ConfigError("eoDAC needs at least one segment");
  for (int b : segment_bits) {
    if (b < 1) throw ConfigError("eoDAC segments must have >= 1 bit each");
  }
  const int sum = std::accumulate(segment_bits.begin(), segment_bits.end(), 0);
  if (sum != total_bits) {
    std::ostringstream os;
    os << "eoDAC segments sum to " << sum << " bits, expected " << total_bits;
    throw ConfigError(os.str());
  }
  double p = 0.0;
  for (int b : segment_bits) p += edac_power(b, f_ghz, params);
  return p;
}

double adc_power(int bits, double f_ghz, const DeviceParams& params) {
  if (bits < 1) throw PreconditionError("adc_power: bits must be >= 1");
  if (!(f_ghz > 0.0)) throw PreconditionError("adc_power: frequency must be > 0");
  return params.p0_adc_mw_per_bit_ghz * bits * f_ghz;
}

double modulator_power(double f_ghz, const DeviceParams& params) noexcept {
  return params.p_mod_static_mw + params.e_mod_pj * f_ghz;
}

double leakage_transmission(const DeviceParams& params) {
  if (!(params.extinction_ratio_db > 0.0)) {
    throw ConfigError("extinction ratio must be > 0 dB");
  }
  return std::pow(10.0, -params.extinction_ratio_db / 10.0);
}

double node_area_um2(double arm_spacing_um, const DeviceParams& params) noexcept {
  return params.node_width(arm_spacing_um) * params.node_length();
}

}  // namespace sptc
