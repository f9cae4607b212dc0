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
 * @file device_models.hpp
 * @brief Closed-form device models for the photonic tensor core.
 *
 * Thermal coupling coefficient gamma(d), thermo-optic MZI heater power,
 * the MZI phase <-> weight transfer, modulator extinction-ratio leakage and
 * electronic / hybrid electro-optic DAC and ADC power.
 *
 * Units: lengths in micrometers, power in milliwatts, frequency in GHz,
 * energy in picojoules (pJ * GHz = mW).
 */

#pragma once

#include <array>
#include <span>
#include <string>

namespace sptc {

enum class MziType { LowPower, Foundry };

std::string to_string(MziType type);
MziType mzi_type_from_string(const std::string& name);

struct DeviceParams {
  MziType mzi_type = MziType::LowPower;

  double p_pi_mw = 15.0;           // LP-MZI pi-shift power, crosstalk free
  double foundry_p_pi_mw = 30.0;
  double ps_width_um = 6.0;        // phase shifter width
  double node_length_um = 115.0;   // Y-branch + phase shifter + coupler
  double foundry_mzi_length_um = 550.0;
  double foundry_mzi_width_um = 156.25;

  // Electronic unit costs. These are placeholders; every value is a config
  // input (see configs/ for calibrated sets).
  double p0_edac_mw = 1.0;             // mW per GHz at 2^b/(b+1) == 1
  double p0_adc_mw_per_bit_ghz = 1.0;
  double p_mod_static_mw = 0.5;
  double e_mod_pj = 0.5;
  double p_pd_mw = 0.1;
  double p_tia_mw = 3.0;

  double extinction_ratio_db = 20.0;
  double pd_noise_sigma = 0.01;
  double phase_noise_sigma_rad = 0.01;

  // Unit areas, um^2.
  double a_mmi_um2 = 300.0;
  double a_pd_um2 = 100.0;
  double a_dac_um2 = 11000.0;
  double a_mzm_um2 = 1000.0;
  double a_rerouter_um2 = 20000.0;
  double a_adc_um2 = 20000.0;
  double a_tia_um2 = 500.0;

  /// P_pi of the selected MZI type.
  double p_pi() const noexcept;
  /// Length of one crossbar node along the light path.
  double node_length() const noexcept;
  /// Width of one crossbar node: l_s + w_PS, or the fixed foundry width.
  double node_width(double arm_spacing_um) const noexcept;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Piecewise thermal coupling fit: 5th-order polynomial below the
/// breakpoint, exponential tail above it.
///
/// The published polynomial coefficients turn upward a little before the
/// breakpoint (minimum near 22.2 um) and sit below the exponential branch
/// from roughly 18.85 um on. Below the breakpoint the coefficient is
/// floored by the exponential tail so that gamma(d) stays non-increasing;
/// the raw branches remain available through poly_branch()/exp_branch().
class GammaFit {
 public:
  static constexpr double kContinuityTolerance = 5e-3;

  /// Published coefficients.
  GammaFit();
  /// Throws ConfigError when the raw branches disagree at the breakpoint by
  /// more than kContinuityTolerance.
  GammaFit(std::array<double, 6> poly, std::array<double, 2> exp_coeffs, double breakpoint_um);

  double operator()(double d_um) const noexcept;
  double poly_branch(double d_um) const noexcept;
  double exp_branch(double d_um) const noexcept;

  const std::array<double, 6>& poly_coeffs() const noexcept { return poly_; }
  const std::array<double, 2>& exp_coeffs() const noexcept { return exp_; }
  double breakpoint_um() const noexcept { return breakpoint_; }

 private:
  std::array<double, 6> poly_;
  std::array<double, 2> exp_;
  double breakpoint_;
};

/// Coupling coefficient at center distance d (um). Requires d >= 0.
double gamma(double d_um, const GammaFit& fit);

/// Arm phase difference realizing weight w: -asin(w). |w| > 1 throws DomainError.
double weight_to_phase(double w);

/// Differential BPD transfer 2cos^2((dphi + pi/2)/2) - 1, evaluated as
/// -sin(dphi) so that the bias point maps to exactly zero.
double phase_to_weight(double dphi) noexcept;

/// Heater power for |dphi| with intra-MZI arm spacing l_s:
/// (|dphi|/pi) * P_pi / (1 - gamma(l_s)). Foundry devices carry no
/// spacing penalty. Throws ConfigError when gamma(l_s) >= 1.
double mzi_power(double dphi, double arm_spacing_um, const DeviceParams& params,
                 const GammaFit& fit);

/// P0 * 2^b / (b + 1) * f.
double edac_power(int bits, double f_ghz, const DeviceParams& params);

/// Sum of per-segment eDAC powers for a binary-weighted segmented modulator.
/// Segment bits must add up to total_bits, each at least 1.
double eodac_power(int total_bits, std::span<const int> segment_bits, double f_ghz,
                   const DeviceParams& params);

/// P0 * b * f.
double adc_power(int bits, double f_ghz, const DeviceParams& params);

/// Static + dynamic modulator power at clock f.
double modulator_power(double f_ghz, const DeviceParams& params) noexcept;

/// Minimum normalized transmission of a gated modulator: 10^(-ER/10).
double leakage_transmission(const DeviceParams& params);

/// Footprint of one crossbar node (um^2).
double node_area_um2(double arm_spacing_um, const DeviceParams& params) noexcept;

}  // namespace sptc
