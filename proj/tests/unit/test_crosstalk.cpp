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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

#include "sptc/error.hpp"
#include "sptc/layout_crosstalk.hpp"
#include "test_support.hpp"

namespace sptc {
namespace {

constexpr double kPi = std::numbers::pi;

LayoutParams default_layout() { return LayoutParams::make(9.0, 5.0, 120.0, DeviceParams{}); }

// Brute-force scalar oracle written straight from the geometry: victim i at
// (row b_i, col a_i), aggressor j heating its upper arm (phase >= 0, placed
// at the column origin) or its lower arm (l_s to the left).
double oracle_delta(int i, int j, double phase_j, int k2, const LayoutParams& l,
                    const GammaFit& fit) {
  const double dy = (j % k2 - i % k2) * l.l_v_um;
  const double dx = (j / k2 - i / k2) * l.l_h_um;
  double up, lo;
  if (phase_j >= 0) {
    up = std::sqrt(dy * dy + dx * dx);
    lo = std::sqrt(dy * dy + (dx + l.l_s_um) * (dx + l.l_s_um));
  } else {
    up = std::sqrt(dy * dy + (dx - l.l_s_um) * (dx - l.l_s_um));
    lo = std::sqrt(dy * dy + dx * dx);
  }
  return gamma(up, fit) - gamma(lo, fit);
}

std::vector<double> oracle_perturb(const std::vector<double>& ph, int k1, int k2,
                                   const std::vector<std::uint8_t>& on, const LayoutParams& l,
                                   const GammaFit& fit) {
  std::vector<double> out(ph);
  for (int i = 0; i < k1 * k2; ++i) {
    for (int j = 0; j < k1 * k2; ++j) {
      if (i == j || (!on.empty() && !on[j])) continue;
      out[i] += oracle_delta(i, j, ph[j], k2, l, fit) * std::abs(ph[j]);
    }
  }
  return out;
}

TEST(Layout, DerivedColumnPitch) {
  const auto l = default_layout();
  EXPECT_DOUBLE_EQ(l.l_h_um, 20.0);
  EXPECT_NO_THROW(l.validate(DeviceParams{}));
  LayoutParams bad = l;
  bad.l_h_um = 25.0;
  EXPECT_THROW(bad.validate(DeviceParams{}), ConfigError);
}

TEST(Layout, ArmDistancesDefaults) {
  const auto l = default_layout();
  auto d = arm_distances(1, 0, false, l);
  EXPECT_DOUBLE_EQ(d.up, 120.0);
  EXPECT_NEAR(d.lo, std::sqrt(14400.0 + 81.0), 1e-12);
  EXPECT_NEAR(d.lo, 120.34, 5e-3);
  d = arm_distances(0, 1, false, l);
  EXPECT_DOUBLE_EQ(d.up, 20.0);
  EXPECT_DOUBLE_EQ(d.lo, 29.0);
  d = arm_distances(0, 1, true, l);
  EXPECT_DOUBLE_EQ(d.up, 11.0);
  EXPECT_DOUBLE_EQ(d.lo, 20.0);
}

TEST(Layout, AggressorDistancesChecksIndices) {
  const auto l = default_layout();
  const CoreShape s{2, 2};
  EXPECT_THROW(aggressor_distances(1, 1, false, s, l), PreconditionError);
  EXPECT_THROW(aggressor_distances(0, 4, false, s, l), PreconditionError);
  // element 2 = (a=1, b=0): one column over from element 0
  const auto d = aggressor_distances(0, 2, false, s, l);
  EXPECT_DOUBLE_EQ(d.up, 20.0);
  EXPECT_DOUBLE_EQ(d.lo, 29.0);
}

TEST(Crosstalk, SingleAggressorTwoByTwo) {
  const GammaFit fit;
  const auto l = default_layout();
  const std::vector<double> ph{0.0, 0.0, 0.7, 0.0};
  const auto out = perturbed_phases(ph, CoreShape{2, 2}, l, fit);
  const double by_hand = (gamma(20.0, fit) - gamma(29.0, fit)) * 0.7;
  EXPECT_NEAR(out[0], by_hand, 1e-15);
  EXPECT_DOUBLE_EQ(out[2], 0.7);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(out[i], oracle_perturb(ph, 2, 2, {}, l, fit)[i], 1e-15);
}

TEST(Crosstalk, KernelMatchesBruteForceOracle) {
  const GammaFit fit;
  Rng rng(5);
  for (double l_g : {1.0, 5.0, 20.0}) {
    const auto l = LayoutParams::make(9.0, l_g, 120.0, DeviceParams{});
    for (auto [k1, k2] : {std::pair{3, 4}, std::pair{5, 2}, std::pair{4, 4}}) {
      const CoreShape shape{k1, k2};
      const CrosstalkKernel kernel(shape, l, fit);
      const auto ph = testing::uniform_vector(k1 * k2, -kPi / 2, kPi / 2, rng);
      std::vector<std::uint8_t> on(k1 * k2);
      for (auto& v : on) v = rng.uniform() < 0.6;
      const auto dense = kernel.perturb(ph);
      const auto gated = kernel.perturb(ph, on);
      const auto want_dense = oracle_perturb(ph, k1, k2, {}, l, fit);
      const auto want_gated = oracle_perturb(ph, k1, k2, on, l, fit);
      for (int i = 0; i < k1 * k2; ++i) {
        EXPECT_NEAR(dense[i], want_dense[i], 1e-13);
        EXPECT_NEAR(gated[i], want_gated[i], 1e-13);
      }
    }
  }
}

TEST(Crosstalk, MatrixAgreesWithPerturb) {
  const GammaFit fit;
  const auto l = default_layout();
  Rng rng(9);
  const CoreShape shape{4, 3};
  const auto ph = testing::uniform_vector(12, -kPi / 2, kPi / 2, rng);
  const auto m = crosstalk_matrix(ph, shape, l, fit);
  const auto out = perturbed_phases(ph, shape, l, fit);
  for (int i = 0; i < 12; ++i) {
    EXPECT_EQ(m.at(i, i), 0.0);
    double acc = ph[i];
    for (int j = 0; j < 12; ++j) {
      EXPECT_NEAR(m.at(i, j), i == j ? 0.0 : oracle_delta(i, j, ph[j], 3, l, fit), 1e-15);
      acc += m.at(i, j) * std::abs(ph[j]);
    }
    EXPECT_NEAR(out[i], acc, 1e-14);
  }
}

TEST(Crosstalk, WideSpacingIsNegligible) {
  const GammaFit fit;
  const auto l = LayoutParams::make(9.0, 200.0, 500.0, DeviceParams{});
  Rng rng(3);
  const auto ph = testing::uniform_vector(64, -kPi / 2, kPi / 2, rng);
  const auto out = perturbed_phases(ph, CoreShape{8, 8}, l, fit);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(out[i], ph[i], 1e-4);
}

TEST(Crosstalk, AlternatingRowMaskReducesPerturbation) {
  const GammaFit fit;
  const auto l = LayoutParams::make(9.0, 1.0, 120.0, DeviceParams{});
  const int k1 = 8, k2 = 8;
  std::vector<double> ph(k1 * k2, 1.0);  // dense, all positive
  std::vector<std::uint8_t> all(k1, 1), alt(k1), cols(k2, 1);
  for (int a = 0; a < k1; ++a) alt[a] = (a % 2 == 0);
  const auto dense = perturbed_phases_gated(ph, all, cols, CoreShape{k1, k2}, l, fit);
  const auto gated = perturbed_phases_gated(ph, alt, cols, CoreShape{k1, k2}, l, fit);
  double err_dense = 0.0, err_gated = 0.0;
  int n = 0;
  for (int i = 0; i < k1 * k2; ++i) {
    if (!alt[i / k2]) continue;
    err_dense += std::abs(dense[i] - ph[i]);
    err_gated += std::abs(gated[i] - ph[i]);
    ++n;
  }
  EXPECT_LT(err_gated / n, err_dense / n);
  // pruned nodes sit at phase 0 and are still perturbed
  EXPECT_NE(gated[1 * k2], 0.0);
}

TEST(Crosstalk, MaxDeltaBoundedByClosestArm) {
  const GammaFit fit;
  const auto l = default_layout();
  const CrosstalkKernel kernel(CoreShape{4, 4}, l, fit);
  EXPECT_GT(kernel.max_abs_delta_gamma(), 0.0);
  EXPECT_LE(kernel.max_abs_delta_gamma(), gamma(l.l_h_um - l.l_s_um, fit));
}

}  // namespace
}  // namespace sptc
