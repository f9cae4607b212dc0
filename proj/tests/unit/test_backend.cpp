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
#include <memory>
#include <vector>

#include "sptc/dst.hpp"
#include "sptc/error.hpp"
#include "sptc/photonic_backend.hpp"
#include "test_support.hpp"

namespace sptc {
namespace {

ArchConfig small_arch() {
  ArchConfig a;
  a.k1 = a.k2 = 4;
  a.r = a.c = 2;
  return a;
}

DeviceParams quiet() {
  DeviceParams d;
  d.pd_noise_sigma = 0.0;
  d.phase_noise_sigma_rad = 0.0;
  return d;
}

std::vector<double> direct(const std::vector<double>& w, const std::vector<std::uint8_t>& m,
                           const std::vector<double>& x, int rows, int cols, int n) {
  std::vector<double> y(static_cast<std::size_t>(n) * rows, 0.0);
  for (int v = 0; v < n; ++v) {
    for (int o = 0; o < rows; ++o) {
      for (int k = 0; k < cols; ++k) {
        if (m.empty() || m[o * cols + k]) y[v * rows + o] += w[o * cols + k] * x[v * cols + k];
      }
    }
  }
  return y;
}

TEST(Backend, DeriveChunkMasks) {
  const auto part = make_partition({10, 9, 1, 1}, small_arch());  // 2 x 2 chunks of 8 x 8
  std::vector<std::uint8_t> m(90, 0);
  m[3 * 9 + 2] = 1;  // row 3, col 2
  m[9 * 9 + 8] = 1;  // row 9, col 8
  std::vector<std::uint8_t> row_on, col_on;
  derive_chunk_masks(m, part, 0, 0, row_on, col_on);
  EXPECT_EQ(row_on, (std::vector<std::uint8_t>{0, 0, 0, 1, 0, 0, 0, 0}));
  EXPECT_EQ(col_on, (std::vector<std::uint8_t>{0, 0, 1, 0, 0, 0, 0, 0}));
  derive_chunk_masks(m, part, 1, 1, row_on, col_on);
  EXPECT_EQ(row_on, (std::vector<std::uint8_t>{0, 1, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(col_on, (std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0, 0, 0}));
  derive_chunk_masks({}, part, 1, 1, row_on, col_on);  // dense: padding stays off
  EXPECT_EQ(row_on, (std::vector<std::uint8_t>{1, 1, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(col_on, (std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0, 0, 0}));
}

TEST(Backend, MappedMatrixNoiseFreeIsExact) {
  const ArchConfig arch = small_arch();
  const int rows = 13, cols = 21, n = 3;
  Rng rng(1);
  const auto w = testing::uniform_vector(rows * cols, -1.0, 1.0, rng);
  const auto x = testing::uniform_vector(n * cols, 0.0, 1.0, rng);
  const auto part = make_partition({rows, cols, 1, 1}, arch);
  PowerContext ctx;
  ctx.arch = arch;
  auto sm = init_masks(0.3, part, w, MaskInit::Random, ctx, 100, rng);
  std::vector<std::uint8_t> m(rows * cols);
  for (int o = 0; o < rows; ++o) {
    for (int k = 0; k < cols; ++k) m[o * cols + k] = sm.element(part, o, k);
  }
  for (const auto& mask : {std::vector<std::uint8_t>{}, m}) {
    MappedMatrix mm(w, rows, cols, mask, arch, nullptr, quiet(),
                    MvmOptions{ExecutionMode::InputGatingRedistribution, true, false});
    std::vector<double> y(n * rows), yi(n * rows);
    mm.multiply(x, n, rng, y);
    mm.ideal(x, n, yi);
    const auto want = direct(w, mask, x, rows, cols, n);
    for (int i = 0; i < n * rows; ++i) {
      EXPECT_NEAR(yi[i], want[i], 1e-12);
      EXPECT_NEAR(y[i], want[i], 1e-12);
    }
  }
}

TEST(Backend, MappedMatrixGatingSwitch) {
  const ArchConfig arch = small_arch();
  Rng rng(2);
  const auto w = testing::uniform_vector(8 * 8, -1.0, 1.0, rng);
  std::vector<std::uint8_t> m(64, 1);
  for (int o = 0; o < 8; ++o) m[o * 8 + 5] = 0;  // column 5 pruned
  const auto x = testing::uniform_vector(8, 0.0, 1.0, rng);
  MappedMatrix mm(w, 8, 8, m, arch, nullptr, quiet(), MvmOptions{ExecutionMode::PruneOnly, false, false});
  std::vector<double> yp(8), yl(8), yi(8);
  mm.multiply(x, 1, rng, yp);
  mm.set_gating(ExecutionMode::InputGatingRedistribution, true);
  mm.multiply(x, 1, rng, yl);
  mm.ideal(x, 1, yi);
  double ep = 0.0, el = 0.0;
  for (int i = 0; i < 8; ++i) {
    ep += std::abs(yp[i] - yi[i]);
    el += std::abs(yl[i] - yi[i]);
  }
  EXPECT_GT(ep, 1e-4);  // leakage of the pruned column
  EXPECT_LT(el, 1e-12);
  EXPECT_THROW(MappedMatrix(w, 8, 7, m, arch, nullptr, quiet(), {}), PreconditionError);
}

TEST(Backend, ModelOnQuietHardwareMatchesDigital) {
  Rng rng(3);
  Model model(ModelSpec::desk_cnn(), QuantSpec{}, rng);
  Tensor x({4, 1, 8, 8});
  for (auto& v : x.data) v = rng.uniform(0.0, 1.0);
  const Tensor ref = model.forward(x, false);

  PhotonicSetup setup;
  setup.arch = small_arch();
  setup.device = quiet();
  setup.layout = LayoutParams::make(9.0, 5.0, 120.0, setup.device);
  setup.options = MvmOptions{ExecutionMode::InputGatingRedistribution, true, false};
  PhotonicBackend be(setup);
  be.map_model(model);
  const Tensor got = model.forward(x, false);
  for (std::size_t i = 0; i < ref.data.size(); ++i) EXPECT_NEAR(got.data[i], ref.data[i], 1e-9);
  EXPECT_LT(be.nmae(), 1e-12);
  be.reset_stats();
  EXPECT_THROW(be.nmae(), DomainError);
}

TEST(Backend, NoisyRunsAreSeeded) {
  auto run = [](std::uint64_t seed) {
    Rng rng(4);
    Model model(ModelSpec::desk_cnn(), QuantSpec{}, rng);
    Tensor x({2, 1, 8, 8});
    for (auto& v : x.data) v = rng.uniform(0.0, 1.0);
    model.forward(x, false);
    PhotonicSetup setup;
    setup.arch = small_arch();
    setup.layout = LayoutParams::make(9.0, 1.0, 120.0, setup.device);
    setup.seed = seed;
    PhotonicBackend be(setup);
    be.map_model(model);
    auto out = model.forward(x, false).data;
    out.push_back(be.nmae());
    return out;
  };
  const auto a = run(1), b = run(1), c = run(2);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_GT(a.back(), 0.0);
}

}  // namespace
}  // namespace sptc
