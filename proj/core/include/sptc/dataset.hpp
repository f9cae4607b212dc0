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
 * @file dataset.hpp
 * @brief Small labelled image sets: the 8x8 digits CSV and a seeded
 * synthetic blob generator, plus a seeded train/test split.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "sptc/nn.hpp"

namespace sptc {

struct Dataset {
  int channels = 1;
  int height = 8;
  int width = 8;
  int classes = 10;
  std::vector<double> x;  // size() x (channels height width), values in [0, 1]
  std::vector<int> y;

  int size() const noexcept { return static_cast<int>(y.size()); }
  int features() const noexcept { return channels * height * width; }
  /// Samples idx as an (n, C, H, W) tensor and their labels.
  Tensor batch(std::span<const int> idx, std::vector<int>& labels) const;
  Dataset subset(std::span<const int> idx) const;
};

/// CSV with header "label,p0,...,p63"; pixel values 0..16 are scaled by 1/16.
Dataset load_digits_csv(const std::filesystem::path& path);

/// n samples of 1 x h x w images: each class has a fixed random prototype
/// and samples add Gaussian noise (sigma) before clamping to [0, 1].
Dataset synthetic_blobs(int n, int classes, std::uint64_t seed, int h = 8, int w = 8,
                        double sigma = 0.15);

/// Seeded shuffle, then the first round(train_fraction n) samples train.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction,
                                          std::uint64_t seed);

}  // namespace sptc
