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

#include "sptc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "sptc/error.hpp"
#include "sptc/rng.hpp"

namespace sptc {

Tensor Dataset::batch(std::span<const int> idx, std::vector<int>& labels) const {
  const int f = features();
  Tensor t({static_cast<int>(idx.size()), channels, height, width});
  labels.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(idx[i]) * f, f,
                t.data.begin() + static_cast<std::ptrdiff_t>(i) * f);
    labels[i] = y[idx[i]];
  }
  return t;
}

Dataset Dataset::subset(std::span<const int> idx) const {
  Dataset out = *this;
  out.x.clear();
  out.y.clear();
  const int f = features();
  out.x.reserve(idx.size() * f);
  for (int i : idx) {
    out.x.insert(out.x.end(), x.begin() + static_cast<std::ptrdiff_t>(i) * f,
                 x.begin() + static_cast<std::ptrdiff_t>(i + 1) * f);
    out.y.push_back(y[i]);
  }
  return out;
}

Dataset load_digits_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw PreconditionError("empty dataset " + path.string());
  const auto header_fields = std::count(line.begin(), line.end(), ',') + 1;
  if (line.rfind("label,", 0) != 0 || header_fields != 65) {
    throw PreconditionError(path.string() + ": expected header label,p0,...,p63");
  }
  Dataset d;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw PreconditionError(path.string() + ":" + std::to_string(lineno) + ": bad value");
      }
    }
    if (vals.size() != 65) {
      throw PreconditionError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 65 fields");
    }
    const int label = static_cast<int>(vals[0]);
    if (label < 0 || label >= d.classes) {
      throw PreconditionError(path.string() + ":" + std::to_string(lineno) + ": bad label");
    }
    d.y.push_back(label);
    for (int i = 1; i < 65; ++i) d.x.push_back(std::clamp(vals[i] / 16.0, 0.0, 1.0));
  }
  if (d.y.empty()) throw PreconditionError("no samples in " + path.string());
  return d;
}

Dataset synthetic_blobs(int n, int classes, std::uint64_t seed, int h, int w, double sigma) {
  if (n < 1 || classes < 2) throw PreconditionError("synthetic_blobs: need n >= 1, classes >= 2");
  Rng rng(derive_seed({seed, 0x626c6f6273ULL}));
  Dataset d;
  d.height = h;
  d.width = w;
  d.classes = classes;
  const int f = h * w;
  std::vector<double> proto(static_cast<std::size_t>(classes) * f);
  for (double& v : proto) v = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.5, 1.0);
  for (int i = 0; i < n; ++i) {
    const int c = i % classes;
    d.y.push_back(c);
    for (int j = 0; j < f; ++j) {
      d.x.push_back(std::clamp(proto[static_cast<std::size_t>(c) * f + j] + sigma * rng.normal(),
                               0.0, 1.0));
    }
  }
  return d;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction,
                                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("dst.train_fraction must be in (0, 1)");
  }
  std::vector<int> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed({seed, 0x73706c6974ULL}));
  for (int i = data.size() - 1; i > 0; --i) {
    std::swap(idx[i], idx[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  }
  const int n_train = std::clamp(static_cast<int>(std::lround(train_fraction * data.size())), 1,
                                 std::max(1, data.size() - 1));
  std::span<const int> all(idx);
  return {data.subset(all.first(n_train)), data.subset(all.subspan(n_train))};
}

}  // namespace sptc
