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

#include <algorithm>
#include <fstream>
#include <set>

#include "sptc/dataset.hpp"
#include "sptc/error.hpp"
#include "test_support.hpp"

namespace sptc {
namespace {

TEST(Dataset, LoadsDigits) {
  const Dataset d = load_digits_csv(testing::digits_csv());
  EXPECT_EQ(d.size(), 1797);
  EXPECT_EQ(d.features(), 64);
  EXPECT_EQ(d.classes, 10);
  EXPECT_EQ(d.x.size(), 1797u * 64u);
  for (double v : d.x) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
  std::set<int> labels(d.y.begin(), d.y.end());
  EXPECT_EQ(labels.size(), 10u);
  EXPECT_EQ(*labels.begin(), 0);
  EXPECT_EQ(*labels.rbegin(), 9);
}

TEST(Dataset, RejectsMalformedFiles) {
  const auto dir = testing::scratch_dir("dataset");
  EXPECT_THROW(load_digits_csv(dir / "missing.csv"), PreconditionError);
  std::ofstream(dir / "hdr.csv") << "a,b\n1,2\n";
  EXPECT_THROW(load_digits_csv(dir / "hdr.csv"), PreconditionError);
  {
    std::ofstream f(dir / "short.csv");
    f << "label";
    for (int i = 0; i < 64; ++i) f << ",p" << i;
    f << "\n3,1,2\n";
  }
  EXPECT_THROW(load_digits_csv(dir / "short.csv"), PreconditionError);
}

TEST(Dataset, SyntheticIsSeeded) {
  const Dataset a = synthetic_blobs(100, 4, 9);
  const Dataset b = synthetic_blobs(100, 4, 9);
  const Dataset c = synthetic_blobs(100, 4, 10);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_NE(a.x, c.x);
  EXPECT_EQ(a.classes, 4);
  for (double v : a.x) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(Dataset, SplitIsASeededPartition) {
  const Dataset d = synthetic_blobs(101, 3, 1);
  const auto [train, test] = split_dataset(d, 0.8, 5);
  EXPECT_EQ(train.size(), 81);
  EXPECT_EQ(test.size(), 20);
  const auto [train2, test2] = split_dataset(d, 0.8, 5);
  EXPECT_EQ(train.x, train2.x);
  // every sample lands in exactly one side
  std::multiset<std::vector<double>> all, parts;
  for (int i = 0; i < d.size(); ++i) all.insert({d.x.begin() + i * 64, d.x.begin() + (i + 1) * 64});
  for (const Dataset* s : {&train, &test}) {
    for (int i = 0; i < s->size(); ++i) parts.insert({s->x.begin() + i * 64, s->x.begin() + (i + 1) * 64});
  }
  EXPECT_EQ(all, parts);
  EXPECT_THROW(split_dataset(d, 1.0, 5), ConfigError);
}

TEST(Dataset, BatchAndSubset) {
  const Dataset d = synthetic_blobs(10, 3, 2);
  std::vector<int> labels;
  const std::vector<int> idx{4, 1};
  const Tensor t = d.batch(idx, labels);
  EXPECT_EQ(t.shape, (std::vector<int>{2, 1, 8, 8}));
  EXPECT_EQ(labels, (std::vector<int>{d.y[4], d.y[1]}));
  EXPECT_TRUE(std::equal(t.data.begin(), t.data.begin() + 64, d.x.begin() + 4 * 64));
  const Dataset s = d.subset(idx);
  EXPECT_EQ(s.size(), 2);
  EXPECT_EQ(s.y, labels);
}

}  // namespace
}  // namespace sptc
