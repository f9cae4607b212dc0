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

#include <fstream>
#include <string>

#include "sptc/config.hpp"
#include "sptc/error.hpp"
#include "test_support.hpp"

namespace sptc {
namespace {

using nlohmann::json;

std::vector<std::string> errors_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigErrorList& e) {
    return e.errors();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errs, const std::string& what) {
  for (const auto& e : errs) {
    if (e.find(what) != std::string::npos) return true;
  }
  return false;
}

TEST(Config, EmptyDocumentGivesDefaults) {
  const Config c = parse_config(json::object());
  EXPECT_EQ(c.seed, 1u);
  EXPECT_DOUBLE_EQ(c.layout.l_s_um, 9.0);
  EXPECT_DOUBLE_EQ(c.layout.l_g_um, 5.0);
  EXPECT_DOUBLE_EQ(c.layout.l_h_um, 20.0);
  EXPECT_EQ(c.arch.arch.R, 4);
  EXPECT_EQ(c.arch.arch.r, 4);
  EXPECT_EQ(c.arch.mode, ExecutionMode::PruneOnly);
  EXPECT_FALSE(c.arch.workload.empty());
  EXPECT_TRUE(c.sweep.axes.empty());
}

TEST(Config, EffectiveConfigRoundTrips) {
  json doc = {{"seed", 42},
              {"layout", {{"l_s_um", 7}, {"l_g_um", 1}}},
              {"arch", {{"r", 2}, {"mode", "ig_lr"}, {"output_gating", true}, {"dac_kind", "eodac"}}},
              {"sweep", {{"axes", json::array({{{"key", "layout.l_s_um"}, {"values", {7, 9}}}})}}}};
  const Config c = parse_config(doc);
  EXPECT_DOUBLE_EQ(c.layout.l_h_um, 14.0);  // 7 + 6 + 1
  const json eff = to_json(c);
  EXPECT_EQ(to_json(parse_config(eff)), eff);
  EXPECT_EQ(eff["layout"]["l_h_um"], 14.0);
}

TEST(Config, ErrorsArePathQualified) {
  auto errs = errors_of({{"layout", {{"l_g_um", -1}}}});
  EXPECT_TRUE(mentions(errs, "layout.l_g_um")) << (errs.empty() ? "" : errs[0]);
  errs = errors_of({{"layout", {{"bogus", 1}}}});
  EXPECT_TRUE(mentions(errs, "layout.bogus"));
  errs = errors_of({{"nonsense", 1}});
  EXPECT_TRUE(mentions(errs, "nonsense"));
  errs = errors_of({{"arch", {{"mode", "sideways"}}}});
  EXPECT_TRUE(mentions(errs, "arch.mode"));
  errs = errors_of({{"device", {{"p_pi_mw", "high"}}}});
  EXPECT_TRUE(mentions(errs, "device.p_pi_mw"));
}

TEST(Config, SeveralErrorsReportedTogether) {
  const auto errs = errors_of({{"layout", {{"l_g_um", -1}}}, {"dst", {{"alpha0", 2.0}}}, {"x", 0}});
  EXPECT_GE(errs.size(), 3u);
  EXPECT_TRUE(mentions(errs, "layout.l_g_um"));
  EXPECT_TRUE(mentions(errs, "dst.alpha0"));
}

TEST(Config, GroupingAndDerivedPitch) {
  auto errs = errors_of({{"arch", {{"r", 3}}}});
  EXPECT_TRUE(mentions(errs, "arch.r"));
  EXPECT_NO_THROW(parse_config({{"layout", {{"l_h_um", 20.0}}}}));
  errs = errors_of({{"layout", {{"l_h_um", 30.0}}}});
  EXPECT_TRUE(mentions(errs, "layout.l_h_um"));
  errs = errors_of({{"layout", {{"l_v_um", 100.0}}}});
  EXPECT_TRUE(mentions(errs, "l_v_um"));
}

TEST(Config, OverridesAreRevalidated) {
  const Config base = parse_config(json::object());
  const Config c = with_override(base, "layout.l_s_um", 11);
  EXPECT_DOUBLE_EQ(c.layout.l_s_um, 11.0);
  EXPECT_DOUBLE_EQ(c.layout.l_h_um, 22.0);
  EXPECT_TRUE(has_key(base, "arch.r"));
  EXPECT_FALSE(has_key(base, "arch.nope"));
  EXPECT_THROW(with_override(base, "arch.nope", 1), ConfigError);
  EXPECT_THROW(with_override(base, "arch.r", 3), ConfigError);
}

TEST(Config, LoadFile) {
  const auto dir = testing::scratch_dir("config");
  std::ofstream(dir / "empty.json") << "  \n";
  EXPECT_EQ(to_json(load_config(dir / "empty.json")), to_json(parse_config(json::object())));
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
  for (const char* name : {"default.json", "spacing_sweep.json", "desk.json"}) {
    EXPECT_NO_THROW(load_config(testing::source_dir() / "configs" / name)) << name;
  }
}

TEST(Config, PowerContextFollowsSections) {
  Config c = parse_config({{"arch", {{"mode", "ig"}, {"output_gating", true}}}});
  const auto g = c.gating();
  EXPECT_EQ(g.mode, ExecutionMode::InputGating);
  EXPECT_TRUE(g.output_gating);
  const auto ctx = c.power_context();
  EXPECT_EQ(ctx.arch.k1, c.arch.arch.k1);
  EXPECT_DOUBLE_EQ(ctx.layout.l_s_um, c.layout.l_s_um);
}

}  // namespace
}  // namespace sptc
