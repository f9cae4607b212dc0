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

#include <cmath>
#include <set>

#include "explorer.hpp"
#include "sptc/error.hpp"
#include "sptc/rng.hpp"

namespace sptc::explorer {

using nlohmann::json;

namespace {

const std::set<std::string> kCaseKeys = {"name", "k1", "k2", "weights", "random_weights", "x",
                                         "random_x", "row_mask", "col_mask", "mode",
                                         "output_gating", "crosstalk", "trials"};

template <typename T>
T field(const json& c, const std::string& path, const char* key, T fallback) {
  if (!c.contains(key)) return fallback;
  try {
    return c.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

}  // namespace

json simulate_scenario(const json& scenario, const Config& config) {
  if (!scenario.is_object() || !scenario.contains("cases") || !scenario.at("cases").is_array()) {
    throw ConfigError("scenario: expected an object with a \"cases\" array");
  }
  std::vector<std::string> errors;
  for (const auto& [key, _] : scenario.items()) {
    if (key != "cases") errors.push_back("scenario." + key + ": unknown key");
  }
  const auto& cases = scenario.at("cases");
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string path = "cases[" + std::to_string(i) + "]";
    if (!cases[i].is_object()) {
      errors.push_back(path + ": expected an object");
      continue;
    }
    for (const auto& [key, _] : cases[i].items()) {
      if (!kCaseKeys.count(key)) errors.push_back(path + "." + key + ": unknown key");
    }
  }
  if (!errors.empty()) throw ConfigErrorList(errors);

  json results = json::array();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const json& c = cases[i];
    const std::string path = "cases[" + std::to_string(i) + "]";
    const int k1 = field<int>(c, path, "k1", config.arch.arch.k1);
    const int k2 = field<int>(c, path, "k2", config.arch.arch.k2);
    if (k1 < 1 || k2 < 1) throw ConfigError(path + ": k1 and k2 must be >= 1");
    const CoreShape shape{k1, k2};
    const std::size_t n = static_cast<std::size_t>(k1) * k2;
    const int trials = field<int>(c, path, "trials", 1);
    if (trials < 1) throw ConfigError(path + ".trials: must be >= 1");

    Rng data_rng(scenario_seed(config.seed, Scenario::Simulate, i, 0xffffffffULL));
    std::vector<double> w = field<std::vector<double>>(c, path, "weights", {});
    if (field<bool>(c, path, "random_weights", false)) {
      w.resize(n);
      for (double& v : w) v = data_rng.uniform(-1.0, 1.0);
    }
    if (w.size() != n) throw ConfigError(path + ".weights: expected k1 x k2 values");
    std::vector<double> x = field<std::vector<double>>(c, path, "x", {});
    if (field<bool>(c, path, "random_x", false)) {
      x.resize(k2);
      for (double& v : x) v = data_rng.uniform();
    }
    if (static_cast<int>(x.size()) != k2) throw ConfigError(path + ".x: expected k2 values");
    const auto row_mask = field<std::vector<std::uint8_t>>(c, path, "row_mask", {});
    const auto col_mask = field<std::vector<std::uint8_t>>(c, path, "col_mask", {});
    MvmOptions opts;
    try {
      opts.mode = execution_mode_from_string(field<std::string>(c, path, "mode", to_string(config.arch.mode)));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ".mode: " + e.what());
    }
    opts.output_gating = field<bool>(c, path, "output_gating", config.arch.output_gating);
    opts.crosstalk = field<bool>(c, path, "crosstalk", true);

    std::shared_ptr<const CrosstalkKernel> kernel;
    if (opts.crosstalk) kernel = std::make_shared<CrosstalkKernel>(shape, config.layout, GammaFit{});
    const PtcCore core(shape, w, row_mask, col_mask, kernel, config.device, opts);
    const auto ideal = core.ideal(x);
    json outputs = json::array();
    double err = 0.0, den = 0.0;
    for (int t = 0; t < trials; ++t) {
      Rng rng(scenario_seed(config.seed, Scenario::Simulate, i, static_cast<std::uint64_t>(t)));
      const auto y = core.mvm(x, rng);
      for (int a = 0; a < k1; ++a) {
        err += std::abs(y[a] - ideal[a]);
        den += std::abs(ideal[a]);
      }
      outputs.push_back(y);
    }
    results.push_back({{"name", field<std::string>(c, path, "name", "case" + std::to_string(i))},
                       {"k1", k1},
                       {"k2", k2},
                       {"mode", to_string(opts.mode)},
                       {"output_gating", opts.output_gating},
                       {"crosstalk", opts.crosstalk},
                       {"trials", trials},
                       {"x", x},
                       {"ideal", ideal},
                       {"outputs", outputs},
                       {"nmae", den > 0.0 ? json(err / den) : json(nullptr)}});
  }
  return {{"schema_version", kSchemaVersion}, {"results", results}};
}

}  // namespace sptc::explorer
