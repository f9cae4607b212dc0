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
 * @file config.hpp
 * @brief The JSON configuration document: sections device, layout, arch,
 * dst, sweep and a top-level seed.
 *
 * Missing keys take defaults, unknown keys are errors, and every problem is
 * reported with its JSON path (e.g. "layout.l_g_um"). layout.l_h_um is
 * derived from the device node width and l_g; it may be given only if it
 * agrees.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sptc/arch_model.hpp"
#include "sptc/device_models.hpp"
#include "sptc/dst.hpp"
#include "sptc/layout_crosstalk.hpp"
#include "sptc/ptc_core.hpp"

namespace sptc {

struct WorkloadLayer {
  std::string name;
  LayerDims dims;
  bool sparse = true;
};

/// 28x28 CNN, unpadded K3 convolutions: conv 1->64 (26x26), 64->64 (24x24),
/// 2x2 pool, 64->64 (10x10), 2x2 pool, linear 1600->10. First and last
/// layers stay dense.
std::vector<WorkloadLayer> default_workload();

struct ArchSection {
  ArchConfig arch;
  ExecutionMode mode = ExecutionMode::PruneOnly;
  bool output_gating = false;
  double density = 1.0;
  MaskInit mask_init = MaskInit::PowerAware;
  std::vector<WorkloadLayer> workload = default_workload();
};

struct DstSection {
  double alpha0 = 0.5;
  double t_end_fraction = 0.8;
  int delta_m = 2;
  std::uint64_t max_combinations = 10000;
  double density = 0.5;
  int epochs = 30;
  int batch_size = 32;
  double lr = 2e-3;
  double weight_decay = 1e-4;
  ExecutionMode power_mode = ExecutionMode::InputGatingRedistribution;
  bool power_output_gating = true;
  std::string dataset = "data/digits8x8.csv";  // or "synthetic"
  double train_fraction = 0.8;
  int eval_trials = 3;
};

struct SweepAxis {
  std::string key;                 // dotted config path, e.g. "layout.l_s_um"
  std::vector<nlohmann::json> values;
};

struct SweepSection {
  std::vector<SweepAxis> axes;
  int trials = 1;
  std::string checkpoint;  // optional: evaluate accuracy of this model per point
};

struct Config {
  std::uint64_t seed = 1;
  DeviceParams device;
  LayoutParams layout;
  ArchSection arch;
  DstSection dst;
  SweepSection sweep;

  PowerContext power_context() const;
  GatingPolicy gating() const { return {arch.mode, arch.output_gating}; }
};

/// Parses and validates. Throws ConfigErrorList with every problem found.
Config parse_config(const nlohmann::json& doc);

/// Reads a file; an empty or whitespace-only file is the empty document.
Config load_config(const std::filesystem::path& path);

/// Effective configuration, defaults filled and l_h derived.
nlohmann::json to_json(const Config& config);

/// Returns a copy with the dotted key set to value, re-validated. The key
/// must exist in the effective configuration.
Config with_override(const Config& config, const std::string& key, const nlohmann::json& value);

/// True when the dotted key names a value in the effective configuration.
bool has_key(const Config& config, const std::string& key);

}  // namespace sptc
