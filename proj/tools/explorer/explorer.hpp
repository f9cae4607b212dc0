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
 * @file explorer.hpp
 * @brief Design-space exploration on top of sptc::core: grid sweeps,
 * single-point reports, the staged power-area walk, the N-MAE study and
 * scripted scenarios.
 *
 * All randomness derives from the config's root seed plus (scenario, point,
 * trial) keys, so results do not depend on thread count or evaluation order.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sptc/config.hpp"
#include "sptc/dataset.hpp"
#include "sptc/trainer.hpp"

namespace sptc::explorer {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

// Scenario tags mixed into derived seeds.
enum class Scenario : std::uint64_t {
  Workload = 1,
  PointNmae = 2,
  PointEval = 3,
  NmaeStudy = 4,
  NmaeNoise = 5,
  Simulate = 6,
};

std::uint64_t scenario_seed(std::uint64_t root, Scenario s, std::uint64_t point,
                            std::uint64_t trial);

/// "%.10g"; NaN (absent) becomes the empty string.
std::string fmt_number(double v);
/// Quotes a CSV cell when it contains a comma, quote or newline.
std::string csv_cell(const std::string& s);

struct GridPoint {
  std::size_t index = 0;
  nlohmann::json values = nlohmann::json::object();  // axis key -> value
  Config config;
  std::string error;  // non-empty when the point's config is invalid
};

/// Cartesian product of sweep.axes, first axis slowest. No axes gives one
/// point. Invalid axis keys fail before any point is built (ConfigErrorList).
std::vector<GridPoint> expand_grid(const Config& base);

/// The default workload with seeded random weights in [-1, 1] and masks at
/// arch.density (first and last layers dense).
struct WorkloadSample {
  std::vector<WorkloadLayer> layers;
  std::vector<LayerPartition> parts;
  std::vector<std::vector<double>> weights;  // masked, normalized
  std::vector<SparsityMask> masks;
};
WorkloadSample sample_workload(const Config& config);

struct WorkloadPower {
  EnergyResult energy;
  AreaBreakdown area;
  double pap = 0.0;
  double dac_power_w = 0.0;  // DAC share of the average input power
  double dac_area_mm2 = 0.0;
};
WorkloadPower workload_power(const Config& config, const WorkloadSample& sample);

struct ReportRow {
  nlohmann::json point = nlohmann::json::object();
  double l_s_um = kAbsent;
  double l_g_um = kAbsent;
  double acc_clean = kAbsent;
  double acc_noisy = kAbsent;
  double p_avg_w = kAbsent;
  double area_mm2 = kAbsent;
  double pap = kAbsent;
  double e_tot_mj = kAbsent;
  double p_in_w = kAbsent;
  double p_wgt_w = kAbsent;
  double p_out_w = kAbsent;
  double p_rerouter_w = kAbsent;
  int r = 0;
  int c = 0;
  double density = kAbsent;
  std::string mode;
  bool output_gating = false;
  std::string dac;
  double nmae = kAbsent;
  bool pap_min = false;
  std::string error;
};

/// Optional trained model evaluated at every point.
struct PointContext {
  const TrainedModel* model = nullptr;
  const Dataset* test = nullptr;
};

/// Evaluates one configuration. Without a model, nmae is measured on the
/// first sparse workload layer with sweep.trials x 4 random inputs.
ReportRow evaluate_point(const Config& config, std::uint64_t point_index,
                         const PointContext& ctx);

struct Report {
  std::vector<std::string> axes;
  std::vector<ReportRow> rows;
  int pap_min_index = -1;
};

/// Evaluates every grid point (threads >= 1 workers), keeps grid order,
/// records per-point failures in the error column and flags the minimum-PAP
/// row.
Report run_sweep(const Config& config, int threads, const PointContext& ctx);
/// The configuration as a single point (axes ignored).
Report run_report(const Config& config, const PointContext& ctx);

void write_report_csv(const Report& report, std::ostream& out);
nlohmann::json report_json(const Report& report);

// Staged power-area walk from a foundry-device baseline.
struct Stage {
  int id = 0;
  std::string name;
  std::string description;
  // Applied cumulatively; a null value restores the starting config's value.
  std::vector<std::pair<std::string, nlohmann::json>> overrides;
};

inline constexpr const char* kProgressiveManifest = "progressive-v1";
const std::vector<Stage>& progressive_stages();

struct StageRow {
  Stage stage;
  WorkloadPower power;
};

/// The stages applied in order on top of the base config's device unit costs.
std::vector<StageRow> run_progressive(const Config& config);
void write_progressive_csv(const std::vector<StageRow>& rows, std::ostream& out);
nlohmann::json progressive_json(const std::vector<StageRow>& rows);

// N-MAE study on a randomly initialized convolution layer.
struct NmaeCase {
  std::string study;    // "row" or "col"
  std::string pattern;  // row: dense / blocked / interleaved; col: "random"
  double density = 1.0; // row or column density of the mask
  ExecutionMode mode = ExecutionMode::PruneOnly;
  bool output_gating = false;
};

struct NmaeStudyOptions {
  int c_out = 64;
  int c_in = 64;
  int kernel = 3;
  int vectors = 4;  // random input vectors per trial
  int trials = 1;
  double row_density = 0.5;
  std::vector<std::string> row_patterns{"dense", "blocked", "interleaved"};
  std::vector<double> col_densities{0.25, 0.5, 0.75, 1.0};
};

std::vector<NmaeCase> nmae_cases(const NmaeStudyOptions& options);

/// N-MAE of every case for one trial. Cases sharing a mask share the layer
/// weights, inputs and noise stream (common random numbers).
std::vector<double> nmae_trial(const Config& config, const NmaeStudyOptions& options,
                               std::uint64_t point_index, std::uint64_t trial);

struct NmaeRow {
  NmaeCase kase;
  double l_s_um = 0.0;
  double l_g_um = 0.0;
  int trials = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Runs every case over the sweep grid (or the single config).
std::vector<NmaeRow> run_nmae_study(const Config& config, const NmaeStudyOptions& options,
                                    int threads);
void write_nmae_csv(const std::vector<NmaeRow>& rows, std::ostream& out);
nlohmann::json nmae_json(const std::vector<NmaeRow>& rows);

/// Scripted tensor-core products. The scenario is
/// {"cases": [{"name", "k1", "k2", "weights" or "random_weights",
///   "x" or "random_x", "row_mask", "col_mask", "mode", "output_gating",
///   "crosstalk", "trials"}]}; results hold noisy outputs, ideal outputs and
/// N-MAE per case.
nlohmann::json simulate_scenario(const nlohmann::json& scenario, const Config& config);

}  // namespace sptc::explorer
