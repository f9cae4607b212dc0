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
 * @file trainer.hpp
 * @brief Power-aware dynamic sparse training of a small quantized network,
 * evaluation on simulated tensor cores, checkpoints and metrics.
 *
 * Layers flagged sparse get an interleaved row mask and power-minimizing
 * column masks. Every epoch (until t_end) each sparse layer prunes its
 * smallest columns and regrows the ones with the largest accumulated
 * gradient, both picking the lowest-power combination from a small pool.
 * Time t counts optimizer steps; masks update at epoch boundaries.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sptc/config.hpp"
#include "sptc/dataset.hpp"
#include "sptc/dst.hpp"
#include "sptc/nn.hpp"
#include "sptc/partition.hpp"
#include "sptc/photonic_backend.hpp"

namespace sptc {

struct TrainOptions {
  ModelSpec model = ModelSpec::desk_cnn();
  QuantSpec quant;
  double density = 0.5;  // target s, fraction of kept weights
  int epochs = 30;
  int batch_size = 32;
  double lr = 2e-3;
  double weight_decay = 1e-4;
  double alpha0 = 0.5;
  double t_end_fraction = 0.8;
  int delta_m = 2;
  std::uint64_t max_combinations = 10000;
  MaskInit mask_init = MaskInit::PowerAware;
  PowerContext power;  // hardware used to score masks and report power
  std::uint64_t seed = 1;
};

/// Options from the dst and arch sections; quantization bits follow arch.
TrainOptions train_options(const Config& config);

/// dst.dataset ("synthetic" or a CSV path) split by dst.train_fraction.
std::pair<Dataset, Dataset> load_training_data(const Config& config);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;      // mean training loss
  double accuracy = 0.0;  // clean test accuracy
  double density = 1.0;   // over the sparse layers
  double power_mw = 0.0;  // modeled average accelerator power
};

struct LayerState {
  std::string name;
  int rows = 0;
  int cols = 0;
  int kernel = 1;
  int positions = 1;  // output vectors per sample
  bool sparse = false;
  bool protect = false;
  std::vector<double> weight;
  std::vector<double> bias;
  double act_max = 1.0;
  LayerPartition part;
  SparsityMask mask;
};

struct TrainedModel {
  ModelSpec spec;
  QuantSpec quant;
  double density = 1.0;
  DstSchedule schedule;
  std::int64_t steps = 0;
  std::vector<LayerState> layers;
  std::vector<EpochMetrics> history;
};

/// Aborts with TrainingDiverged on a non-finite loss.
TrainedModel train(const TrainOptions& options, const Dataset& train_set, const Dataset& test_set);

/// Element mask (rows x cols) of a structured mask.
std::vector<std::uint8_t> element_mask(const SparsityMask& mask, const LayerPartition& part);

/// Reconstructs the network with trained weights, masks and ranges.
Model build_model(const TrainedModel& trained);

/// Fraction of correct predictions (digital, inference mode).
double accuracy(Model& model, const Dataset& data, int batch_size = 256);

/// Modeled energy and average power of one inference on the accelerator.
EnergyResult model_energy(const TrainedModel& trained, const PowerContext& ctx);
/// Kept / capacity over the sparse layers (1 when there are none).
double model_density(const TrainedModel& trained);

struct EvalResult {
  double clean_accuracy = 0.0;
  double noisy_accuracy = 0.0;  // mean over trials
  double nmae_mean = 0.0;
  double nmae_std = 0.0;
  std::vector<double> trial_accuracy;
  std::vector<double> trial_nmae;
};

/// Inference through the tensor-core simulator, n_trials independent noise
/// draws (seeded from setup.seed and the trial index). Protected layers run
/// crosstalk-free.
EvalResult evaluate_with_variation(const TrainedModel& trained, const Dataset& test,
                                   const PhotonicSetup& setup, int n_trials);

nlohmann::json checkpoint_json(const TrainedModel& trained);
TrainedModel checkpoint_from_json(const nlohmann::json& doc);
void save_checkpoint(const TrainedModel& trained, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

/// CSV with header epoch,loss,accuracy,density,power_mw.
void write_metrics_csv(const std::vector<EpochMetrics>& history, std::ostream& out);

}  // namespace sptc
