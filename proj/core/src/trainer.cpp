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

#include "sptc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sptc/error.hpp"
#include "sptc/rng.hpp"

namespace sptc {

namespace {

using nlohmann::json;

std::string fmt10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int kernel_of(const MatmulLayer& layer) {
  if (const auto* conv = dynamic_cast<const Conv2d*>(&layer)) return conv->kernel();
  return 1;
}

LayerDims dims_of(const LayerState& ls) {
  return LayerDims{ls.rows, ls.cols / (ls.kernel * ls.kernel), ls.kernel, ls.positions};
}

void install_mask(MatmulLayer& layer, const LayerState& ls) {
  if (!ls.sparse) {
    layer.set_mask({}, {});
    return;
  }
  std::vector<std::uint8_t> rows(ls.rows);
  for (int o = 0; o < ls.rows; ++o) rows[o] = ls.mask.row[o % ls.part.chunk_rows];
  layer.set_mask(element_mask(ls.mask, ls.part), std::move(rows));
}

// Normalized effective weights, the matrix the hardware would hold.
std::vector<double> scored_matrix(const MatmulLayer& layer) {
  return normalize_weights(layer.effective_weights());
}

std::vector<LayerState> snapshot(Model& model, const std::vector<LayerState>& shapes) {
  std::vector<LayerState> out = shapes;
  auto mms = model.matmul_layers();
  for (std::size_t i = 0; i < mms.size(); ++i) {
    out[i].weight = mms[i]->weight().value;
    out[i].bias = mms[i]->bias().value;
    out[i].act_max = mms[i]->act_max();
  }
  return out;
}

json spec_json(const ModelSpec& s) {
  json layers = json::array();
  for (const auto& l : s.layers) {
    const char* kind = l.kind == LayerSpec::Kind::Conv     ? "conv"
                       : l.kind == LayerSpec::Kind::Linear ? "linear"
                                                           : "maxpool";
    layers.push_back({{"kind", kind},
                      {"out", l.out},
                      {"kernel", l.kernel},
                      {"padding", l.padding},
                      {"sparse", l.sparse},
                      {"protect", l.protect}});
  }
  return {{"in_c", s.in_c}, {"in_h", s.in_h}, {"in_w", s.in_w}, {"classes", s.classes},
          {"layers", layers}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.in_c = j.at("in_c").get<int>();
  s.in_h = j.at("in_h").get<int>();
  s.in_w = j.at("in_w").get<int>();
  s.classes = j.at("classes").get<int>();
  for (const auto& l : j.at("layers")) {
    LayerSpec ls;
    const auto kind = l.at("kind").get<std::string>();
    if (kind == "conv") {
      ls.kind = LayerSpec::Kind::Conv;
    } else if (kind == "linear") {
      ls.kind = LayerSpec::Kind::Linear;
    } else if (kind == "maxpool") {
      ls.kind = LayerSpec::Kind::MaxPool;
    } else {
      throw PreconditionError("checkpoint: unknown layer kind " + kind);
    }
    ls.out = l.at("out").get<int>();
    ls.kernel = l.at("kernel").get<int>();
    ls.padding = l.at("padding").get<int>();
    ls.sparse = l.at("sparse").get<bool>();
    ls.protect = l.at("protect").get<bool>();
    s.layers.push_back(ls);
  }
  return s;
}

}  // namespace

TrainOptions train_options(const Config& config) {
  TrainOptions o;
  const DstSection& d = config.dst;
  o.density = d.density;
  o.epochs = d.epochs;
  o.batch_size = d.batch_size;
  o.lr = d.lr;
  o.weight_decay = d.weight_decay;
  o.alpha0 = d.alpha0;
  o.t_end_fraction = d.t_end_fraction;
  o.delta_m = d.delta_m;
  o.max_combinations = d.max_combinations;
  o.mask_init = config.arch.mask_init;
  o.power = config.power_context();
  o.power.policy = GatingPolicy{d.power_mode, d.power_output_gating};
  o.quant.weight_bits = config.arch.arch.b_w;
  o.quant.act_bits = config.arch.arch.b_in;
  o.seed = config.seed;
  return o;
}

std::pair<Dataset, Dataset> load_training_data(const Config& config) {
  const DstSection& d = config.dst;
  Dataset all = d.dataset == "synthetic" ? synthetic_blobs(1000, 10, config.seed)
                                         : load_digits_csv(d.dataset);
  return split_dataset(all, d.train_fraction, config.seed);
}

std::vector<std::uint8_t> element_mask(const SparsityMask& mask, const LayerPartition& part) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(part.rows) * part.cols);
  for (int o = 0; o < part.rows; ++o) {
    for (int k = 0; k < part.cols; ++k) {
      out[static_cast<std::size_t>(o) * part.cols + k] = mask.element(part, o, k) ? 1 : 0;
    }
  }
  return out;
}

double accuracy(Model& model, const Dataset& data, int batch_size) {
  if (data.size() == 0) throw PreconditionError("accuracy: empty dataset");
  int correct = 0;
  std::vector<int> idx, labels;
  for (int start = 0; start < data.size(); start += batch_size) {
    const int end = std::min(data.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor x = data.batch(idx, labels);
    const auto pred = argmax_rows(model.forward(x, false));
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / data.size();
}

EnergyResult model_energy(const TrainedModel& trained, const PowerContext& ctx) {
  std::vector<ScheduleEntry> schedule;
  for (const auto& ls : trained.layers) {
    const LayerDims dims = dims_of(ls);
    const LayerPartition part = make_partition(dims, ctx.arch);
    SparsityMask mask = dense_mask(part);
    if (ls.sparse) {
      if (part.chunk_rows != ls.part.chunk_rows || part.chunk_cols != ls.part.chunk_cols) {
        throw PreconditionError("model_energy: chunk shape differs from the trained partition");
      }
      mask = ls.mask;
    }
    std::vector<double> w = ls.weight;
    apply_mask<double>(w, mask, part);
    if (trained.quant.enabled) w = quantize_symmetric(w, trained.quant.weight_bits);
    const auto chunks = chunk_states(normalize_weights(w), mask, part);
    auto entries = layer_schedule(ls.name, dims, chunks, ctx.arch, ctx.device, ctx.layout,
                                  ctx.fit, ctx.policy);
    schedule.insert(schedule.end(), entries.begin(), entries.end());
  }
  return energy(ctx.arch, schedule);
}

double model_density(const TrainedModel& trained) {
  std::int64_t kept = 0, cap = 0;
  for (const auto& ls : trained.layers) {
    if (!ls.sparse) continue;
    kept += kept_elements(ls.mask, ls.part);
    cap += mask_capacity(ls.part);
  }
  return cap == 0 ? 1.0 : static_cast<double>(kept) / static_cast<double>(cap);
}

TrainedModel train(const TrainOptions& options, const Dataset& train_set, const Dataset& test_set) {
  if (options.epochs < 1) throw ConfigError("dst.epochs must be >= 1");
  if (options.batch_size < 1) throw ConfigError("dst.batch_size must be >= 1");
  if (!(options.lr > 0.0)) throw ConfigError("dst.lr must be > 0");
  if (!(options.t_end_fraction > 0.0 && options.t_end_fraction < 1.0)) {
    throw ConfigError("dst.t_end_fraction must be in (0, 1)");
  }
  const auto [sr, sc] = split_density(options.density);
  (void)sr;
  const ModelSpec& spec = options.model;
  if (train_set.size() == 0 || test_set.size() == 0) throw PreconditionError("train: empty dataset");
  if (train_set.channels != spec.in_c || train_set.height != spec.in_h ||
      train_set.width != spec.in_w) {
    if (train_set.features() != spec.in_c * spec.in_h * spec.in_w) {
      throw PreconditionError("train: dataset shape does not match the model input");
    }
  }
  const ArchConfig& arch = options.power.arch;
  arch.validate();

  Rng init_rng(derive_seed({options.seed, 0x6d6f64656cULL}));
  Model model(spec, options.quant, init_rng);
  auto mms = model.matmul_layers();

  TrainedModel out;
  out.spec = spec;
  out.quant = options.quant;
  out.density = options.density;

  std::vector<LayerState> states;
  Rng mask_rng(derive_seed({options.seed, 0x6d61736bULL}));
  for (std::size_t i = 0; i < mms.size(); ++i) {
    MatmulLayer& l = *mms[i];
    LayerState ls;
    ls.name = l.name();
    ls.rows = l.rows();
    ls.cols = l.cols();
    ls.kernel = kernel_of(l);
    ls.positions = model.positions()[i];
    ls.sparse = l.sparse;
    ls.protect = l.protect;
    ls.part = make_partition(dims_of(ls), arch);
    ls.mask = ls.sparse ? init_masks(options.density, ls.part, scored_matrix(l), options.mask_init,
                                     options.power, options.max_combinations, mask_rng)
                        : dense_mask(ls.part);
    install_mask(l, ls);
    states.push_back(std::move(ls));
  }

  const int n_train = train_set.size();
  const int steps_per_epoch = (n_train + options.batch_size - 1) / options.batch_size;
  const std::int64_t total_steps = static_cast<std::int64_t>(steps_per_epoch) * options.epochs;
  DstSchedule sched;
  sched.alpha0 = options.alpha0;
  sched.delta_t = steps_per_epoch;
  sched.t_end = static_cast<int>(std::max<std::int64_t>(
      1, round_half_up(options.t_end_fraction * static_cast<double>(total_steps))));
  sched.delta_m = options.delta_m;
  sched.max_combinations = options.max_combinations;
  sched.validate();
  out.schedule = sched;

  AdamW opt(0.9, 0.999, 1e-8, options.weight_decay);
  auto params = model.params();
  std::int64_t step = 0;
  std::vector<int> order(n_train), labels;
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Rng shuffle(derive_seed({options.seed, 0x65706f6368ULL, static_cast<std::uint64_t>(epoch)}));
    for (int i = n_train - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle.below(static_cast<std::uint64_t>(i) + 1)]);
    }
    for (auto* l : mms) l->reset_dense_grad();
    double loss_sum = 0.0;
    for (int b = 0; b < steps_per_epoch; ++b) {
      const int start = b * options.batch_size;
      const int end = std::min(n_train, start + options.batch_size);
      std::span<const int> idx(order.data() + start, static_cast<std::size_t>(end - start));
      const Tensor x = train_set.batch(idx, labels);
      const Tensor logits = model.forward(x, true);
      Tensor grad;
      const double loss = softmax_cross_entropy(logits, labels, grad);
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "training diverged: loss " << loss << " at epoch " << epoch << ", step " << step
           << " (lr " << options.lr << "); try a smaller learning rate";
        throw TrainingDiverged(os.str());
      }
      loss_sum += loss;
      model.backward(grad);
      opt.step(params, cosine_lr(options.lr, step, total_steps));
      for (auto* l : mms) l->apply_mask();
      for (const Param* prm : params) {
        if (!std::all_of(prm->value.begin(), prm->value.end(), [](double v) { return std::isfinite(v); })) {
          std::ostringstream os;
          os << "training diverged: non-finite " << prm->name << " at epoch " << epoch << ", step "
             << step << " (lr " << options.lr << "); try a smaller learning rate";
          throw TrainingDiverged(os.str());
        }
      }
      ++step;
    }

    // Mask update at the epoch boundary, only while column sparsity is in play.
    if (sc < 1.0 && step < sched.t_end) {
      for (std::size_t i = 0; i < mms.size(); ++i) {
        LayerState& ls = states[i];
        if (!ls.sparse) continue;
        MatmulLayer& l = *mms[i];
        const auto scored = scored_matrix(l);
        prune_step(ls.mask, ls.part, l.weight().value, scored, sched, static_cast<int>(step),
                   options.power);
        grow_step(ls.mask, ls.part, options.density, l.dense_grad(), scored, sched, options.power);
        install_mask(l, ls);
      }
    }

    out.layers = snapshot(model, states);
    out.steps = step;
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.loss = loss_sum / steps_per_epoch;
    m.accuracy = accuracy(model, test_set);
    m.density = model_density(out);
    m.power_mw = model_energy(out, options.power).p_avg_w * 1e3;
    out.history.push_back(m);
  }
  return out;
}

Model build_model(const TrainedModel& trained) {
  Rng unused(0);
  Model model(trained.spec, trained.quant, unused);
  auto mms = model.matmul_layers();
  if (mms.size() != trained.layers.size()) {
    throw PreconditionError("build_model: layer count does not match the model spec");
  }
  for (std::size_t i = 0; i < mms.size(); ++i) {
    const LayerState& ls = trained.layers[i];
    MatmulLayer& l = *mms[i];
    if (l.rows() != ls.rows || l.cols() != ls.cols || ls.weight.size() != l.weight().value.size() ||
        ls.bias.size() != l.bias().value.size()) {
      throw PreconditionError("build_model: shape mismatch in layer " + ls.name);
    }
    l.weight().value = ls.weight;
    l.bias().value = ls.bias;
    l.set_act_max(ls.act_max);
    install_mask(l, ls);
  }
  return model;
}

EvalResult evaluate_with_variation(const TrainedModel& trained, const Dataset& test,
                                   const PhotonicSetup& setup, int n_trials) {
  if (n_trials < 1) throw PreconditionError("evaluate_with_variation: n_trials must be >= 1");
  Model model = build_model(trained);
  EvalResult r;
  r.clean_accuracy = accuracy(model, test);
  for (int t = 0; t < n_trials; ++t) {
    PhotonicSetup s = setup;
    s.seed = derive_seed({setup.seed, 0x747269616cULL, static_cast<std::uint64_t>(t)});
    PhotonicBackend backend(s);
    backend.map_model(model);
    r.trial_accuracy.push_back(accuracy(model, test));
    r.trial_nmae.push_back(backend.nmae());
    model.set_backend(nullptr);
  }
  const double n = n_trials;
  r.noisy_accuracy = std::accumulate(r.trial_accuracy.begin(), r.trial_accuracy.end(), 0.0) / n;
  r.nmae_mean = std::accumulate(r.trial_nmae.begin(), r.trial_nmae.end(), 0.0) / n;
  double var = 0.0;
  for (double v : r.trial_nmae) var += (v - r.nmae_mean) * (v - r.nmae_mean);
  r.nmae_std = n_trials > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return r;
}

nlohmann::json checkpoint_json(const TrainedModel& t) {
  json layers = json::array();
  for (const auto& ls : t.layers) {
    layers.push_back({{"name", ls.name},
                      {"rows", ls.rows},
                      {"cols", ls.cols},
                      {"kernel", ls.kernel},
                      {"positions", ls.positions},
                      {"sparse", ls.sparse},
                      {"protect", ls.protect},
                      {"weight", ls.weight},
                      {"bias", ls.bias},
                      {"act_max", ls.act_max},
                      {"partition",
                       {{"p", ls.part.p},
                        {"q", ls.part.q},
                        {"chunk_rows", ls.part.chunk_rows},
                        {"chunk_cols", ls.part.chunk_cols}}},
                      {"row_mask", ls.mask.row},
                      {"col_mask", ls.mask.col}});
  }
  json history = json::array();
  for (const auto& m : t.history) {
    history.push_back({{"epoch", m.epoch},
                       {"loss", m.loss},
                       {"accuracy", m.accuracy},
                       {"density", m.density},
                       {"power_mw", m.power_mw}});
  }
  return {{"format", "sptc-checkpoint"},
          {"version", 1},
          {"model", spec_json(t.spec)},
          {"quant",
           {{"enabled", t.quant.enabled},
            {"weight_bits", t.quant.weight_bits},
            {"act_bits", t.quant.act_bits},
            {"act_momentum", t.quant.act_momentum}}},
          {"density", t.density},
          {"schedule",
           {{"alpha0", t.schedule.alpha0},
            {"delta_t", t.schedule.delta_t},
            {"t_end", t.schedule.t_end},
            {"delta_m", t.schedule.delta_m},
            {"max_combinations", t.schedule.max_combinations},
            {"step", t.steps}}},
          {"layers", layers},
          {"history", history}};
}

TrainedModel checkpoint_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "sptc-checkpoint") {
      throw PreconditionError("not an sptc checkpoint");
    }
    if (doc.at("version").get<int>() != 1) {
      throw PreconditionError("unsupported checkpoint version");
    }
    TrainedModel t;
    t.spec = spec_from_json(doc.at("model"));
    const auto& q = doc.at("quant");
    t.quant.enabled = q.at("enabled").get<bool>();
    t.quant.weight_bits = q.at("weight_bits").get<int>();
    t.quant.act_bits = q.at("act_bits").get<int>();
    t.quant.act_momentum = q.at("act_momentum").get<double>();
    t.density = doc.at("density").get<double>();
    const auto& s = doc.at("schedule");
    t.schedule.alpha0 = s.at("alpha0").get<double>();
    t.schedule.delta_t = s.at("delta_t").get<int>();
    t.schedule.t_end = s.at("t_end").get<int>();
    t.schedule.delta_m = s.at("delta_m").get<int>();
    t.schedule.max_combinations = s.at("max_combinations").get<std::uint64_t>();
    t.steps = s.at("step").get<std::int64_t>();
    for (const auto& l : doc.at("layers")) {
      LayerState ls;
      ls.name = l.at("name").get<std::string>();
      ls.rows = l.at("rows").get<int>();
      ls.cols = l.at("cols").get<int>();
      ls.kernel = l.at("kernel").get<int>();
      ls.positions = l.at("positions").get<int>();
      ls.sparse = l.at("sparse").get<bool>();
      ls.protect = l.at("protect").get<bool>();
      ls.weight = l.at("weight").get<std::vector<double>>();
      ls.bias = l.at("bias").get<std::vector<double>>();
      ls.act_max = l.at("act_max").get<double>();
      const auto& p = l.at("partition");
      ls.part.rows = ls.rows;
      ls.part.cols = ls.cols;
      ls.part.p = p.at("p").get<int>();
      ls.part.q = p.at("q").get<int>();
      ls.part.chunk_rows = p.at("chunk_rows").get<int>();
      ls.part.chunk_cols = p.at("chunk_cols").get<int>();
      ls.mask.row = l.at("row_mask").get<std::vector<std::uint8_t>>();
      ls.mask.col = l.at("col_mask").get<std::vector<std::uint8_t>>();
      check_mask(ls.mask, ls.part);
      t.layers.push_back(std::move(ls));
    }
    for (const auto& h : doc.at("history")) {
      EpochMetrics m;
      m.epoch = h.at("epoch").get<int>();
      m.loss = h.at("loss").get<double>();
      m.accuracy = h.at("accuracy").get<double>();
      m.density = h.at("density").get<double>();
      m.power_mw = h.at("power_mw").get<double>();
      t.history.push_back(m);
    }
    return t;
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const TrainedModel& trained, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write " + path.string());
  out << checkpoint_json(trained).dump(1) << '\n';
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open checkpoint " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw PreconditionError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

void write_metrics_csv(const std::vector<EpochMetrics>& history, std::ostream& out) {
  out << "epoch,loss,accuracy,density,power_mw\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << fmt10(m.loss) << ',' << fmt10(m.accuracy) << ','
        << fmt10(m.density) << ',' << fmt10(m.power_mw) << '\n';
  }
}

}  // namespace sptc
