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

#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "explorer.hpp"
#include "sptc/error.hpp"

namespace sptc::explorer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
  std::string format = "csv";
  int threads = 1;
};

Config load(const Globals& g) {
  Config cfg = g.config_path.empty() ? parse_config(json::object()) : load_config(g.config_path);
  if (g.seed_set) cfg = with_override(cfg, "seed", g.seed);
  return cfg;
}

fs::path output_file(const Globals& g, const std::string& stem, const std::string& ext) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / (stem + "." + ext);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct Loaded {
  TrainedModel model;
  Dataset test;
};

// Model and held-out split for the checkpoint named in sweep.checkpoint.
std::unique_ptr<Loaded> load_eval_context(const Config& cfg, const std::string& checkpoint) {
  if (checkpoint.empty()) return nullptr;
  auto l = std::make_unique<Loaded>();
  l->model = load_checkpoint(checkpoint);
  l->test = load_training_data(cfg).second;
  return l;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse photonic tensor-core explorer", "sptc"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) { g.seed = s; g.seed_set = true; }, "Root seed override");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Validate a config and print the effective one");
  validate->add_option("path", validate_path, "Config file (defaults to --config)");

  auto* report = app.add_subcommand("report", "Power, area, PAP and N-MAE of one configuration");
  auto* sweep = app.add_subcommand("sweep", "Evaluate the sweep.axes grid");
  auto* progressive = app.add_subcommand("progressive", "Staged power-area walk");

  NmaeStudyOptions nmae_opts;
  auto* nmae = app.add_subcommand("nmae", "N-MAE of row patterns and gating modes on a conv layer");
  nmae->add_option("--vectors", nmae_opts.vectors, "Random inputs per trial")->check(CLI::PositiveNumber);
  nmae->add_option("--col-densities", nmae_opts.col_densities, "Column densities");

  std::string scenario_path;
  auto* simulate = app.add_subcommand("simulate", "Run a JSON scenario of tensor-core products");
  simulate->add_option("scenario", scenario_path, "Scenario file")->required();

  std::string dataset, checkpoint_name = "checkpoint";
  double density = -1.0;
  int epochs = -1;
  auto* train_cmd = app.add_subcommand("train", "Power-aware sparse training");
  train_cmd->add_option("--dataset", dataset, "CSV path or \"synthetic\"");
  train_cmd->add_option("--density", density, "Target density s");
  train_cmd->add_option("--epochs", epochs, "Training epochs");
  train_cmd->add_option("--name", checkpoint_name, "Output file stem")->capture_default_str();

  std::string eval_checkpoint;
  auto* evaluate = app.add_subcommand("evaluate", "Accuracy under thermal variation");
  evaluate->add_option("checkpoint", eval_checkpoint, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitConfig;
  }

  try {
    if (*validate) {
      Globals vg = g;
      if (!validate_path.empty()) vg.config_path = validate_path;
      if (vg.config_path.empty()) throw ConfigError("validate: no config file given");
      if (!fs::exists(vg.config_path)) throw ConfigError("validate: no such file " + vg.config_path);
      out << dump(to_json(load(vg)));
      return kExitOk;
    }

    const Config cfg = load(g);
    const bool as_json = g.format == "json";
    const std::string ext = as_json ? "json" : "csv";

    if (*report || *sweep) {
      auto loaded = load_eval_context(cfg, cfg.sweep.checkpoint);
      PointContext ctx;
      if (loaded) ctx = {&loaded->model, &loaded->test};
      const Report rep = *report ? run_report(cfg, ctx) : run_sweep(cfg, g.threads, ctx);
      std::ostringstream os;
      if (as_json) {
        os << dump(report_json(rep));
      } else {
        write_report_csv(rep, os);
      }
      const auto path = output_file(g, *report ? "report" : "sweep", ext);
      write_text(path, os.str());
      out << path.string() << "\n";
      return kExitOk;
    }
    if (*progressive) {
      const auto rows = run_progressive(cfg);
      std::ostringstream os;
      if (as_json) {
        os << dump(progressive_json(rows));
      } else {
        write_progressive_csv(rows, os);
      }
      const auto path = output_file(g, "progressive", ext);
      write_text(path, os.str());
      out << path.string() << "\n";
      return kExitOk;
    }
    if (*nmae) {
      nmae_opts.trials = cfg.sweep.trials;
      const auto rows = run_nmae_study(cfg, nmae_opts, g.threads);
      std::ostringstream os;
      if (as_json) {
        os << dump(nmae_json(rows));
      } else {
        write_nmae_csv(rows, os);
      }
      const auto path = output_file(g, "nmae", ext);
      write_text(path, os.str());
      out << path.string() << "\n";
      return kExitOk;
    }
    if (*simulate) {
      std::ifstream f(scenario_path);
      if (!f) throw ConfigError("simulate: cannot open " + scenario_path);
      json scenario;
      try {
        f >> scenario;
      } catch (const json::exception& e) {
        throw ConfigError(scenario_path + ": " + e.what());
      }
      const auto path = output_file(g, "simulate", "json");
      write_text(path, dump(simulate_scenario(scenario, cfg)));
      out << path.string() << "\n";
      return kExitOk;
    }
    if (*train_cmd) {
      Config tc = cfg;
      if (!dataset.empty()) tc = with_override(tc, "dst.dataset", dataset);
      if (density >= 0.0) tc = with_override(tc, "dst.density", density);
      if (epochs >= 0) tc = with_override(tc, "dst.epochs", epochs);
      const auto [train_set, test_set] = load_training_data(tc);
      const TrainedModel tm = train(train_options(tc), train_set, test_set);
      fs::create_directories(g.out_dir);
      const auto ckpt = fs::path(g.out_dir) / (checkpoint_name + ".json");
      save_checkpoint(tm, ckpt);
      std::ostringstream os;
      write_metrics_csv(tm.history, os);
      const auto metrics = fs::path(g.out_dir) / (checkpoint_name + "_metrics.csv");
      write_text(metrics, os.str());
      out << ckpt.string() << "\n" << metrics.string() << "\n";
      return kExitOk;
    }
    if (*evaluate) {
      const TrainedModel tm = load_checkpoint(eval_checkpoint);
      const Dataset test = load_training_data(cfg).second;
      PhotonicSetup setup{cfg.arch.arch, cfg.device, cfg.layout, GammaFit{},
                          MvmOptions{cfg.arch.mode, cfg.arch.output_gating, true},
                          scenario_seed(cfg.seed, Scenario::PointEval, 0, 0)};
      const EvalResult ev = evaluate_with_variation(tm, test, setup, cfg.dst.eval_trials);
      std::ostringstream os;
      if (as_json) {
        os << dump({{"schema_version", kSchemaVersion},
                    {"mode", to_string(cfg.arch.mode)},
                    {"output_gating", cfg.arch.output_gating},
                    {"l_s_um", cfg.layout.l_s_um},
                    {"l_g_um", cfg.layout.l_g_um},
                    {"trials", cfg.dst.eval_trials},
                    {"acc_clean", ev.clean_accuracy},
                    {"acc_noisy", ev.noisy_accuracy},
                    {"nmae_mean", ev.nmae_mean},
                    {"nmae_std", ev.nmae_std},
                    {"trial_accuracy", ev.trial_accuracy},
                    {"trial_nmae", ev.trial_nmae}});
      } else {
        os << "mode,output_gating,l_s_um,l_g_um,trials,acc_clean,acc_noisy,nmae_mean,nmae_std\n"
           << to_string(cfg.arch.mode) << ',' << (cfg.arch.output_gating ? "true" : "false")
           << ',' << fmt_number(cfg.layout.l_s_um) << ',' << fmt_number(cfg.layout.l_g_um) << ','
           << cfg.dst.eval_trials << ',' << fmt_number(ev.clean_accuracy) << ','
           << fmt_number(ev.noisy_accuracy) << ',' << fmt_number(ev.nmae_mean) << ','
           << fmt_number(ev.nmae_std) << '\n';
      }
      const auto path = output_file(g, "evaluate", ext);
      write_text(path, os.str());
      out << path.string() << "\n";
      return kExitOk;
    }
  } catch (const ConfigErrorList& e) {
    for (const auto& m : e.errors()) err << "config error: " << m << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace sptc::explorer
