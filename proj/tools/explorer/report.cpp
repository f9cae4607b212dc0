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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "explorer.hpp"
#include "sptc/error.hpp"
#include "sptc/photonic_backend.hpp"
#include "sptc/rng.hpp"

namespace sptc::explorer {

using nlohmann::json;

std::uint64_t scenario_seed(std::uint64_t root, Scenario s, std::uint64_t point,
                            std::uint64_t trial) {
  return derive_seed({root, static_cast<std::uint64_t>(s), point, trial});
}

std::string fmt_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<GridPoint> expand_grid(const Config& base) {
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < base.sweep.axes.size(); ++i) {
    const auto& ax = base.sweep.axes[i];
    if (ax.values.empty()) {
      errors.push_back("sweep.axes[" + std::to_string(i) + "].values: must not be empty");
    }
    if (!has_key(base, ax.key)) {
      errors.push_back("sweep.axes[" + std::to_string(i) + "].key: unknown key \"" + ax.key + "\"");
    }
  }
  if (!errors.empty()) throw ConfigErrorList(errors);

  std::size_t total = 1;
  for (const auto& ax : base.sweep.axes) total *= ax.values.size();
  std::vector<GridPoint> out;
  out.reserve(total);
  const std::size_t n_axes = base.sweep.axes.size();
  std::vector<std::size_t> idx(n_axes, 0);
  for (std::size_t p = 0; p < total; ++p) {
    GridPoint gp;
    gp.index = p;
    gp.config = base;
    try {
      for (std::size_t a = 0; a < n_axes; ++a) {
        const auto& ax = base.sweep.axes[a];
        gp.values[ax.key] = ax.values[idx[a]];
        gp.config = with_override(gp.config, ax.key, ax.values[idx[a]]);
      }
    } catch (const ConfigErrorList& e) {
      for (const auto& m : e.errors()) gp.error += (gp.error.empty() ? "" : "; ") + m;
    } catch (const ConfigError& e) {
      gp.error = e.what();
    }
    // Odometer, last axis fastest.
    for (std::size_t a = n_axes; a-- > 0;) {
      if (++idx[a] < base.sweep.axes[a].values.size()) break;
      idx[a] = 0;
    }
    out.push_back(std::move(gp));
  }
  return out;
}

WorkloadSample sample_workload(const Config& config) {
  WorkloadSample s;
  const PowerContext ctx = config.power_context();
  s.layers = config.arch.workload;
  for (std::size_t li = 0; li < s.layers.size(); ++li) {
    const auto& layer = s.layers[li];
    const LayerPartition part = make_partition(layer.dims, config.arch.arch);
    Rng rng(scenario_seed(config.seed, Scenario::Workload, li, 0));
    std::vector<double> w(static_cast<std::size_t>(part.rows) * part.cols);
    for (double& v : w) v = rng.uniform(-1.0, 1.0);
    SparsityMask mask = layer.sparse
                            ? init_masks(config.arch.density, part, w, config.arch.mask_init, ctx,
                                         config.dst.max_combinations, rng)
                            : dense_mask(part);
    apply_mask<double>(w, mask, part);
    s.parts.push_back(part);
    s.weights.push_back(std::move(w));
    s.masks.push_back(std::move(mask));
  }
  return s;
}

WorkloadPower workload_power(const Config& config, const WorkloadSample& sample) {
  const ArchConfig& arch = config.arch.arch;
  const GammaFit fit;
  std::vector<ScheduleEntry> schedule;
  for (std::size_t li = 0; li < sample.layers.size(); ++li) {
    const auto chunks = chunk_states(sample.weights[li], sample.masks[li], sample.parts[li]);
    auto entries = layer_schedule(sample.layers[li].name, sample.layers[li].dims, chunks, arch,
                                  config.device, config.layout, fit, config.gating());
    schedule.insert(schedule.end(), entries.begin(), entries.end());
  }
  WorkloadPower wp;
  wp.energy = energy(arch, schedule);
  wp.area = area(arch, config.device, config.layout);
  wp.pap = pap(wp.energy.p_avg_w, wp.area.total_mm2);
  const double channel = input_channel_power(arch, config.device);
  const double mod = modulator_power(arch.f_ghz, config.device);
  wp.dac_power_w = channel > 0.0 ? wp.energy.avg.input_mw * (channel - mod) / channel * 1e-3 : 0.0;
  wp.dac_area_mm2 = static_cast<double>(arch.R) * arch.C / arch.r * arch.k2 *
                    config.device.a_dac_um2 * arch.dac_segments() * 1e-6;
  return wp;
}

namespace {

void fill_static(ReportRow& row, const Config& config) {
  row.l_s_um = config.layout.l_s_um;
  row.l_g_um = config.layout.l_g_um;
  row.r = config.arch.arch.r;
  row.c = config.arch.arch.c;
  row.density = config.arch.density;
  row.mode = to_string(config.arch.mode);
  row.output_gating = config.arch.output_gating;
  row.dac = to_string(config.arch.arch.dac_kind);
}

double workload_nmae(const Config& config, const WorkloadSample& sample, std::uint64_t point) {
  std::size_t li = 0;
  for (std::size_t i = 0; i < sample.layers.size(); ++i) {
    if (sample.layers[i].sparse) {
      li = i;
      break;
    }
  }
  const auto& part = sample.parts[li];
  const ArchConfig& arch = config.arch.arch;
  auto kernel = std::make_shared<const CrosstalkKernel>(CoreShape{arch.k1, arch.k2},
                                                        config.layout, GammaFit{});
  MvmOptions opts{config.arch.mode, config.arch.output_gating, true};
  MappedMatrix mm(sample.weights[li], part.rows, part.cols, element_mask(sample.masks[li], part),
                  arch, kernel, config.device, opts);
  constexpr int kVectors = 4;
  std::vector<double> x(static_cast<std::size_t>(kVectors) * part.cols);
  std::vector<double> y(static_cast<std::size_t>(kVectors) * part.rows);
  std::vector<double> ref(y.size());
  double err = 0.0, den = 0.0;
  for (int t = 0; t < config.sweep.trials; ++t) {
    Rng rng(scenario_seed(config.seed, Scenario::PointNmae, point, static_cast<std::uint64_t>(t)));
    for (double& v : x) v = rng.uniform();
    mm.multiply(x, kVectors, rng, y);
    mm.ideal(x, kVectors, ref);
    for (std::size_t i = 0; i < y.size(); ++i) {
      err += std::abs(y[i] - ref[i]);
      den += std::abs(ref[i]);
    }
  }
  if (!(den > 0.0)) throw DomainError("N-MAE undefined: all reference outputs are zero");
  return err / den;
}

}  // namespace


ReportRow evaluate_point(const Config& config, std::uint64_t point_index, const PointContext& ctx) {
  ReportRow row;
  fill_static(row, config);
  const WorkloadSample sample = sample_workload(config);
  const WorkloadPower wp = workload_power(config, sample);
  row.p_avg_w = wp.energy.p_avg_w;
  row.area_mm2 = wp.area.total_mm2;
  row.pap = wp.pap;
  row.e_tot_mj = wp.energy.e_tot_mj;
  row.p_in_w = wp.energy.avg.input_mw * 1e-3;
  row.p_wgt_w = wp.energy.avg.weight_mw * 1e-3;
  row.p_out_w = wp.energy.avg.readout_mw * 1e-3;
  row.p_rerouter_w = wp.energy.avg.rerouter_mw * 1e-3;
  if (ctx.model != nullptr && ctx.test != nullptr) {
    PhotonicSetup setup{config.arch.arch, config.device, config.layout, GammaFit{},
                        MvmOptions{config.arch.mode, config.arch.output_gating, true},
                        scenario_seed(config.seed, Scenario::PointEval, point_index, 0)};
    const EvalResult ev = evaluate_with_variation(*ctx.model, *ctx.test, setup, config.sweep.trials);
    row.acc_clean = ev.clean_accuracy;
    row.acc_noisy = ev.noisy_accuracy;
    row.nmae = ev.nmae_mean;
  } else {
    row.nmae = workload_nmae(config, sample, point_index);
  }
  return row;
}

namespace {

void flag_pap_min(Report& report) {
  double best = std::numeric_limits<double>::infinity();
  report.pap_min_index = -1;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    if (r.error.empty() && std::isfinite(r.pap) && r.pap < best) {
      best = r.pap;
      report.pap_min_index = static_cast<int>(i);
    }
  }
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    report.rows[i].pap_min = static_cast<int>(i) == report.pap_min_index;
  }
}

ReportRow evaluate_guarded(const GridPoint& gp, const PointContext& ctx) {
  if (!gp.error.empty()) {
    ReportRow row;
    fill_static(row, gp.config);
    row.point = gp.values;
    row.error = gp.error;
    return row;
  }
  try {
    ReportRow row = evaluate_point(gp.config, gp.index, ctx);
    row.point = gp.values;
    return row;
  } catch (const std::exception& e) {
    ReportRow row;
    fill_static(row, gp.config);
    row.point = gp.values;
    row.error = e.what();
    return row;
  }
}

}  // namespace

Report run_sweep(const Config& config, int threads, const PointContext& ctx) {
  const auto grid = expand_grid(config);
  Report report;
  for (const auto& ax : config.sweep.axes) report.axes.push_back(ax.key);
  report.rows.resize(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      report.rows[i] = evaluate_guarded(grid[i], ctx);
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(grid.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  flag_pap_min(report);
  return report;
}

Report run_report(const Config& config, const PointContext& ctx) {
  GridPoint gp;
  gp.config = config;
  Report report;
  report.rows.push_back(evaluate_guarded(gp, ctx));
  flag_pap_min(report);
  return report;
}

void write_report_csv(const Report& report, std::ostream& out) {
  out << "l_s_um,l_g_um,acc_clean,acc_noisy,p_avg_w,area_mm2,pap,e_tot_mj,p_in_w,p_wgt_w,"
         "p_out_w,p_rerouter_w,r,c,density,mode,output_gating,dac,nmae,pap_min,error\n";
  for (const auto& r : report.rows) {
    out << fmt_number(r.l_s_um) << ',' << fmt_number(r.l_g_um) << ',' << fmt_number(r.acc_clean)
        << ',' << fmt_number(r.acc_noisy) << ',' << fmt_number(r.p_avg_w) << ','
        << fmt_number(r.area_mm2) << ',' << fmt_number(r.pap) << ',' << fmt_number(r.e_tot_mj)
        << ',' << fmt_number(r.p_in_w) << ',' << fmt_number(r.p_wgt_w) << ','
        << fmt_number(r.p_out_w) << ',' << fmt_number(r.p_rerouter_w) << ',' << r.r << ','
        << r.c << ',' << fmt_number(r.density) << ',' << r.mode << ','
        << (r.output_gating ? "true" : "false") << ',' << r.dac << ',' << fmt_number(r.nmae)
        << ',' << (r.pap_min ? "true" : "false") << ',' << csv_cell(r.error) << '\n';
  }
}

namespace {

json num(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

json report_json(const Report& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"point", r.point},
                    {"l_s_um", num(r.l_s_um)},
                    {"l_g_um", num(r.l_g_um)},
                    {"acc_clean", num(r.acc_clean)},
                    {"acc_noisy", num(r.acc_noisy)},
                    {"p_avg_w", num(r.p_avg_w)},
                    {"area_mm2", num(r.area_mm2)},
                    {"pap", num(r.pap)},
                    {"e_tot_mj", num(r.e_tot_mj)},
                    {"p_in_w", num(r.p_in_w)},
                    {"p_wgt_w", num(r.p_wgt_w)},
                    {"p_out_w", num(r.p_out_w)},
                    {"p_rerouter_w", num(r.p_rerouter_w)},
                    {"r", r.r},
                    {"c", r.c},
                    {"density", num(r.density)},
                    {"mode", r.mode},
                    {"output_gating", r.output_gating},
                    {"dac", r.dac},
                    {"nmae", num(r.nmae)},
                    {"pap_min", r.pap_min},
                    {"error", r.error.empty() ? json(nullptr) : json(r.error)}});
  }
  return {{"schema_version", kSchemaVersion},
          {"axes", report.axes},
          {"pap_min_index", report.pap_min_index < 0 ? json(nullptr) : json(report.pap_min_index)},
          {"rows", rows}};
}

}  // namespace sptc::explorer
