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

#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include "explorer.hpp"
#include "sptc/error.hpp"
#include "sptc/photonic_backend.hpp"
#include "sptc/rng.hpp"

namespace sptc::explorer {

using nlohmann::json;

std::vector<NmaeCase> nmae_cases(const NmaeStudyOptions& options) {
  std::vector<NmaeCase> out;
  for (const auto& pattern : options.row_patterns) {
    if (pattern != "dense" && pattern != "blocked" && pattern != "interleaved") {
      throw ConfigError("unknown row pattern \"" + pattern + "\"");
    }
    const double d = pattern == "dense" ? 1.0 : options.row_density;
    for (bool og : {false, true}) {
      out.push_back({"row", pattern, d, ExecutionMode::PruneOnly, og});
    }
  }
  for (double d : options.col_densities) {
    if (!(d > 0.0 && d <= 1.0)) throw ConfigError("column density must be in (0, 1]");
    for (auto mode : {ExecutionMode::PruneOnly, ExecutionMode::InputGating,
                      ExecutionMode::InputGatingRedistribution}) {
      out.push_back({"col", "random", d, mode, false});
    }
  }
  return out;
}

namespace {

std::vector<std::uint8_t> row_pattern(const std::string& pattern, int n, double d) {
  if (pattern == "interleaved") return interleaved_ones(n, d);
  std::vector<std::uint8_t> m(n, 1);
  if (pattern == "blocked") {
    const int keep = static_cast<int>(round_half_up(n * d));
    std::fill(m.begin() + keep, m.end(), 0);
  }
  return m;
}

}  // namespace

std::vector<double> nmae_trial(const Config& config, const NmaeStudyOptions& options,
                               std::uint64_t point_index, std::uint64_t trial) {
  const auto cases = nmae_cases(options);
  const ArchConfig& arch = config.arch.arch;
  const int rows = options.c_out;
  const int cols = options.c_in * options.kernel * options.kernel;
  if (rows < 1 || cols < 1 || options.vectors < 1) {
    throw PreconditionError("nmae study: layer and vector counts must be >= 1");
  }
  const std::uint64_t base = scenario_seed(config.seed, Scenario::NmaeStudy, point_index, trial);
  Rng data_rng(base);
  std::vector<double> w(static_cast<std::size_t>(rows) * cols);
  for (double& v : w) v = data_rng.uniform(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(options.vectors) * cols);
  for (double& v : x) v = data_rng.uniform();

  const LayerPartition part =
      make_partition(LayerDims{rows, options.c_in, options.kernel, 1}, arch);
  auto kernel = std::make_shared<const CrosstalkKernel>(CoreShape{arch.k1, arch.k2},
                                                        config.layout, GammaFit{});
  std::vector<double> y(static_cast<std::size_t>(options.vectors) * rows), ref(y.size());
  std::vector<double> out(cases.size(), 0.0);

  std::size_t i = 0;
  int col_group = 0;
  while (i < cases.size()) {
    // Cases sharing (study, pattern, density) share one mapped matrix.
    std::size_t j = i;
    while (j < cases.size() && cases[j].study == cases[i].study &&
           cases[j].pattern == cases[i].pattern && cases[j].density == cases[i].density) {
      ++j;
    }
    std::vector<std::uint8_t> mask(w.size(), 1);
    if (cases[i].study == "row") {
      const auto pat = row_pattern(cases[i].pattern, part.chunk_rows, cases[i].density);
      for (int o = 0; o < rows; ++o) {
        if (!pat[o % part.chunk_rows]) {
          std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(o) * cols, cols, 0);
        }
      }
    } else {
      Rng col_rng(derive_seed({base, 0x636f6cULL, static_cast<std::uint64_t>(col_group++)}));
      for (int pi = 0; pi < part.p; ++pi) {
        for (int qi = 0; qi < part.q; ++qi) {
          const int real = part.real_cols_in(qi);
          std::vector<int> ids(real);
          std::iota(ids.begin(), ids.end(), qi * part.chunk_cols);
          for (int a = real - 1; a > 0; --a) {
            std::swap(ids[a], ids[col_rng.below(static_cast<std::uint64_t>(a) + 1)]);
          }
          const int keep = static_cast<int>(round_half_up(real * cases[i].density));
          for (int a = keep; a < real; ++a) {
            const int k = ids[a];
            for (int r = 0; r < part.chunk_rows; ++r) {
              const int o = pi * part.chunk_rows + r;
              if (o < rows) mask[static_cast<std::size_t>(o) * cols + k] = 0;
            }
          }
        }
      }
    }
    MappedMatrix mm(w, rows, cols, mask, arch, kernel, config.device,
                    MvmOptions{cases[i].mode, cases[i].output_gating, true});
    mm.ideal(x, options.vectors, ref);
    double den = 0.0;
    for (double v : ref) den += std::abs(v);
    for (std::size_t c = i; c < j; ++c) {
      mm.set_gating(cases[c].mode, cases[c].output_gating);
      Rng noise(scenario_seed(config.seed, Scenario::NmaeNoise, point_index, trial));
      mm.multiply(x, options.vectors, noise, y);
      double err = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) err += std::abs(y[k] - ref[k]);
      if (!(den > 0.0)) throw DomainError("N-MAE undefined: all reference outputs are zero");
      out[c] = err / den;
    }
    i = j;
  }
  return out;
}

std::vector<NmaeRow> run_nmae_study(const Config& config, const NmaeStudyOptions& options,
                                    int threads) {
  const auto grid = expand_grid(config);
  for (const auto& gp : grid) {
    if (!gp.error.empty()) throw ConfigError("grid point " + std::to_string(gp.index) + ": " + gp.error);
  }
  const auto cases = nmae_cases(options);
  if (options.trials < 1) throw ConfigError("sweep.trials: must be >= 1");
  const std::size_t tasks = grid.size() * static_cast<std::size_t>(options.trials);
  std::vector<std::vector<double>> results(tasks);
  std::vector<std::string> errors(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t p = t / options.trials;
      try {
        results[t] = nmae_trial(grid[p].config, options, grid[p].index, t % options.trials);
      } catch (const std::exception& e) {
        errors[t] = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(tasks)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }

  std::vector<NmaeRow> rows;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (std::size_t c = 0; c < cases.size(); ++c) {
      NmaeRow row;
      row.kase = cases[c];
      row.l_s_um = grid[p].config.layout.l_s_um;
      row.l_g_um = grid[p].config.layout.l_g_um;
      row.trials = options.trials;
      double sum = 0.0;
      for (int t = 0; t < options.trials; ++t) sum += results[p * options.trials + t][c];
      row.mean = sum / options.trials;
      double var = 0.0;
      for (int t = 0; t < options.trials; ++t) {
        const double d = results[p * options.trials + t][c] - row.mean;
        var += d * d;
      }
      row.stddev = options.trials > 1 ? std::sqrt(var / (options.trials - 1)) : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_nmae_csv(const std::vector<NmaeRow>& rows, std::ostream& out) {
  out << "study,pattern,density,mode,output_gating,l_s_um,l_g_um,trials,nmae_mean,nmae_std\n";
  for (const auto& r : rows) {
    out << r.kase.study << ',' << r.kase.pattern << ',' << fmt_number(r.kase.density) << ','
        << to_string(r.kase.mode) << ',' << (r.kase.output_gating ? "true" : "false") << ','
        << fmt_number(r.l_s_um) << ',' << fmt_number(r.l_g_um) << ',' << r.trials << ','
        << fmt_number(r.mean) << ',' << fmt_number(r.stddev) << '\n';
  }
}

json nmae_json(const std::vector<NmaeRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"study", r.kase.study},
                   {"pattern", r.kase.pattern},
                   {"density", r.kase.density},
                   {"mode", to_string(r.kase.mode)},
                   {"output_gating", r.kase.output_gating},
                   {"l_s_um", r.l_s_um},
                   {"l_g_um", r.l_g_um},
                   {"trials", r.trials},
                   {"nmae_mean", r.mean},
                   {"nmae_std", r.stddev}});
  }
  return {{"schema_version", kSchemaVersion}, {"rows", arr}};
}

}  // namespace sptc::explorer
