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

#include "sptc/dst.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "sptc/error.hpp"

namespace sptc {

std::string to_string(MaskInit init) { return init == MaskInit::Random ? "random" : "power"; }

MaskInit mask_init_from_string(const std::string& name) {
  if (name == "power") return MaskInit::PowerAware;
  if (name == "random") return MaskInit::Random;
  throw ConfigError("mask_init must be \"power\" or \"random\" (got \"" + name + "\")");
}

void DstSchedule::validate() const {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw ConfigError("dst.alpha0 must be in (0, 1]");
  if (delta_t < 1) throw ConfigError("dst.delta_t must be >= 1");
  if (t_end < 1) throw ConfigError("dst.t_end must be >= 1");
  if (delta_m < 0) throw ConfigError("dst.delta_m must be >= 0");
  if (max_combinations < 1) throw ConfigError("dst.max_combinations must be >= 1");
}

std::int64_t round_half_up(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

std::vector<std::uint8_t> interleaved_ones(int n, double density) {
  if (n < 0) throw PreconditionError("interleaved_ones: n must be >= 0");
  if (!(density >= 0.0 && density <= 1.0)) {
    throw PreconditionError("interleaved_ones: density must be in [0, 1]");
  }
  std::vector<std::uint8_t> out(n, 1);
  int zeros = n - static_cast<int>(round_half_up(n * density));
  for (int pos = n - 1; pos >= 0 && zeros > 0; pos -= 2, --zeros) out[pos] = 0;
  for (int pos = n - 1; pos >= 0 && zeros > 0; --pos) {
    if (out[pos]) {
      out[pos] = 0;
      --zeros;
    }
  }
  return out;
}

std::pair<double, double> split_density(double s) {
  if (!(s > 0.0 && s <= 1.0)) {
    std::ostringstream os;
    os << "density must be in (0, 1] (got " << s << ")";
    throw ConfigError(os.str());
  }
  const double sr = std::max(s, 0.5);
  return {sr, s / sr};
}

double death_rate(double alpha0, int t, int t_end) {
  if (t_end <= 0) throw PreconditionError("death_rate: t_end must be > 0");
  return alpha0 / 2.0 * (1.0 + std::cos(static_cast<double>(t) * std::numbers::pi / t_end));
}

SparsityMask init_masks(double s, const LayerPartition& part, std::span<const double> matrix,
                        MaskInit init, const PowerContext& ctx, std::uint64_t max_combinations,
                        Rng& rng) {
  const auto [sr, sc] = split_density(s);
  SparsityMask mask = dense_mask(part);
  mask.row = interleaved_ones(part.chunk_rows, sr);
  if (sc >= 1.0) return mask;

  std::fill(mask.col.begin(), mask.col.end(), 0);
  const LayerPowerModel model(ctx.arch, ctx.device, ctx.layout, ctx.fit, matrix, mask, part,
                              ctx.policy);
  // Columns to keep per chunk: floor(real s_c), then the leftover of the
  // rounded layer total goes to the largest remainders (ties by chunk order)
  // so the layer density lands within one column of the target.
  const int chunks = part.chunk_count();
  std::vector<int> keep_of(chunks);
  std::vector<double> frac(chunks);
  std::int64_t total_real = 0;
  for (int ch = 0; ch < chunks; ++ch) {
    const double want = part.real_cols_in(ch % part.q) * sc;
    keep_of[ch] = static_cast<int>(std::floor(want));
    frac[ch] = want - keep_of[ch];
    total_real += part.real_cols_in(ch % part.q);
  }
  std::int64_t leftover = round_half_up(static_cast<double>(total_real) * sc) -
                          std::accumulate(keep_of.begin(), keep_of.end(), std::int64_t{0});
  std::vector<int> by_frac(chunks);
  std::iota(by_frac.begin(), by_frac.end(), 0);
  std::stable_sort(by_frac.begin(), by_frac.end(), [&](int a, int b) { return frac[a] > frac[b]; });
  for (int i = 0; i < chunks && leftover > 0; ++i, --leftover) ++keep_of[by_frac[i]];

  for (int pi = 0; pi < part.p; ++pi) {
    for (int qi = 0; qi < part.q; ++qi) {
      const int real = part.real_cols_in(qi);
      const int keep = std::min(real, keep_of[pi * part.q + qi]);
      const int base = part.col_id(pi, qi * part.chunk_cols);
      std::vector<int> pool(real);
      std::iota(pool.begin(), pool.end(), base);
      std::vector<int> chosen;
      if (init == MaskInit::Random) {
        std::vector<int> shuffled = pool;
        for (int i = real - 1; i > 0; --i) {
          std::swap(shuffled[i], shuffled[rng.below(static_cast<std::uint64_t>(i) + 1)]);
        }
        chosen.assign(shuffled.begin(), shuffled.begin() + keep);
      } else {
        chosen = select_min_power(pool, keep, max_combinations,
                                  [&](std::span<const int> ids) {
                                    return model.delta_mw(mask, ids, true);
                                  })
                     .chosen;
      }
      for (int id : chosen) mask.col[id] = 1;
    }
  }
  return mask;
}

namespace {

// Ids sorted by key (ascending or descending), ties by id.
std::vector<int> ranked(std::vector<int> ids, const std::vector<double>& key, bool descending) {
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (key[a] != key[b]) return descending ? key[a] > key[b] : key[a] < key[b];
    return a < b;
  });
  return ids;
}

}  // namespace

StepReport prune_step(SparsityMask& mask, const LayerPartition& part,
                      std::span<const double> latent, std::span<const double> scored,
                      const DstSchedule& schedule, int t, const PowerContext& ctx) {
  check_mask(mask, part);
  StepReport rep;
  if (t >= schedule.t_end) return rep;
  const int rows_active = active_rows(mask);
  if (rows_active == 0) return rep;
  rep.alpha = death_rate(schedule.alpha0, t, schedule.t_end);
  const std::int64_t nnz = kept_elements(mask, part);
  rep.death_elements = round_half_up(rep.alpha * static_cast<double>(nnz));
  rep.target_columns = static_cast<int>(
      round_half_up(static_cast<double>(rep.death_elements) / rows_active));
  if (rep.target_columns <= 0) return rep;

  std::vector<int> unpruned;
  for (int id = 0; id < part.column_vectors(); ++id) {
    if (!part.is_padded(id) && mask.col[id]) unpruned.push_back(id);
  }
  const auto norms = column_norms(latent, mask, part);
  auto order = ranked(unpruned, norms, false);
  const int pool_size = std::min<int>(static_cast<int>(order.size()),
                                      rep.target_columns + schedule.delta_m);
  std::vector<int> pool(order.begin(), order.begin() + pool_size);

  const LayerPowerModel model(ctx.arch, ctx.device, ctx.layout, ctx.fit, scored, mask, part,
                              ctx.policy);
  const Selection sel = select_min_power(pool, rep.target_columns, schedule.max_combinations,
                                         [&](std::span<const int> ids) {
                                           return model.delta_mw(mask, ids, false);
                                         });
  // m_c <- m_c AND NOT death
  for (int id : sel.chosen) mask.col[id] = 0;
  rep.columns = sel.chosen;
  rep.power_mw = sel.power_mw;
  return rep;
}

StepReport grow_step(SparsityMask& mask, const LayerPartition& part, double s,
                     std::span<const double> gradient, std::span<const double> scored,
                     const DstSchedule& schedule, const PowerContext& ctx) {
  check_mask(mask, part);
  StepReport rep;
  const int rows_active = active_rows(mask);
  if (rows_active == 0) return rep;
  const double want = s * static_cast<double>(mask_capacity(part)) -
                      static_cast<double>(kept_elements(mask, part));
  rep.target_columns = static_cast<int>(std::max<std::int64_t>(0, round_half_up(want / rows_active)));
  if (rep.target_columns <= 0) return rep;

  std::vector<int> pruned;
  for (int id = 0; id < part.column_vectors(); ++id) {
    if (!part.is_padded(id) && !mask.col[id]) pruned.push_back(id);
  }
  if (pruned.empty()) return rep;
  const auto norms = column_norms(gradient, mask, part);
  auto order = ranked(pruned, norms, true);
  const int pool_size = std::min<int>(static_cast<int>(order.size()),
                                      rep.target_columns + schedule.delta_m);
  std::vector<int> pool(order.begin(), order.begin() + pool_size);

  const LayerPowerModel model(ctx.arch, ctx.device, ctx.layout, ctx.fit, scored, mask, part,
                              ctx.policy);
  const Selection sel = select_min_power(pool, rep.target_columns, schedule.max_combinations,
                                         [&](std::span<const int> ids) {
                                           return model.delta_mw(mask, ids, true);
                                         });
  // m_c <- m_c OR grow
  for (int id : sel.chosen) mask.col[id] = 1;
  rep.columns = sel.chosen;
  rep.power_mw = sel.power_mw;
  return rep;
}

}  // namespace sptc
