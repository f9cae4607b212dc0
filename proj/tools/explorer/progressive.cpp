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
#include <ostream>

#include "explorer.hpp"

namespace sptc::explorer {

using nlohmann::json;

namespace {

json::json_pointer pointer_of(std::string key) {
  std::replace(key.begin(), key.end(), '.', '/');
  return json::json_pointer("/" + key);
}

}  // namespace

const std::vector<Stage>& progressive_stages() {
  static const std::vector<Stage> stages = {
      {1, "baseline", "dense network, foundry MZIs, no sharing, conservative spacing",
       {{"layout.l_v_um", 570.0},
        {"device.mzi_type", "foundry"},
        {"layout.l_s_um", 15.0},
        {"layout.l_g_um", 20.0},
        {"arch.r", 1},
        {"arch.c", 1},
        {"arch.density", 1.0},
        {"arch.mode", "prune"},
        {"arch.output_gating", false},
        {"arch.mask_init", "random"},
        {"arch.dac_kind", "edac"}}},
      {2, "lp_mzi", "compact low-power MZI", {{"device.mzi_type", "lp"}, {"layout.l_v_um", nullptr}}},
      {3, "spacing", "optimal device spacing", {{"layout.l_s_um", 9.0}, {"layout.l_g_um", 5.0}}},
      {4, "sharing", "shared input modulation and readout", {{"arch.r", 4}, {"arch.c", 4}}},
      {5, "co_sparsity", "row-column co-sparsity s = 0.3 with a 1 um gap",
       {{"arch.density", 0.3}, {"layout.l_g_um", 1.0}}},
      {6, "power_aware_masks", "power-minimizing column masks", {{"arch.mask_init", "power"}}},
      {7, "gating", "input gating, output gating and light redistribution",
       {{"arch.mode", "ig_lr"}, {"arch.output_gating", true}}},
      {8, "eodac", "two-segment electro-optic DAC", {{"arch.dac_kind", "eodac"}}},
  };
  return stages;
}

std::vector<StageRow> run_progressive(const Config& config) {
  std::vector<StageRow> rows;
  const json start = to_json(config);
  Config cur = config;
  for (const Stage& st : progressive_stages()) {
    for (const auto& [key, value] : st.overrides) {
      // null restores the value from the starting config
      cur = with_override(cur, key, value.is_null() ? start.at(pointer_of(key)) : value);
    }
    rows.push_back({st, workload_power(cur, sample_workload(cur))});
  }
  return rows;
}

void write_progressive_csv(const std::vector<StageRow>& rows, std::ostream& out) {
  out << "stage,name,p_avg_w,area_mm2,pap,e_tot_mj,p_in_w,p_wgt_w,p_out_w,p_rerouter_w,"
         "a_weight_mm2,a_splitter_mm2,a_pd_mm2,a_dac_mzm_rerouter_mm2,a_adc_tia_mm2,p_dac_w,"
         "a_dac_mm2\n";
  for (const auto& r : rows) {
    const auto& e = r.power.energy;
    const auto& a = r.power.area;
    out << r.stage.id << ',' << r.stage.name << ',' << fmt_number(e.p_avg_w) << ','
        << fmt_number(a.total_mm2) << ',' << fmt_number(r.power.pap) << ','
        << fmt_number(e.e_tot_mj) << ',' << fmt_number(e.avg.input_mw * 1e-3) << ','
        << fmt_number(e.avg.weight_mw * 1e-3) << ',' << fmt_number(e.avg.readout_mw * 1e-3)
        << ',' << fmt_number(e.avg.rerouter_mw * 1e-3) << ',' << fmt_number(a.ptc_weight_mm2)
        << ',' << fmt_number(a.splitter_mm2) << ',' << fmt_number(a.pd_mm2) << ','
        << fmt_number(a.dac_mzm_rerouter_mm2) << ',' << fmt_number(a.adc_tia_mm2) << ','
        << fmt_number(r.power.dac_power_w) << ',' << fmt_number(r.power.dac_area_mm2) << '\n';
  }
}

json progressive_json(const std::vector<StageRow>& rows) {
  json stages = json::array();
  for (const auto& r : rows) {
    json ov = json::array();
    for (const auto& [k, v] : r.stage.overrides) ov.push_back({{"key", k}, {"value", v}});
    const auto& e = r.power.energy;
    const auto& a = r.power.area;
    stages.push_back({{"stage", r.stage.id},
                      {"name", r.stage.name},
                      {"description", r.stage.description},
                      {"overrides", ov},
                      {"p_avg_w", e.p_avg_w},
                      {"area_mm2", a.total_mm2},
                      {"pap", r.power.pap},
                      {"e_tot_mj", e.e_tot_mj},
                      {"power_w",
                       {{"input", e.avg.input_mw * 1e-3},
                        {"weight", e.avg.weight_mw * 1e-3},
                        {"readout", e.avg.readout_mw * 1e-3},
                        {"rerouter", e.avg.rerouter_mw * 1e-3},
                        {"dac", r.power.dac_power_w}}},
                      {"area_mm2_breakdown",
                       {{"weight", a.ptc_weight_mm2},
                        {"splitter", a.splitter_mm2},
                        {"pd", a.pd_mm2},
                        {"dac_mzm_rerouter", a.dac_mzm_rerouter_mm2},
                        {"adc_tia", a.adc_tia_mm2},
                        {"dac", r.power.dac_area_mm2}}}});
  }
  return {{"schema_version", kSchemaVersion}, {"manifest", kProgressiveManifest}, {"stages", stages}};
}

}  // namespace sptc::explorer
