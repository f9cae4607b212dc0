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

#include "sptc/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "sptc/error.hpp"

namespace sptc {

using nlohmann::json;

std::vector<WorkloadLayer> default_workload() {
  return {
      {"conv1", {64, 1, 3, 26 * 26}, false},
      {"conv2", {64, 64, 3, 24 * 24}, true},
      {"conv3", {64, 64, 3, 10 * 10}, true},
      {"fc", {10, 1600, 1, 1}, false},
  };
}

PowerContext Config::power_context() const {
  PowerContext ctx;
  ctx.arch = arch.arch;
  ctx.device = device;
  ctx.layout = layout;
  ctx.policy = gating();
  return ctx;
}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

class Reader {
 public:
  std::vector<std::string> errors;

  // Returns false (and records an error) when j is present but not an object.
  bool object(const json& j, const std::string& path, const std::set<std::string>& known) {
    if (j.is_null()) return false;
    if (!j.is_object()) {
      errors.push_back(path + ": expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) errors.push_back(join(path, key) + ": unknown key");
    }
    return true;
  }

  void number(const json& obj, const std::string& path, const char* key, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      errors.push_back(join(path, key) + ": expected a number");
      return;
    }
    out = v.get<double>();
    if (!std::isfinite(out)) errors.push_back(join(path, key) + ": must be finite");
  }

  void integer(const json& obj, const std::string& path, const char* key, int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      errors.push_back(join(path, key) + ": expected an integer");
      return;
    }
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      errors.push_back(join(path, key) + ": integer out of range");
      return;
    }
    out = static_cast<int>(x);
  }

  void integer64(const json& obj, const std::string& path, const char* key, std::int64_t& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      errors.push_back(join(path, key) + ": expected an integer");
      return;
    }
    out = v.get<std::int64_t>();
  }

  void unsigned64(const json& obj, const std::string& path, const char* key, std::uint64_t& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
    } else if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) {
        errors.push_back(join(path, key) + ": must be >= 0");
      } else {
        out = static_cast<std::uint64_t>(v.get<std::int64_t>());
      }
    } else {
      errors.push_back(join(path, key) + ": expected an unsigned integer");
    }
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      errors.push_back(join(path, key) + ": expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  void string(const json& obj, const std::string& path, const char* key, std::string& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      errors.push_back(join(path, key) + ": expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  template <typename E>
  void enumeration(const json& obj, const std::string& path, const char* key, E& out,
                   const std::function<E(const std::string&)>& parse) {
    std::string name;
    if (!obj.contains(key)) return;
    string(obj, path, key, name);
    if (!obj.at(key).is_string()) return;
    try {
      out = parse(name);
    } catch (const ConfigError& e) {
      errors.push_back(join(path, key) + ": " + e.what());
    }
  }

  // Runs a throwing validator and records its message.
  void check(const std::function<void()>& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }
};

void read_device(Reader& rd, const json& j, DeviceParams& d) {
  static const std::set<std::string> known = {
      "mzi_type", "p_pi_mw", "foundry_p_pi_mw", "ps_width_um", "node_length_um",
      "foundry_mzi_length_um", "foundry_mzi_width_um", "p0_edac_mw", "p0_adc_mw_per_bit_ghz",
      "p_mod_static_mw", "e_mod_pj", "p_pd_mw", "p_tia_mw", "extinction_ratio_db",
      "pd_noise_sigma", "phase_noise_sigma_rad", "a_mmi_um2", "a_pd_um2", "a_dac_um2",
      "a_mzm_um2", "a_rerouter_um2", "a_adc_um2", "a_tia_um2"};
  if (!rd.object(j, "device", known)) return;
  const std::string p = "device";
  rd.enumeration<MziType>(j, p, "mzi_type", d.mzi_type, mzi_type_from_string);
  rd.number(j, p, "p_pi_mw", d.p_pi_mw);
  rd.number(j, p, "foundry_p_pi_mw", d.foundry_p_pi_mw);
  rd.number(j, p, "ps_width_um", d.ps_width_um);
  rd.number(j, p, "node_length_um", d.node_length_um);
  rd.number(j, p, "foundry_mzi_length_um", d.foundry_mzi_length_um);
  rd.number(j, p, "foundry_mzi_width_um", d.foundry_mzi_width_um);
  rd.number(j, p, "p0_edac_mw", d.p0_edac_mw);
  rd.number(j, p, "p0_adc_mw_per_bit_ghz", d.p0_adc_mw_per_bit_ghz);
  rd.number(j, p, "p_mod_static_mw", d.p_mod_static_mw);
  rd.number(j, p, "e_mod_pj", d.e_mod_pj);
  rd.number(j, p, "p_pd_mw", d.p_pd_mw);
  rd.number(j, p, "p_tia_mw", d.p_tia_mw);
  rd.number(j, p, "extinction_ratio_db", d.extinction_ratio_db);
  rd.number(j, p, "pd_noise_sigma", d.pd_noise_sigma);
  rd.number(j, p, "phase_noise_sigma_rad", d.phase_noise_sigma_rad);
  rd.number(j, p, "a_mmi_um2", d.a_mmi_um2);
  rd.number(j, p, "a_pd_um2", d.a_pd_um2);
  rd.number(j, p, "a_dac_um2", d.a_dac_um2);
  rd.number(j, p, "a_mzm_um2", d.a_mzm_um2);
  rd.number(j, p, "a_rerouter_um2", d.a_rerouter_um2);
  rd.number(j, p, "a_adc_um2", d.a_adc_um2);
  rd.number(j, p, "a_tia_um2", d.a_tia_um2);
}

void read_workload(Reader& rd, const json& j, std::vector<WorkloadLayer>& out) {
  const std::string path = "arch.workload";
  if (!j.is_array() || j.empty()) {
    rd.errors.push_back(path + ": expected a non-empty array of layers");
    return;
  }
  out.clear();
  static const std::set<std::string> known = {"name", "c_out", "c_in", "kernel", "n_vectors",
                                              "sparse"};
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    WorkloadLayer layer;
    layer.name = "layer" + std::to_string(i);
    if (!rd.object(j[i], p, known)) {
      if (j[i].is_null()) rd.errors.push_back(p + ": expected an object");
      continue;
    }
    rd.string(j[i], p, "name", layer.name);
    rd.integer(j[i], p, "c_out", layer.dims.c_out);
    rd.integer(j[i], p, "c_in", layer.dims.c_in);
    rd.integer(j[i], p, "kernel", layer.dims.kernel);
    rd.integer64(j[i], p, "n_vectors", layer.dims.n_vectors);
    rd.boolean(j[i], p, "sparse", layer.sparse);
    if (layer.dims.c_out < 1) rd.errors.push_back(p + ".c_out: must be >= 1");
    if (layer.dims.c_in < 1) rd.errors.push_back(p + ".c_in: must be >= 1");
    if (layer.dims.kernel < 1) rd.errors.push_back(p + ".kernel: must be >= 1");
    if (layer.dims.n_vectors < 1) rd.errors.push_back(p + ".n_vectors: must be >= 1");
    out.push_back(layer);
  }
}

void read_arch(Reader& rd, const json& j, ArchSection& a) {
  static const std::set<std::string> known = {
      "R", "C", "k1", "k2", "r", "c", "f_ghz", "b_in", "b_w", "b_o", "dac_kind",
      "eodac_segments", "mode", "output_gating", "density", "mask_init", "workload"};
  if (!rd.object(j, "arch", known)) return;
  const std::string p = "arch";
  rd.integer(j, p, "R", a.arch.R);
  rd.integer(j, p, "C", a.arch.C);
  rd.integer(j, p, "k1", a.arch.k1);
  rd.integer(j, p, "k2", a.arch.k2);
  rd.integer(j, p, "r", a.arch.r);
  rd.integer(j, p, "c", a.arch.c);
  rd.number(j, p, "f_ghz", a.arch.f_ghz);
  rd.integer(j, p, "b_in", a.arch.b_in);
  rd.integer(j, p, "b_w", a.arch.b_w);
  rd.integer(j, p, "b_o", a.arch.b_o);
  rd.enumeration<DacKind>(j, p, "dac_kind", a.arch.dac_kind, dac_kind_from_string);
  if (j.contains("eodac_segments")) {
    const json& s = j.at("eodac_segments");
    bool ok = s.is_array();
    std::vector<int> segs;
    if (ok) {
      for (const auto& v : s) {
        if (!v.is_number_integer()) {
          ok = false;
          break;
        }
        segs.push_back(v.get<int>());
      }
    }
    if (ok) {
      a.arch.eodac_segments = segs;
    } else {
      rd.errors.push_back("arch.eodac_segments: expected an array of integers");
    }
  }
  rd.enumeration<ExecutionMode>(j, p, "mode", a.mode, execution_mode_from_string);
  rd.boolean(j, p, "output_gating", a.output_gating);
  rd.number(j, p, "density", a.density);
  rd.enumeration<MaskInit>(j, p, "mask_init", a.mask_init, mask_init_from_string);
  if (j.contains("workload")) read_workload(rd, j.at("workload"), a.workload);
}

void read_dst(Reader& rd, const json& j, DstSection& d) {
  static const std::set<std::string> known = {
      "alpha0", "t_end_fraction", "delta_m", "max_combinations", "density", "epochs",
      "batch_size", "lr", "weight_decay", "power_mode", "power_output_gating", "dataset",
      "train_fraction", "eval_trials"};
  if (!rd.object(j, "dst", known)) return;
  const std::string p = "dst";
  rd.number(j, p, "alpha0", d.alpha0);
  rd.number(j, p, "t_end_fraction", d.t_end_fraction);
  rd.integer(j, p, "delta_m", d.delta_m);
  rd.unsigned64(j, p, "max_combinations", d.max_combinations);
  rd.number(j, p, "density", d.density);
  rd.integer(j, p, "epochs", d.epochs);
  rd.integer(j, p, "batch_size", d.batch_size);
  rd.number(j, p, "lr", d.lr);
  rd.number(j, p, "weight_decay", d.weight_decay);
  rd.enumeration<ExecutionMode>(j, p, "power_mode", d.power_mode, execution_mode_from_string);
  rd.boolean(j, p, "power_output_gating", d.power_output_gating);
  rd.string(j, p, "dataset", d.dataset);
  rd.number(j, p, "train_fraction", d.train_fraction);
  rd.integer(j, p, "eval_trials", d.eval_trials);
}

void read_sweep(Reader& rd, const json& j, SweepSection& s) {
  static const std::set<std::string> known = {"axes", "trials", "checkpoint"};
  if (!rd.object(j, "sweep", known)) return;
  rd.integer(j, "sweep", "trials", s.trials);
  rd.string(j, "sweep", "checkpoint", s.checkpoint);
  if (!j.contains("axes")) return;
  const json& axes = j.at("axes");
  if (!axes.is_array()) {
    rd.errors.push_back("sweep.axes: expected an array");
    return;
  }
  static const std::set<std::string> axis_known = {"key", "values"};
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const std::string p = "sweep.axes[" + std::to_string(i) + "]";
    if (!rd.object(axes[i], p, axis_known)) {
      if (axes[i].is_null()) rd.errors.push_back(p + ": expected an object");
      continue;
    }
    SweepAxis axis;
    rd.string(axes[i], p, "key", axis.key);
    if (axis.key.empty()) rd.errors.push_back(p + ".key: required");
    if (!axes[i].contains("values") || !axes[i].at("values").is_array() ||
        axes[i].at("values").empty()) {
      rd.errors.push_back(p + ".values: expected a non-empty array");
    } else {
      for (const auto& v : axes[i].at("values")) axis.values.push_back(v);
    }
    s.axes.push_back(std::move(axis));
  }
}

std::string pointer_of(const std::string& dotted) {
  std::string out = "/";
  for (char ch : dotted) out += ch == '.' ? '/' : ch;
  return out;
}

}  // namespace

Config parse_config(const json& doc) {
  Reader rd;
  Config cfg;
  if (!doc.is_null() && !doc.is_object()) throw ConfigErrorList({"(root): expected an object"});
  const json root = doc.is_null() ? json::object() : doc;
  for (const auto& [key, value] : root.items()) {
    static const std::set<std::string> known = {"seed", "device", "layout", "arch", "dst",
                                                "sweep"};
    if (!known.count(key)) rd.errors.push_back(key + ": unknown key");
  }
  rd.unsigned64(root, "", "seed", cfg.seed);
  if (root.contains("device")) read_device(rd, root.at("device"), cfg.device);

  double l_s = cfg.layout.l_s_um, l_g = cfg.layout.l_g_um, l_v = cfg.layout.l_v_um;
  double l_h_given = std::numeric_limits<double>::quiet_NaN();
  if (root.contains("layout")) {
    const json& j = root.at("layout");
    if (rd.object(j, "layout", {"l_s_um", "l_g_um", "l_v_um", "l_h_um"})) {
      rd.number(j, "layout", "l_s_um", l_s);
      rd.number(j, "layout", "l_g_um", l_g);
      rd.number(j, "layout", "l_v_um", l_v);
      rd.number(j, "layout", "l_h_um", l_h_given);
    }
  }
  if (root.contains("arch")) read_arch(rd, root.at("arch"), cfg.arch);
  if (root.contains("dst")) read_dst(rd, root.at("dst"), cfg.dst);
  if (root.contains("sweep")) read_sweep(rd, root.at("sweep"), cfg.sweep);

  rd.check([&] { cfg.device.validate(); });
  cfg.layout = LayoutParams::make(l_s, l_g, l_v, cfg.device);
  if (!std::isnan(l_h_given)) cfg.layout.l_h_um = l_h_given;
  rd.check([&] { cfg.layout.validate(cfg.device); });
  if (cfg.layout.l_s_um > 0.0 && cfg.device.mzi_type == MziType::LowPower) {
    rd.check([&] { (void)mzi_power(1.0, cfg.layout.l_s_um, cfg.device, cfg.power_context().fit); });
  }
  rd.check([&] { cfg.arch.arch.validate(); });
  if (!(cfg.arch.density > 0.0 && cfg.arch.density <= 1.0)) {
    rd.errors.push_back("arch.density: must be in (0, 1]");
  }

  const auto& d = cfg.dst;
  if (!(d.alpha0 > 0.0 && d.alpha0 <= 1.0)) rd.errors.push_back("dst.alpha0: must be in (0, 1]");
  if (!(d.t_end_fraction > 0.0 && d.t_end_fraction < 1.0)) {
    rd.errors.push_back("dst.t_end_fraction: must be in (0, 1)");
  }
  if (d.delta_m < 0) rd.errors.push_back("dst.delta_m: must be >= 0");
  if (d.max_combinations < 1) rd.errors.push_back("dst.max_combinations: must be >= 1");
  if (!(d.density > 0.0 && d.density <= 1.0)) rd.errors.push_back("dst.density: must be in (0, 1]");
  if (d.epochs < 1) rd.errors.push_back("dst.epochs: must be >= 1");
  if (d.batch_size < 1) rd.errors.push_back("dst.batch_size: must be >= 1");
  if (!(d.lr > 0.0)) rd.errors.push_back("dst.lr: must be > 0");
  if (!(d.weight_decay >= 0.0)) rd.errors.push_back("dst.weight_decay: must be >= 0");
  if (!(d.train_fraction > 0.0 && d.train_fraction < 1.0)) {
    rd.errors.push_back("dst.train_fraction: must be in (0, 1)");
  }
  if (d.eval_trials < 1) rd.errors.push_back("dst.eval_trials: must be >= 1");
  if (d.dataset.empty()) rd.errors.push_back("dst.dataset: must not be empty");

  if (cfg.sweep.trials < 1) rd.errors.push_back("sweep.trials: must be >= 1");
  if (!rd.errors.empty()) throw ConfigErrorList(rd.errors);

  // Axis keys are checked against the effective document.
  const json effective = to_json(cfg);
  for (std::size_t i = 0; i < cfg.sweep.axes.size(); ++i) {
    const auto& key = cfg.sweep.axes[i].key;
    const std::string p = "sweep.axes[" + std::to_string(i) + "].key";
    if (key.rfind("sweep", 0) == 0 || key == "layout.l_h_um") {
      rd.errors.push_back(p + ": \"" + key + "\" cannot be swept");
    } else if (!effective.contains(json::json_pointer(pointer_of(key)))) {
      rd.errors.push_back(p + ": \"" + key + "\" is not a configuration key");
    }
  }
  if (!rd.errors.empty()) throw ConfigErrorList(rd.errors);
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigErrorList({"cannot open config file " + path.string()});
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return parse_config(json::object());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigErrorList({path.string() + ": invalid JSON: " + e.what()});
  }
  return parse_config(doc);
}

json to_json(const Config& c) {
  const auto& d = c.device;
  json j;
  j["seed"] = c.seed;
  j["device"] = {
      {"mzi_type", to_string(d.mzi_type)},
      {"p_pi_mw", d.p_pi_mw},
      {"foundry_p_pi_mw", d.foundry_p_pi_mw},
      {"ps_width_um", d.ps_width_um},
      {"node_length_um", d.node_length_um},
      {"foundry_mzi_length_um", d.foundry_mzi_length_um},
      {"foundry_mzi_width_um", d.foundry_mzi_width_um},
      {"p0_edac_mw", d.p0_edac_mw},
      {"p0_adc_mw_per_bit_ghz", d.p0_adc_mw_per_bit_ghz},
      {"p_mod_static_mw", d.p_mod_static_mw},
      {"e_mod_pj", d.e_mod_pj},
      {"p_pd_mw", d.p_pd_mw},
      {"p_tia_mw", d.p_tia_mw},
      {"extinction_ratio_db", d.extinction_ratio_db},
      {"pd_noise_sigma", d.pd_noise_sigma},
      {"phase_noise_sigma_rad", d.phase_noise_sigma_rad},
      {"a_mmi_um2", d.a_mmi_um2},
      {"a_pd_um2", d.a_pd_um2},
      {"a_dac_um2", d.a_dac_um2},
      {"a_mzm_um2", d.a_mzm_um2},
      {"a_rerouter_um2", d.a_rerouter_um2},
      {"a_adc_um2", d.a_adc_um2},
      {"a_tia_um2", d.a_tia_um2},
  };
  j["layout"] = {{"l_s_um", c.layout.l_s_um},
                 {"l_g_um", c.layout.l_g_um},
                 {"l_v_um", c.layout.l_v_um},
                 {"l_h_um", c.layout.l_h_um}};
  const auto& a = c.arch.arch;
  json workload = json::array();
  for (const auto& w : c.arch.workload) {
    workload.push_back({{"name", w.name},
                        {"c_out", w.dims.c_out},
                        {"c_in", w.dims.c_in},
                        {"kernel", w.dims.kernel},
                        {"n_vectors", w.dims.n_vectors},
                        {"sparse", w.sparse}});
  }
  j["arch"] = {{"R", a.R},
               {"C", a.C},
               {"k1", a.k1},
               {"k2", a.k2},
               {"r", a.r},
               {"c", a.c},
               {"f_ghz", a.f_ghz},
               {"b_in", a.b_in},
               {"b_w", a.b_w},
               {"b_o", a.b_o},
               {"dac_kind", to_string(a.dac_kind)},
               {"eodac_segments", a.eodac_segments},
               {"mode", to_string(c.arch.mode)},
               {"output_gating", c.arch.output_gating},
               {"density", c.arch.density},
               {"mask_init", to_string(c.arch.mask_init)},
               {"workload", workload}};
  const auto& s = c.dst;
  j["dst"] = {{"alpha0", s.alpha0},
              {"t_end_fraction", s.t_end_fraction},
              {"delta_m", s.delta_m},
              {"max_combinations", s.max_combinations},
              {"density", s.density},
              {"epochs", s.epochs},
              {"batch_size", s.batch_size},
              {"lr", s.lr},
              {"weight_decay", s.weight_decay},
              {"power_mode", to_string(s.power_mode)},
              {"power_output_gating", s.power_output_gating},
              {"dataset", s.dataset},
              {"train_fraction", s.train_fraction},
              {"eval_trials", s.eval_trials}};
  json axes = json::array();
  for (const auto& ax : c.sweep.axes) axes.push_back({{"key", ax.key}, {"values", ax.values}});
  j["sweep"] = {{"axes", axes}, {"trials", c.sweep.trials}, {"checkpoint", c.sweep.checkpoint}};
  return j;
}

bool has_key(const Config& config, const std::string& key) {
  return to_json(config).contains(json::json_pointer(pointer_of(key)));
}

Config with_override(const Config& config, const std::string& key, const json& value) {
  json j = to_json(config);
  const json::json_pointer ptr(pointer_of(key));
  if (!j.contains(ptr)) throw ConfigErrorList({key + ": not a configuration key"});
  j[ptr] = value;
  if (key != "layout.l_h_um") j["layout"].erase("l_h_um");
  return parse_config(j);
}

}  // namespace sptc
