#include "slgfm/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace slgfm {

namespace {

const std::vector<std::string> kParamKeys = {"s_n",     "v_n",   "f_n",     "v_dcn",    "omega_n", "c_f",
                                             "l_f",     "c_dc",  "h",       "d_p",      "omega_g", "v_g",
                                             "omega_st", "q_st", "v_st",    "v_dcst",   "k_pdc",   "k_idc"};
const std::vector<std::string> kGainKeys = {"k_q", "d_q", "k_v", "k_droop", "t_q"};

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

const Json* section(const Json& root, const char* name) {
  if (!root.contains(name)) return nullptr;
  const Json& s = root.at(name);
  if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  return &s;
}

RapControl variant_by_name(const std::string& name) {
  if (name == "droop_i") return DroopI{};
  if (name == "rap") return Rap{};
  if (name == "fixed_voltage") return FixedVoltage{};
  if (name == "voltage") return Voltage{};
  if (name == "droop") return Droop{};
  if (name == "pure_droop") return PureDroop{};
  throw ConfigError("unknown control variant '" + name +
                    "' (droop_i, rap, fixed_voltage, voltage, droop, pure_droop)");
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

Case case_from_json(const Json& root) {
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  Case c;
  if (const Json* p = section(root, "params")) {
    for (const auto& [key, val] : p->items()) {
      if (key == "mppt") {
        if (!val.is_object()) throw ConfigError("params.mppt must be an object");
        for (const auto& [mk, mv] : val.items()) {
          const double v = number(mv, "params.mppt." + mk);
          if (mk == "rho") c.params.mppt.rho = v;
          else if (mk == "r_blade") c.params.mppt.r_blade = v;
          else if (mk == "c_opt") c.params.mppt.c_opt = v;
          else if (mk == "lambda_opt") c.params.mppt.lambda_opt = v;
          else throw ConfigError("unknown key params.mppt." + mk);
        }
      } else if (contains(kParamKeys, key)) {
        set_value(c, key, number(val, "params." + key));
      } else if (key != "l_g" && key != "r_g" && key != "x_r_ratio") {
        throw ConfigError("unknown parameter params." + key);
      }
    }
    if (p->contains("r_g") && p->contains("x_r_ratio"))
      throw ConfigError("give either params.r_g or params.x_r_ratio, not both");
    for (const char* key : {"l_g", "r_g", "x_r_ratio"})
      if (p->contains(key)) set_value(c, key, number(p->at(key), std::string("params.") + key));
  }

  if (const Json* s = section(root, "control")) {
    if (!s->contains("variant") || !s->at("variant").is_string())
      throw ConfigError("control.variant must name the variant");
    c.control = variant_by_name(s->at("variant").get<std::string>());
    for (const auto& [key, val] : s->items()) {
      if (key == "variant") continue;
      if (!contains(kGainKeys, key) || !is_known_name(c, key))
        throw ConfigError("control." + key + " is not a gain of variant " + std::string(variant_name(c.control)));
      set_value(c, key, number(val, "control." + key));
    }
  }

  if (const Json* s = section(root, "inputs")) {
    if (s->contains("p_st") && s->contains("omega_r"))
      throw ConfigError("give either inputs.p_st or inputs.omega_r, not both");
    for (const auto& [key, val] : s->items()) {
      if (key == "p_st") {
        c.inputs.p_st = number(val, "inputs.p_st");
      } else if (key == "omega_r") {
        const double w = number(val, "inputs.omega_r");
        if (w < 0) throw ConfigError("inputs.omega_r must be >= 0");
        c.inputs.p_st = mppt_setpoint(w, c.params);
      } else {
        throw ConfigError("unknown key inputs." + key);
      }
    }
  }

  if (const Json* s = section(root, "ad")) {
    for (const auto& [key, val] : s->items()) {
      if (key == "k_d") c.ad.k_d = number(val, "ad.k_d");
      else if (key == "t_d") c.ad.t_d = number(val, "ad.t_d");
      else if (key == "enabled") {
        if (!val.is_boolean()) throw ConfigError("ad.enabled must be true or false");
        c.ad.enabled = val.get<bool>();
      } else {
        throw ConfigError("unknown key ad." + key);
      }
    }
  }

  try {
    (void)Model(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  if (c.inputs.p_st < 0 || c.inputs.p_st > 1.5) throw ConfigError("inputs.p_st outside [0, 1.5] p.u.");
  return c;
}

Json case_to_json(const Case& c) {
  Json j;
  const SystemParams& p = c.params;
  j["params"] = {{"s_n", p.s_n},       {"v_n", p.v_n},       {"f_n", p.f_n},         {"v_dcn", p.v_dcn},
                 {"omega_n", p.omega_n}, {"c_f", p.c_f},     {"l_f", p.l_f},         {"l_g", p.l_g},
                 {"r_g", p.r_g},       {"c_dc", p.c_dc},     {"h", p.h},             {"d_p", p.d_p},
                 {"omega_g", p.omega_g}, {"v_g", p.v_g},     {"omega_st", p.omega_st}, {"q_st", p.q_st},
                 {"v_st", p.v_st},     {"v_dcst", p.v_dcst}, {"k_pdc", p.k_pdc},     {"k_idc", p.k_idc}};
  Json ctrl;
  ctrl["variant"] = std::string(variant_name(c.control));
  for (const std::string& g : kGainKeys)
    if (is_known_name(c, g)) ctrl[g] = get_value(c, g);
  j["control"] = ctrl;
  j["inputs"] = {{"p_st", c.inputs.p_st}};
  j["ad"] = {{"k_d", c.ad.k_d}, {"t_d", c.ad.t_d}, {"enabled", c.ad.enabled}};
  return j;
}

Scenario scenario_from_json(const Json& root) {
  Scenario s;
  s.base = case_from_json(root);
  if (const Json* sim = section(root, "sim")) {
    for (const auto& [key, val] : sim->items()) {
      if (key == "duration") {
        s.duration = number(val, "sim.duration");
      } else if (key == "dt") {
        s.dt = number(val, "sim.dt");
      } else if (key == "record_every") {
        if (!val.is_number_integer()) throw ConfigError("sim.record_every must be an integer");
        s.record_every = val.get<int>();
      } else if (key == "outputs") {
        if (!val.is_array()) throw ConfigError("sim.outputs must be an array of names");
        s.outputs.clear();
        for (const Json& o : val) {
          if (!o.is_string()) throw ConfigError("sim.outputs must be an array of names");
          s.outputs.push_back(o.get<std::string>());
        }
      } else if (key == "events") {
        if (!val.is_array()) throw ConfigError("sim.events must be an array");
        for (const Json& e : val) {
          if (!e.is_object() || !e.contains("time") || !e.contains("target") || !e.contains("value") ||
              !e.at("target").is_string())
            throw ConfigError("each event needs time, target and value");
          s.events.push_back({number(e.at("time"), "event time"), e.at("target").get<std::string>(),
                              number(e.at("value"), "event value")});
        }
      } else if (key == "initial_state") {
        if (!val.is_array()) throw ConfigError("sim.initial_state must be an array");
        Vec x(static_cast<int>(val.size()));
        for (std::size_t i = 0; i < val.size(); ++i) x[static_cast<int>(i)] = number(val[i], "sim.initial_state");
        s.initial_state = x;
      } else if (key == "metrics") {
        // consumed by the CLI
      } else {
        throw ConfigError("unknown key sim." + key);
      }
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return s;
}

AdDesignSpec design_spec_from_json(const Json& sec) {
  AdDesignSpec spec;
  if (!sec.is_object()) throw ConfigError("design_ad section must be an object");
  for (const auto& [key, val] : sec.items()) {
    if (key == "rap_mode_target") spec.rap_mode_target = number(val, "design_ad.rap_mode_target");
    else if (key == "l_g_max") spec.l_g_max = number(val, "design_ad.l_g_max");
    else if (key == "margin") spec.margin = number(val, "design_ad.margin");
    else throw ConfigError("unknown key design_ad." + key);
  }
  return spec;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace slgfm
