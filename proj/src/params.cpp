#include "slgfm/params.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace slgfm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double* control_field(RapControl& control, std::string_view name) {
  return std::visit(
      Overloaded{
          [&](DroopI& v) -> double* {
            if (name == "k_q") return &v.k_q;
            if (name == "d_q") return &v.d_q;
            return nullptr;
          },
          [&](Rap& v) -> double* { return name == "k_q" ? &v.k_q : nullptr; },
          [&](FixedVoltage&) -> double* { return nullptr; },
          [&](Voltage& v) -> double* { return name == "k_v" ? &v.k_v : nullptr; },
          [&](Droop& v) -> double* {
            if (name == "k_droop") return &v.k_droop;
            if (name == "t_q") return &v.t_q;
            return nullptr;
          },
          [&](PureDroop& v) -> double* { return name == "k_droop" ? &v.k_droop : nullptr; },
      },
      control);
}

double* params_field(SystemParams& p, std::string_view name) {
  if (name == "s_n") return &p.s_n;
  if (name == "v_n") return &p.v_n;
  if (name == "f_n") return &p.f_n;
  if (name == "v_dcn") return &p.v_dcn;
  if (name == "omega_n") return &p.omega_n;
  if (name == "c_f") return &p.c_f;
  if (name == "l_f") return &p.l_f;
  if (name == "l_g") return &p.l_g;
  if (name == "r_g") return &p.r_g;
  if (name == "c_dc") return &p.c_dc;
  if (name == "h") return &p.h;
  if (name == "d_p") return &p.d_p;
  if (name == "omega_g") return &p.omega_g;
  if (name == "v_g") return &p.v_g;
  if (name == "omega_st") return &p.omega_st;
  if (name == "q_st") return &p.q_st;
  if (name == "v_st") return &p.v_st;
  if (name == "v_dcst") return &p.v_dcst;
  if (name == "k_pdc") return &p.k_pdc;
  if (name == "k_idc") return &p.k_idc;
  return nullptr;
}

const std::vector<std::string>& base_names() {
  static const std::vector<std::string> names = {
      "s_n", "v_n", "f_n", "v_dcn", "omega_n", "c_f", "l_f", "l_g", "r_g", "x_r_ratio",
      "c_dc", "h", "d_p", "omega_g", "v_g", "omega_st", "q_st", "v_st", "v_dcst",
      "k_pdc", "k_idc", "p_st", "k_d", "t_d", "ad_enabled"};
  return names;
}

}  // namespace

void SystemParams::validate() const {
  require(s_n > 0 && v_n > 0 && f_n > 0 && v_dcn > 0 && omega_n > 0, "bases must be positive");
  require(c_f > 0 && l_f > 0 && l_g > 0 && c_dc > 0, "filter and DC-link elements must be positive");
  require(r_g >= 0 && std::isfinite(r_g), "r_g must be finite and non-negative");
  require(h > 0, "inertia constant must be positive");
  require(d_p >= 0, "d_p must be non-negative");
  require(omega_g >= 0.9 && omega_g <= 1.1, "omega_g outside [0.9, 1.1] p.u.");
  require(v_g >= 0, "v_g must be non-negative");
  require(k_pdc >= 0 && k_idc >= 0, "DC PI gains must be non-negative");
}

double SystemParams::x_r_ratio() const {
  return r_g > 0 ? l_g / r_g : std::numeric_limits<double>::infinity();
}

SystemParams table_one() { return SystemParams{}; }

std::string_view variant_name(const RapControl& control) {
  static constexpr std::string_view names[] = {"droop_i", "rap",   "fixed_voltage",
                                               "voltage", "droop", "pure_droop"};
  return names[control.index()];
}

char variant_letter(const RapControl& control) {
  return static_cast<char>('a' + control.index());
}

bool has_erf_state(const RapControl& control) {
  return std::holds_alternative<DroopI>(control) || std::holds_alternative<Rap>(control) ||
         std::holds_alternative<Voltage>(control);
}

bool has_qf_state(const RapControl& control) { return std::holds_alternative<Droop>(control); }

void validate(const RapControl& control) {
  std::visit(Overloaded{
                 [](const DroopI& v) { require(v.k_q >= 0 && v.d_q >= 0, "droop-I gains must be >= 0"); },
                 [](const Rap& v) { require(v.k_q >= 0, "k_q must be >= 0"); },
                 [](const FixedVoltage&) {},
                 [](const Voltage& v) { require(v.k_v >= 0, "k_v must be >= 0"); },
                 [](const Droop& v) {
                   require(v.k_droop >= 0, "k_droop must be >= 0");
                   require(v.t_q > 0, "t_q must be > 0");
                 },
                 [](const PureDroop& v) { require(v.k_droop >= 0, "k_droop must be >= 0"); },
             },
             control);
}

void AdConfig::validate() const {
  require(k_d >= 0, "k_d must be >= 0");
  require(t_d >= 0, "t_d must be >= 0");
}

double get_value(const Case& c, std::string_view name) {
  Case mc = c;
  if (name == "p_st") return c.inputs.p_st;
  if (name == "k_d") return c.ad.k_d;
  if (name == "t_d") return c.ad.t_d;
  if (name == "ad_enabled") return c.ad.enabled ? 1.0 : 0.0;
  if (name == "x_r_ratio") return c.params.x_r_ratio();
  if (double* f = params_field(mc.params, name)) return *f;
  if (double* f = control_field(mc.control, name)) return *f;
  throw std::invalid_argument("unknown parameter '" + std::string(name) + "' for variant " +
                              std::string(variant_name(c.control)));
}

void set_value(Case& c, std::string_view name, double value) {
  if (name == "p_st") {
    c.inputs.p_st = value;
  } else if (name == "k_d") {
    c.ad.k_d = value;
  } else if (name == "t_d") {
    c.ad.t_d = value;
  } else if (name == "ad_enabled") {
    c.ad.enabled = value != 0.0;
  } else if (name == "x_r_ratio") {
    c.params.r_g = std::isinf(value) ? 0.0 : c.params.l_g / value;
  } else if (name == "l_g") {
    const double ratio = c.params.x_r_ratio();
    c.params.l_g = value;
    c.params.r_g = std::isinf(ratio) ? 0.0 : value / ratio;
  } else if (name == "f_n") {
    c.params.f_n = value;
    c.params.omega_n = 2.0 * std::numbers::pi * value;
  } else if (double* f = params_field(c.params, name)) {
    *f = value;
  } else if (double* g = control_field(c.control, name)) {
    *g = value;
  } else {
    throw std::invalid_argument("unknown parameter '" + std::string(name) + "' for variant " +
                                std::string(variant_name(c.control)));
  }
}

bool is_known_name(const Case& c, std::string_view name) {
  try {
    (void)get_value(c, name);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

std::vector<std::string> known_names(const Case& c) {
  std::vector<std::string> out = base_names();
  for (const char* g : {"k_q", "d_q", "k_v", "k_droop", "t_q"})
    if (is_known_name(c, g)) out.emplace_back(g);
  return out;
}

}  // namespace slgfm
