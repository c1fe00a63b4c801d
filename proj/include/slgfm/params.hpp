#pragma once

#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace slgfm {

/// Wind-turbine rotor data feeding the MPPT power map.
struct MpptParams {
  double rho = 1.2;         // air density, kg/m^3
  double r_blade = 63.0;    // blade length, m
  double c_opt = 0.44;      // optimal power coefficient
  double lambda_opt = 7.0;  // optimal tip-speed ratio
};

/// Physical and control constants of the converter, filter and Thevenin grid.
/// Everything is per-unit on (s_n, v_n, f_n) except the bases themselves,
/// the inertia constant h (s) and the MPPT rotor data.
struct SystemParams {
  double s_n = 5.0e6;   // W
  double v_n = 690.0;   // V, line-to-line RMS
  double f_n = 50.0;    // Hz
  double v_dcn = 1200.0;
  double omega_n = 2.0 * std::numbers::pi * 50.0;  // rad/s

  double c_f = 0.048;
  double l_f = 0.1;
  double l_g = 0.2;
  double r_g = 0.2 / 6.0;
  double c_dc = 27.0;
  double h = 0.5;
  double d_p = 50.0;

  double omega_g = 1.0;
  double v_g = 1.0;
  double omega_st = 1.0;
  double q_st = 0.0;
  double v_st = 1.0;
  double v_dcst = 1.0;

  double k_pdc = 3.8;
  double k_idc = 63.8;

  MpptParams mppt;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;

  /// X/R ratio of the line branch; infinite when r_g == 0.
  double x_r_ratio() const;
};

/// Baseline converter of the study (5 MW, 690 V, LCL 0.1/0.048/0.2 p.u., X/R = 6).
SystemParams table_one();

// Reactive-power / voltage control structures. Each produces the magnitude
// E_rf of the converter voltage reference.

/// (1/k_q) dE/dt = Q_st - q + D_q (V_st - V)
struct DroopI {
  double d_q = 10.0;
  double k_q = 4.0;
};
/// dE/dt = k_q (Q_st - q)
struct Rap {
  double k_q = 10.0;
};
/// E = V_st
struct FixedVoltage {};
/// dE/dt = k_v (V_st - V)
struct Voltage {
  double k_v = 10.0;
};
/// T_q dq_f/dt = q - q_f,  E = V_st + k_droop (Q_st - q_f)
struct Droop {
  double k_droop = 0.1;
  double t_q = 0.03;
};
/// E = V_st + k_droop (Q_st - q)
struct PureDroop {
  double k_droop = 0.1;
};

using RapControl = std::variant<DroopI, Rap, FixedVoltage, Voltage, Droop, PureDroop>;

std::string_view variant_name(const RapControl& control);
/// Single-letter label (a)..(f) used in rankings and reports.
char variant_letter(const RapControl& control);
bool has_erf_state(const RapControl& control);
bool has_qf_state(const RapControl& control);
void validate(const RapControl& control);

/// Capacitor-voltage-feedback damper G_ad(s) = k_d s / (t_d s + 1) per dq axis.
/// t_d == 0 selects the ideal derivative, which adds no states.
struct AdConfig {
  double k_d = 0.0;  // s
  double t_d = 0.0;  // s
  bool enabled = false;

  bool has_states() const { return enabled && t_d > 0.0; }
  void validate() const;
};

struct Inputs {
  double p_st = 0.5;
};

/// Everything needed to build one model instance.
struct Case {
  SystemParams params = table_one();
  RapControl control = DroopI{};
  Inputs inputs;
  AdConfig ad;
};

/// Named scalar access used by sweeps, sensitivities and simulation events.
/// Parameter names are the snake_case field names (l_g, k_idc, ...), control
/// gains (k_q, d_q, k_v, k_droop, t_q), damper fields (k_d, t_d, ad_enabled),
/// p_st, and the derived x_r_ratio. Setting l_g keeps the X/R ratio of the
/// line, i.e. r_g is rescaled with it.
double get_value(const Case& c, std::string_view name);
void set_value(Case& c, std::string_view name, double value);
bool is_known_name(const Case& c, std::string_view name);
std::vector<std::string> known_names(const Case& c);

}  // namespace slgfm
