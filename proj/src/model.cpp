#include "slgfm/model.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <string>

#include "slgfm/errors.hpp"

namespace slgfm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

StateLayout StateLayout::make(const RapControl& control, const AdConfig& ad) {
  StateLayout l;
  l.labels = {"xi_dc", "v_dc", "omega", "delta"};
  auto push = [&](const char* name) {
    l.labels.emplace_back(name);
    return static_cast<int>(l.labels.size()) - 1;
  };
  if (has_erf_state(control)) l.e_rf = push("e_rf");
  l.i_d = push("i_d");
  l.i_q = push("i_q");
  l.v_d = push("v_d");
  l.v_q = push("v_q");
  l.i_gd = push("i_gd");
  l.i_gq = push("i_gq");
  if (has_qf_state(control)) l.q_f = push("q_f");
  if (ad.has_states()) {
    l.ad_d = push("ad_d");
    l.ad_q = push("ad_q");
  }
  l.size = static_cast<int>(l.labels.size());
  return l;
}

int StateLayout::find(const std::string& label) const {
  for (int i = 0; i < size; ++i)
    if (labels[i] == label) return i;
  return -1;
}

double mppt_setpoint(double omega_r, const SystemParams& params) {
  const auto& m = params.mppt;
  const double tip = omega_r * m.r_blade;
  const double watts = 0.5 * m.rho * std::numbers::pi * m.r_blade * m.r_blade * m.c_opt * tip * tip *
                       tip / (m.lambda_opt * m.lambda_opt * m.lambda_opt);
  return watts / params.s_n;
}

Model::Model(SystemParams params, RapControl control, AdConfig ad)
    : params_(params), control_(control), ad_(ad), layout_(StateLayout::make(control, ad)) {
  params_.validate();
  slgfm::validate(control_);
  ad_.validate();
}

namespace {

struct Evaluation {
  Outputs out;
  double dv_d = 0;
  double dv_q = 0;
};

// Shared core of rhs() and outputs(). dx may be empty when only outputs are needed.
Evaluation evaluate(const SystemParams& P, const RapControl& control, const AdConfig& ad,
                    const StateLayout& L, std::span<const double> x, const Inputs& u,
                    std::span<double> dx) {
  for (double xi : x)
    if (!std::isfinite(xi)) throw DomainError("non-finite state");
  const double v_dc = x[L.v_dc];
  if (!(v_dc > 0)) throw DomainError("v_dc <= 0: DC power balance is undefined");

  const double w = x[L.omega];
  const double delta = x[L.delta];
  const double i_d = x[L.i_d], i_q = x[L.i_q];
  const double v_d = x[L.v_d], v_q = x[L.v_q];
  const double i_gd = x[L.i_gd], i_gq = x[L.i_gq];
  const double wn = P.omega_n;

  Evaluation ev;
  Outputs& o = ev.out;
  o.p = v_d * i_gd + v_q * i_gq;
  o.q = v_q * i_gd - v_d * i_gq;
  o.v = std::hypot(v_d, v_q);
  o.v_dc = v_dc;
  o.omega = w;

  o.e_rf = std::visit(Overloaded{
                          [&](const FixedVoltage&) { return P.v_st; },
                          [&](const Droop& c) { return P.v_st + c.k_droop * (P.q_st - x[L.q_f]); },
                          [&](const PureDroop& c) { return P.v_st + c.k_droop * (P.q_st - o.q); },
                          [&](const auto&) { return x[L.e_rf]; },
                      },
                      control);

  ev.dv_d = wn / P.c_f * (i_d - i_gd + w * P.c_f * v_q);
  ev.dv_q = wn / P.c_f * (i_q - i_gq - w * P.c_f * v_d);

  double y_d = 0, y_q = 0;
  if (ad.enabled) {
    if (ad.t_d > 0) {
      y_d = ad.k_d / ad.t_d * x[L.ad_d];
      y_q = ad.k_d / ad.t_d * x[L.ad_q];
    } else {
      y_d = ad.k_d * ev.dv_d;
      y_q = ad.k_d * ev.dv_q;
    }
  }
  o.e_d = o.e_rf - y_d;
  o.e_q = -y_q;

  const double p_conv = o.e_d * i_d + o.e_q * i_q;
  // without damping, e_q is zero and the DC draw is e_rf i_d
  assert(ad.enabled || p_conv == o.e_rf * i_d);
  o.i_dc = p_conv / v_dc;
  o.i_wdc = P.k_pdc * (P.v_dcst - v_dc) + P.k_idc * x[L.xi_dc];

  if (dx.empty()) return ev;

  dx[L.xi_dc] = P.v_dcst - v_dc;
  dx[L.v_dc] = wn / P.c_dc * (o.i_wdc - o.i_dc);
  dx[L.omega] = (u.p_st - o.p - P.d_p * (w - P.omega_st)) / (2.0 * P.h);
  dx[L.delta] = wn * (w - P.omega_g);

  std::visit(Overloaded{
                 [&](const DroopI& c) { dx[L.e_rf] = c.k_q * (P.q_st - o.q + c.d_q * (P.v_st - o.v)); },
                 [&](const Rap& c) { dx[L.e_rf] = c.k_q * (P.q_st - o.q); },
                 [&](const Voltage& c) { dx[L.e_rf] = c.k_v * (P.v_st - o.v); },
                 [&](const Droop& c) { dx[L.q_f] = (o.q - x[L.q_f]) / c.t_q; },
                 [&](const auto&) {},
             },
             control);

  dx[L.i_d] = wn / P.l_f * (o.e_d - v_d + w * P.l_f * i_q);
  dx[L.i_q] = wn / P.l_f * (o.e_q - v_q - w * P.l_f * i_d);
  dx[L.v_d] = ev.dv_d;
  dx[L.v_q] = ev.dv_q;
  dx[L.i_gd] = wn / P.l_g * (v_d - P.v_g * std::cos(delta) - P.r_g * i_gd + w * P.l_g * i_gq);
  dx[L.i_gq] = wn / P.l_g * (v_q + P.v_g * std::sin(delta) - P.r_g * i_gq - w * P.l_g * i_gd);

  if (L.ad_d >= 0) {
    dx[L.ad_d] = ev.dv_d - x[L.ad_d] / ad.t_d;
    dx[L.ad_q] = ev.dv_q - x[L.ad_q] / ad.t_d;
  }
  return ev;
}

void check_size(std::size_t got, int want) {
  if (static_cast<int>(got) != want)
    throw std::invalid_argument("state dimension " + std::to_string(got) + " does not match layout " +
                                std::to_string(want));
}

}  // namespace

void Model::rhs(std::span<const double> x, const Inputs& u, std::span<double> dx) const {
  check_size(x.size(), layout_.size);
  check_size(dx.size(), layout_.size);
  evaluate(params_, control_, ad_, layout_, x, u, dx);
}

Vec Model::rhs(const Vec& x, const Inputs& u) const {
  Vec dx(layout_.size);
  rhs(std::span<const double>(x.data(), x.size()), u, std::span<double>(dx.data(), dx.size()));
  return dx;
}

Outputs Model::outputs(std::span<const double> x, const Inputs& u) const {
  check_size(x.size(), layout_.size);
  return evaluate(params_, control_, ad_, layout_, x, u, {}).out;
}

Outputs Model::outputs(const Vec& x, const Inputs& u) const {
  return outputs(std::span<const double>(x.data(), x.size()), u);
}

}  // namespace slgfm
