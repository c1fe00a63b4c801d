#include "slgfm/equilibrium.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "slgfm/errors.hpp"

namespace slgfm {

namespace {

using cd = std::complex<double>;

constexpr int kMaxIterations = 50;
constexpr int kMaxHalvings = 8;
constexpr double kFullTolerance = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// Phasors of the steady state in the grid frame (grid voltage on the real axis).
struct Phasors {
  cd v, i_g, i, e;
  double p, q;
};

Phasors phasors(double v_mag, double delta_v, const SystemParams& P) {
  const double w = P.omega_g;
  const cd z_line(P.r_g, w * P.l_g);
  Phasors ph;
  ph.v = std::polar(v_mag, delta_v);
  ph.i_g = (ph.v - cd(P.v_g, 0.0)) / z_line;
  ph.i = ph.i_g + cd(0.0, w * P.c_f) * ph.v;
  ph.e = ph.v + cd(0.0, w * P.l_f) * ph.i;
  const cd s = ph.v * std::conj(ph.i_g);
  ph.p = s.real();
  ph.q = s.imag();
  return ph;
}

// Closed-form line power flow from the capacitor to the grid.
std::array<double, 2> line_power(double v_mag, double delta_v, const SystemParams& P) {
  const double x = P.omega_g * P.l_g;
  const double r = P.r_g;
  const double den = r * r + x * x;
  const double s = std::sin(delta_v), c = std::cos(delta_v);
  const double p = (v_mag * v_mag * r + v_mag * P.v_g * (x * s - r * c)) / den;
  const double q = (v_mag * v_mag * x - v_mag * P.v_g * (r * s + x * c)) / den;
  return {p, q};
}

std::array<double, 2> reduced_residual(double v_mag, double delta_v, double p_st, double q_st,
                                       const SystemParams& P, const RapControl& control) {
  const auto [p, q] = line_power(v_mag, delta_v, P);
  const double p_target = p_st - P.d_p * (P.omega_g - P.omega_st);
  auto e_mag = [&] { return std::abs(phasors(v_mag, delta_v, P).e); };
  const double second = std::visit(
      Overloaded{
          [&](const DroopI& c) { return q_st - q + c.d_q * (P.v_st - v_mag); },
          [&](const Rap&) { return q_st - q; },
          [&](const FixedVoltage&) { return e_mag() - P.v_st; },
          [&](const Voltage&) { return P.v_st - v_mag; },
          [&](const Droop& c) { return e_mag() - (P.v_st + c.k_droop * (q_st - q)); },
          [&](const PureDroop& c) { return e_mag() - (P.v_st + c.k_droop * (q_st - q)); },
      },
      control);
  return {p - p_target, second};
}

double inf_norm(const std::array<double, 2>& r) { return std::max(std::abs(r[0]), std::abs(r[1])); }

Mat numeric_jacobian(const Model& m, const Vec& x, const Inputs& u) {
  const int n = m.size();
  Mat J(n, n);
  Vec xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    const double h = std::max(1e-7, 1e-7 * std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (m.rhs(xp, u) - m.rhs(xm, u)) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return J;
}

}  // namespace

SteadyState reduced_steady_state(double p_st, double q_st, const SystemParams& P,
                                 const RapControl& control) {
  P.validate();
  double v = P.v_st > 0 ? P.v_st : 1.0;
  const double x_line = P.omega_g * P.l_g;
  const double p_target = p_st - P.d_p * (P.omega_g - P.omega_st);
  double dv = 0.0;
  if (P.v_g > 0) dv = std::asin(std::clamp(p_target * x_line / (v * P.v_g), -0.9, 0.9));

  auto resid = [&](double vv, double aa) { return reduced_residual(vv, aa, p_st, q_st, P, control); };
  auto r = resid(v, dv);
  for (int it = 0; it < kMaxIterations; ++it) {
    if (inf_norm(r) < 1e-14) break;
    // central-difference 2x2 Jacobian
    const double hv = 1e-7 * std::max(1.0, std::abs(v));
    const double ha = 1e-7;
    const auto rvp = resid(v + hv, dv), rvm = resid(v - hv, dv);
    const auto rap = resid(v, dv + ha), ram = resid(v, dv - ha);
    const double j00 = (rvp[0] - rvm[0]) / (2 * hv), j01 = (rap[0] - ram[0]) / (2 * ha);
    const double j10 = (rvp[1] - rvm[1]) / (2 * hv), j11 = (rap[1] - ram[1]) / (2 * ha);
    const double det = j00 * j11 - j01 * j10;
    if (!std::isfinite(det) || std::abs(det) < 1e-300)
      throw NoConvergence("reduced steady state: singular Jacobian (infeasible power transfer?)");
    double step_v = -(j11 * r[0] - j01 * r[1]) / det;
    double step_a = -(-j10 * r[0] + j00 * r[1]) / det;

    double scale = 1.0;
    auto trial = resid(v + step_v, dv + step_a);
    for (int k = 0; k < kMaxHalvings && !(inf_norm(trial) < inf_norm(r)); ++k) {
      scale *= 0.5;
      trial = resid(v + scale * step_v, dv + scale * step_a);
    }
    v += scale * step_v;
    dv += scale * step_a;
    r = trial;
    if (it == kMaxIterations - 1 && inf_norm(r) >= 1e-12)
      throw NoConvergence("reduced steady state: no convergence in 50 iterations (residual " +
                          std::to_string(inf_norm(r)) + "); power transfer likely infeasible");
  }
  if (!(inf_norm(r) < 1e-12) || !std::isfinite(v))
    throw NoConvergence("reduced steady state: residual " + std::to_string(inf_norm(r)));
  if (!(v > 0) || std::abs(dv) >= std::numbers::pi / 2)
    throw NoConvergence("reduced steady state converged to a non-physical branch");

  const auto [p, q] = line_power(v, dv, P);
  return {p, q, v, dv};
}

Equilibrium solve_equilibrium(const Model& model, const Inputs& u) {
  const SystemParams& P = model.params();
  const StateLayout& L = model.layout();
  const SteadyState ss = reduced_steady_state(u.p_st, P.q_st, P, model.control());
  const Phasors ph = phasors(ss.v, ss.delta_v, P);

  const double delta = std::arg(ph.e);
  const cd rot = std::polar(1.0, -delta);
  const cd v = ph.v * rot, i_g = ph.i_g * rot, i = ph.i * rot;
  const double e_rf = std::abs(ph.e);

  Vec x = Vec::Zero(L.size);
  x[L.v_dc] = P.v_dcst;
  x[L.omega] = P.omega_g;
  x[L.delta] = delta;
  if (L.e_rf >= 0) x[L.e_rf] = e_rf;
  x[L.i_d] = i.real();
  x[L.i_q] = i.imag();
  x[L.v_d] = v.real();
  x[L.v_q] = v.imag();
  x[L.i_gd] = i_g.real();
  x[L.i_gq] = i_g.imag();
  if (L.q_f >= 0) x[L.q_f] = ss.q;
  const double i_dc = e_rf * i.real() / P.v_dcst;
  x[L.xi_dc] = P.k_idc > 0 ? i_dc / P.k_idc : 0.0;

  Vec f = model.rhs(x, u);
  double res = f.lpNorm<Eigen::Infinity>();
  int iterations = 0;
  while (!(res < kFullTolerance)) {
    if (iterations == kMaxIterations) {
      std::ostringstream msg;
      msg << "equilibrium: Newton did not converge in " << kMaxIterations
          << " iterations (residual " << res << ")";
      throw NoConvergence(msg.str());
    }
    ++iterations;
    const Mat J = numeric_jacobian(model, x, u);
    Eigen::FullPivLU<Mat> lu(J);
    if (!lu.isInvertible()) throw NoConvergence("equilibrium: singular Jacobian");
    const Vec step = lu.solve(-f);
    double scale = 1.0;
    Vec trial = x + step;
    Vec f_trial;
    double r_trial = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kMaxHalvings; ++k) {
      try {
        f_trial = model.rhs(trial, u);
        r_trial = f_trial.lpNorm<Eigen::Infinity>();
      } catch (const DomainError&) {
        r_trial = std::numeric_limits<double>::infinity();
      }
      if (r_trial < res || k == kMaxHalvings) break;
      scale *= 0.5;
      trial = x + scale * step;
    }
    if (!std::isfinite(r_trial)) throw NoConvergence("equilibrium: Newton step left the model domain");
    if (!(r_trial < res) && res < 1e-8) break;  // at the round-off floor
    x = trial;
    f = f_trial;
    res = r_trial;
  }

  const Outputs o = model.outputs(x, u);
  Equilibrium eq;
  eq.x0 = x;
  eq.layout = L;
  eq.p0 = o.p;
  eq.q0 = o.q;
  eq.v0 = o.v;
  eq.delta0 = x[L.delta];
  eq.delta_v0 = x[L.delta] + std::atan2(x[L.v_q], x[L.v_d]);
  eq.i_dc0 = o.i_dc;
  eq.e_rf0 = o.e_rf;
  eq.residual = res;
  eq.iterations = iterations;
  return eq;
}

Equilibrium solve_equilibrium(const Case& c) { return solve_equilibrium(Model(c), c.inputs); }

}  // namespace slgfm
