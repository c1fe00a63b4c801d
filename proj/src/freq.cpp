#include "slgfm/freq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "slgfm/errors.hpp"
#include "slgfm/smallsig.hpp"

namespace slgfm {

namespace {

std::vector<double> trim(std::vector<double> c) {
  auto first = std::find_if(c.begin(), c.end(), [](double v) { return v != 0.0; });
  if (first == c.end()) return {0.0};
  c.erase(c.begin(), first);
  return c;
}

// Newton refinement of a root; kept only when it lowers |p|.
cd polish(const Polynomial& p, const Polynomial& dp, cd z) {
  for (int it = 0; it < 4; ++it) {
    const cd f = p(z);
    const cd df = dp(z);
    if (df == 0.0) break;
    const cd next = z - f / df;
    if (!(std::abs(p(next)) < std::abs(f))) break;
    z = next;
  }
  return z;
}

}  // namespace

Polynomial::Polynomial(std::vector<double> c) : c_(trim(std::move(c))) {
  for (double v : c_)
    if (!std::isfinite(v)) throw std::invalid_argument("polynomial coefficient is not finite");
}

cd Polynomial::operator()(cd s) const {
  cd acc = 0.0;
  for (double v : c_) acc = acc * s + v;
  return acc;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (double v : c_) acc = acc * s + v;
  return acc;
}

Polynomial Polynomial::derivative() const {
  const int n = degree();
  if (n == 0) return Polynomial{0.0};
  std::vector<double> d(n);
  for (int k = 0; k < n; ++k) d[k] = c_[k] * (n - k);
  return Polynomial(d);
}

std::vector<cd> Polynomial::roots() const {
  std::vector<cd> out;
  std::vector<double> c = c_;
  while (c.size() > 1 && c.back() == 0.0) {
    out.emplace_back(0.0, 0.0);
    c.pop_back();
  }
  const int n = static_cast<int>(c.size()) - 1;
  if (n <= 0) return out;

  // s = alpha t puts the roots near the unit circle before forming the companion matrix
  const double alpha = std::pow(std::abs(c[n] / c[0]), 1.0 / n);
  Mat comp = Mat::Zero(n, n);
  double ak = 1.0;
  for (int k = 1; k <= n; ++k) {
    ak *= alpha;
    comp(0, k - 1) = -c[k] / (c[0] * ak);
  }
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;

  const Polynomial p(c);
  const Polynomial dp = p.derivative();
  for (cd t : eigs(comp)) {
    cd z = alpha * t;
    z = polish(p, dp, z);
    out.push_back(z);
  }
  return out;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  const auto& x = a.c_;
  const auto& y = b.c_;
  const std::size_t n = std::max(x.size(), y.size());
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) r[n - x.size() + i] += x[i];
  for (std::size_t i = 0; i < y.size(); ++i) r[n - y.size() + i] += y[i];
  return Polynomial(r);
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(r);
}

Polynomial operator*(double k, const Polynomial& a) {
  std::vector<double> r = a.c_;
  for (double& v : r) v *= k;
  return Polynomial(r);
}

RationalTF::RationalTF(Polynomial num, Polynomial den) {
  if (den.is_zero()) throw std::invalid_argument("transfer function with zero denominator");
  const double lead = den.leading();
  num_ = (1.0 / lead) * num;
  den_ = (1.0 / lead) * den;
}

cd RationalTF::operator()(cd s) const { return num_(s) / den_(s); }

double RationalTF::dc_gain() const {
  const double d = den_(0.0);
  const double n = num_(0.0);
  if (d == 0.0) return n == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                : std::copysign(std::numeric_limits<double>::infinity(), n);
  return n / d;
}

RationalTF RationalTF::feedback() const { return RationalTF(num_, den_ + num_); }

int rhp_pole_count(const RationalTF& tf, double tol) {
  int count = 0;
  for (cd p : tf.poles())
    if (p.real() > tol * std::max(1.0, std::abs(p))) ++count;
  return count;
}

double lcl_resonant_frequency(double l_f, double l_g, double c_f) {
  if (!(l_f > 0 && l_g > 0 && c_f > 0)) throw std::invalid_argument("LCL elements must be positive");
  return std::sqrt((l_f + l_g) / (l_f * l_g * c_f));
}

SimplifiedTfs simplified_tfs(const SystemParams& P, const RapControl& control, const Equilibrium& eq) {
  const double x_f = P.l_f, x_g = P.l_g, x_c = P.c_f;
  SimplifiedTfs t;
  t.x_eq = x_f + x_g - x_c * x_f * x_g;
  if (std::abs(t.x_eq) < 1e-9) throw SingularXeq("X_eq = X_f + X_g - X_c X_f X_g vanishes");

  const auto& L = eq.layout;
  const double e0 = eq.e_rf0;
  const double i_d0 = eq.x0[L.i_d];
  const double v_dc0 = eq.x0[L.v_dc];
  const double cd0 = std::cos(eq.delta0);
  const double vg = P.v_g;
  const double wn = P.omega_n;

  t.g_dcv = -e0 * i_d0 / (v_dc0 * v_dc0);
  t.g_pdelta = e0 * vg / t.x_eq * cd0;
  t.g_qe = (2.0 * e0 * x_g + vg * cd0 * (2.0 * x_f - t.x_eq)) / (t.x_eq * t.x_eq);
  t.g_ve = x_g * (e0 * x_g + vg * x_f * cd0) /
           (t.x_eq * std::sqrt(e0 * e0 * x_g * x_g + 2.0 * e0 * vg * x_f * x_g * cd0 + vg * vg * x_f * x_f));

  t.g_dc_sim = RationalTF(wn * Polynomial{P.k_pdc, P.k_idc}, Polynomial{P.c_dc, wn * t.g_dcv, 0.0});
  t.g_p_sim = RationalTF(Polynomial{wn * t.g_pdelta}, Polynomial{2.0 * P.h, P.d_p, 0.0});

  double k_q = 0, d_q = 0;
  if (const auto* c = std::get_if<DroopI>(&control)) {
    k_q = c->k_q;
    d_q = c->d_q;
    t.has_q_loop = true;
  } else if (const auto* c = std::get_if<Rap>(&control)) {
    k_q = c->k_q;
    t.has_q_loop = true;
  }
  if (t.has_q_loop) t.g_q_sim = RationalTF(Polynomial{k_q * t.g_qe}, Polynomial{1.0, k_q * d_q * t.g_ve});
  return t;
}

RapOpenLoop rap_open_loop_tf(const SystemParams& P, const DroopI& control, const Equilibrium& eq) {
  const auto& L = eq.layout;
  const double v_d0 = eq.x0[L.v_d], v_q0 = eq.x0[L.v_q];
  const double i_gd0 = eq.x0[L.i_gd], i_gq0 = eq.x0[L.i_gq];
  const double v0 = std::hypot(v_d0, v_q0);
  if (!(v0 > 0)) throw DegenerateEquilibrium("capacitor voltage is zero at the equilibrium");
  const double x_eq = P.l_f + P.l_g - P.c_f * P.l_f * P.l_g;
  if (std::abs(x_eq) < 1e-9) throw SingularXeq("X_eq = X_f + X_g - X_c X_f X_g vanishes");

  const double wn = P.omega_n, wg = P.omega_g;
  const double wr = lcl_resonant_frequency(P.l_f, P.l_g, P.c_f);
  const double wn2 = wn * wn, wg2 = wg * wg, wr2 = wr * wr;
  const double kq = control.k_q, dq = control.d_q;

  const Polynomial s{1.0, 0.0};
  const Polynomial sync{1.0, 0.0, wn2 * wg2};
  const Polynomial shifted{1.0, 0.0, wn2 * wr2 - wn2 * wg2};

  RapOpenLoop r;
  r.d_lcl = Polynomial{1.0, 0.0, wn2 * (wr + wg) * (wr + wg)} * Polynomial{1.0, 0.0, wn2 * (wr - wg) * (wr - wg)};

  const Polynomial t1 = (v_q0 * wn) * Polynomial{1.0, 0.0, wn2 * wr2 - 3.0 * wn2 * wg2, 0.0};
  const Polynomial t2 = (v_d0 * wn) * Polynomial{3.0 * wn * wg, 0.0, wn2 * wn * wr2 * wg - wn2 * wn * wg2 * wg};
  const Polynomial t3 = (-i_gq0 * P.l_g) * (sync * shifted);
  const Polynomial t4 = (-2.0 * i_gd0 * P.l_g * wn * wg) * (s * sync);
  r.n_qe = (wn2 / (P.l_f * P.l_g * P.c_f)) * (t1 + t2 + t3 + t4);

  r.n_ve = (wn2 / (P.l_f * P.c_f * v0)) * (v_d0 * shifted - Polynomial{2.0 * v_q0 * wn * wg, 0.0});

  r.g_qe = RationalTF(r.n_qe, sync * r.d_lcl);
  r.g_ve = RationalTF(r.n_ve, r.d_lcl);
  r.g_q = RationalTF(kq * r.n_qe, (s * r.d_lcl + (kq * dq) * r.n_ve) * sync);
  r.poles = r.g_q.poles();
  return r;
}

std::vector<cd> rap_open_loop_poles(const Case& c) {
  double k_q = 0;
  if (const auto* d = std::get_if<DroopI>(&c.control)) k_q = d->k_q;
  else if (const auto* d = std::get_if<Rap>(&c.control)) k_q = d->k_q;
  else throw std::invalid_argument("open RAP loop requires a reactive-power integrator variant");

  const StateSpaceModel ss = linearize(c);
  const int e_row = Model(c).layout().e_rf;
  Mat a = ss.a;
  // cancel the -k_q*q term of the e_rf equation
  a.row(e_row) += k_q * ss.c.row(1);
  return eigs(a);
}

BodeData bode(const RationalTF& tf, const std::vector<double>& freqs_hz) {
  BodeData b;
  b.rhp_poles = rhp_pole_count(tf);
  double prev = 0.0, offset = 0.0;
  for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
    const double f = freqs_hz[i];
    if (!(f > 0)) throw std::invalid_argument("Bode frequencies must be positive");
    const cd s(0.0, 2.0 * std::numbers::pi * f);
    const cd d = tf.den()(s);
    double scale = 0.0;
    for (double c : tf.den().coeffs()) scale = scale * std::abs(s) + std::abs(c);
    if (std::abs(d) < 1e-12 * std::max(1.0, scale)) {
      std::ostringstream msg;
      msg << "Bode grid frequency " << f << " Hz sits on a pole";
      throw PoleOnGrid(msg.str());
    }
    const cd g = tf.num()(s) / d;
    double ph = std::arg(g);
    if (i > 0) {
      while (ph + offset - prev > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
      while (ph + offset - prev < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
    }
    ph += offset;
    prev = ph;
    b.freq_hz.push_back(f);
    b.mag_db.push_back(20.0 * std::log10(std::abs(g)));
    b.phase_deg.push_back(ph * 180.0 / std::numbers::pi);
  }
  return b;
}

std::vector<double> step_response(const RationalTF& tf, const std::vector<double>& times) {
  const auto& den = tf.den().coeffs();
  std::vector<double> num = tf.num().coeffs();
  const int n = static_cast<int>(den.size()) - 1;
  if (static_cast<int>(num.size()) - 1 > n) throw std::invalid_argument("step_response: improper transfer function");
  num.insert(num.begin(), n + 1 - num.size(), 0.0);

  std::vector<double> y;
  y.reserve(times.size());
  const double d = num[0];
  if (n == 0) {
    y.assign(times.size(), d);
    return y;
  }
  // controllable canonical form
  Mat a = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) a(0, k) = -den[k + 1];
  for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
  Vec c(n);
  for (int k = 0; k < n; ++k) c[k] = num[k + 1] - d * den[k + 1];

  Mat aug = Mat::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = a;
  aug(0, n) = 1.0;

  Vec x = Vec::Zero(n);
  double t_prev = 0.0, dt_cached = -1.0;
  Mat phi, gamma;
  for (double t : times) {
    if (t < t_prev) throw std::invalid_argument("step_response: times must be ascending and non-negative");
    const double dt = t - t_prev;
    if (dt > 0) {
      if (std::abs(dt - dt_cached) > 1e-15 * std::max(1.0, dt)) {
        const Mat e = (aug * dt).exp();
        phi = e.topLeftCorner(n, n);
        gamma = e.topRightCorner(n, 1);
        dt_cached = dt;
      }
      x = phi * x + gamma;
    }
    y.push_back(c.dot(x) + d);
    t_prev = t;
  }
  return y;
}

}  // namespace slgfm
