#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "slgfm/errors.hpp"
#include "slgfm/freq.hpp"
#include "slgfm/smallsig.hpp"

using namespace slgfm;

namespace {

Case lossless(double k_q) {
  Case c;
  c.params.r_g = 0;
  std::get<DroopI>(c.control).k_q = k_q;
  return c;
}

}  // namespace

TEST_CASE("polynomial arithmetic at random points") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  const Polynomial a{1.5, -2, 0.25, 3}, b{-0.5, 4, 1};
  const Polynomial sum = a + b, diff = a - b, prod = a * b, scaled = 2.5 * a;
  for (int i = 0; i < 16; ++i) {
    const cd s(u(rng), u(rng));
    CHECK(std::abs(sum(s) - (a(s) + b(s))) < 1e-12);
    CHECK(std::abs(diff(s) - (a(s) - b(s))) < 1e-12);
    CHECK(std::abs(prod(s) - a(s) * b(s)) < 1e-11);
    CHECK(std::abs(scaled(s) - 2.5 * a(s)) < 1e-12);
  }
  CHECK(prod.degree() == 5);
  CHECK((a - a).is_zero());
  CHECK(a.derivative().coeffs() == std::vector<double>{4.5, -4, 0.25});
}

TEST_CASE("polynomial roots match the oracle") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int deg = 1; deg <= 12; ++deg) {
    std::vector<double> c(static_cast<std::size_t>(deg + 1));
    for (auto& x : c) x = u(rng);
    const Polynomial p(c);
    CAPTURE(deg);
    CHECK(oracle::max_root_mismatch(p.roots(), oracle::aberth_roots(c)) < 1e-8);
  }
  // widely spread magnitudes
  const Polynomial w = Polynomial{1, 10} * Polynomial{1, 0, 5866.0 * 5866.0} * Polynomial{1, 1e-3};
  CHECK(oracle::max_root_mismatch(w.roots(), oracle::aberth_roots(w.coeffs())) < 1e-8);
  CHECK(Polynomial{1, 0, 0}.roots().size() == 2);
}

TEST_CASE("LCL resonance") {
  CHECK(lcl_resonant_frequency(1, 1, 2) == doctest::Approx(1.0));
  CHECK(lcl_resonant_frequency(0.1, 0.2, 0.048) == doctest::Approx(17.678).epsilon(1e-4));
  CHECK(lcl_resonant_frequency(0.1, 0.5, 0.048) == doctest::Approx(15.811).epsilon(1e-4));
  // zero of the input reactance of the filter seen from the converter, above
  // the pole of the grid-side branch
  for (double l_g : {0.2, 0.5}) {
    auto reactance = [&](double w) { return w * 0.1 + w * l_g / (1 - w * w * l_g * 0.048); };
    const double pole = 1 / std::sqrt(l_g * 0.048);
    const double w = oracle::bisect(reactance, pole * (1 + 1e-9), 100);
    CHECK(lcl_resonant_frequency(0.1, l_g, 0.048) == doctest::Approx(w).epsilon(1e-10));
  }
  CHECK_THROWS_AS(lcl_resonant_frequency(0, 1, 1), std::invalid_argument);
}

TEST_CASE("simplified static gains") {
  Case c;
  Equilibrium eq = solve_equilibrium(c);
  eq.e_rf0 = 1;
  eq.delta0 = 0;
  const SimplifiedTfs t = simplified_tfs(c.params, c.control, eq);
  CHECK(t.x_eq == doctest::Approx(0.29904).epsilon(1e-6));
  CHECK(t.g_pdelta == doctest::Approx(3.344).epsilon(1e-3));

  Case nl;
  nl.inputs.p_st = 0;
  nl.params.r_g = 0;
  const SimplifiedTfs z = simplified_tfs(nl.params, nl.control, solve_equilibrium(nl));
  CHECK(std::abs(z.g_dcv) < 1e-12);

  Case sing;
  sing.params.c_f = (0.1 + 0.2) / (0.1 * 0.2);
  CHECK_THROWS_AS(simplified_tfs(sing.params, sing.control, solve_equilibrium(c)), SingularXeq);
  CHECK_FALSE(simplified_tfs(c.params, FixedVoltage{}, solve_equilibrium(c)).has_q_loop);
}

TEST_CASE("open-loop RAP transfer function") {
  const Case c = lossless(11);
  const Equilibrium eq = solve_equilibrium(c);
  const RapOpenLoop ol = rap_open_loop_tf(c.params, std::get<DroopI>(c.control), eq);
  const double wn = c.params.omega_n;
  const double wr = lcl_resonant_frequency(c.params.l_f, c.params.l_g, c.params.c_f);

  SUBCASE("D_LCL roots") {
    const std::vector<cd> want = {{0, wn * (wr + 1)}, {0, -wn * (wr + 1)}, {0, wn * (wr - 1)}, {0, -wn * (wr - 1)}};
    CHECK(oracle::max_root_mismatch(ol.d_lcl.roots(), want) < 1e-9);
  }
  SUBCASE("pole set is the union of its factors") {
    const DroopI& d = std::get<DroopI>(c.control);
    const Polynomial core = Polynomial{1, 0} * ol.d_lcl + (d.k_q * d.d_q) * ol.n_ve;
    std::vector<cd> want = oracle::aberth_roots(core.coeffs());
    want.emplace_back(0, wn);
    want.emplace_back(0, -wn);
    CHECK(oracle::max_root_mismatch(ol.poles, want) < 1e-8);
    CHECK(oracle::max_root_mismatch(ol.g_q.poles(), want) < 1e-8);
  }
  SUBCASE("four right-half-plane poles") {
    CHECK(rhp_pole_count(ol.g_q) == 4);
    CHECK(bode(ol.g_q, {1.0, 10.0}).rhp_poles == 4);
  }
  SUBCASE("closed loop equals the isolated RAP and filter subsystem") {
    const StateSpaceModel ss = linearize(c);
    const StateLayout L = eq.layout;
    const Mat sub = ss.a.block(L.e_rf, L.e_rf, 7, 7);
    const auto want = eigs(sub);
    const auto got = ol.g_q.feedback().poles();
    CHECK(oracle::max_root_mismatch(got, want) < 0.01);
  }
  SUBCASE("degenerate equilibrium") {
    Equilibrium bad = eq;
    bad.x0[bad.layout.v_d] = 0;
    bad.x0[bad.layout.v_q] = 0;
    CHECK_THROWS_AS(rap_open_loop_tf(c.params, std::get<DroopI>(c.control), bad), DegenerateEquilibrium);
  }
}

TEST_CASE("open-loop poles move continuously with k_q") {
  std::vector<cd> prev;
  double worst_jump = 0, total = 0;
  const int n = 200;
  for (int k = 0; k <= n; ++k) {
    const Case c = lossless(10.0 + 2.0 * k / n);
    const auto poles = rap_open_loop_tf(c.params, std::get<DroopI>(c.control), solve_equilibrium(c)).poles;
    cd top = poles.front();
    for (cd p : poles)
      if (p.imag() > 5000 && p.real() > top.real()) top = p;
    if (k > 0) {
      worst_jump = std::max(worst_jump, std::abs(top - prev.front()));
      total += std::abs(top - prev.front());
    }
    prev = {top};
  }
  CHECK(worst_jump < 10 * total / n);
}

TEST_CASE("simplified and detailed RAP loops agree at low frequency") {
  const Case c;
  const Equilibrium eq = solve_equilibrium(c);
  const RationalTF detailed = rap_open_loop_tf(c.params, std::get<DroopI>(c.control), eq).g_q;
  const RationalTF simple = simplified_tfs(c.params, c.control, eq).g_q_sim;
  std::vector<double> f;
  for (double x = 0.1; x <= 10.0; x *= 1.2) f.push_back(x);
  const BodeData a = bode(detailed, f), b = bode(simple, f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CAPTURE(f[i]);
    CHECK(std::abs(a.mag_db[i] - b.mag_db[i]) < 3.0);
  }
}

TEST_CASE("bode of a first-order lag") {
  const RationalTF g(Polynomial{1.0}, Polynomial{1.0, 1.0});
  const BodeData b = bode(g, {1.0 / (2 * std::numbers::pi), 100.0});
  CHECK(b.mag_db[0] == doctest::Approx(-3.0103).epsilon(1e-4));
  CHECK(b.phase_deg[0] == doctest::Approx(-45.0).epsilon(1e-9));
  CHECK(b.phase_deg[1] == doctest::Approx(-90.0).epsilon(2e-3));
  CHECK(b.rhp_poles == 0);
  const RationalTF osc(Polynomial{1.0}, Polynomial{1.0, 0.0, 1.0});
  CHECK_THROWS_AS(bode(osc, {1.0 / (2 * std::numbers::pi)}), PoleOnGrid);
}

TEST_CASE("phase is unwrapped") {
  // fourth-order lag: phase runs to -360 deg without jumps
  const Polynomial den = Polynomial{1, 1} * Polynomial{1, 1} * Polynomial{1, 1} * Polynomial{1, 1};
  std::vector<double> f;
  for (double x = 0.01; x < 100; x *= 1.1) f.push_back(x);
  const BodeData b = bode(RationalTF(Polynomial{1.0}, den), f);
  for (std::size_t i = 1; i < f.size(); ++i) CHECK(b.phase_deg[i] < b.phase_deg[i - 1]);
  CHECK(b.phase_deg.back() == doctest::Approx(-360).epsilon(0.02));
}

TEST_CASE("rational transfer function helpers") {
  const RationalTF g(Polynomial{2.0, 4.0}, Polynomial{2.0, 6.0, 4.0});
  CHECK(g.den().leading() == 1.0);
  CHECK(g.dc_gain() == doctest::Approx(1.0));
  const RationalTF cl = g.feedback();
  CHECK(cl.dc_gain() == doctest::Approx(0.5));
  CHECK(std::abs(cl(cd(0, 3)) - g(cd(0, 3)) / (1.0 + g(cd(0, 3)))) < 1e-12);
  CHECK(std::isinf(RationalTF(Polynomial{1.0}, Polynomial{1.0, 0.0}).dc_gain()));
  CHECK(rhp_pole_count(RationalTF(Polynomial{1.0}, Polynomial{1.0, -1.0})) == 1);
}

TEST_CASE("step response") {
  const RationalTF g(Polynomial{1.0}, Polynomial{1.0, 1.0});
  const std::vector<double> t = {0.0, 0.5, 1.0, 3.0};
  const auto y = step_response(g, t);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(y[i] == doctest::Approx(1 - std::exp(-t[i])).epsilon(1e-12));
  // second order with a zero: y = 1 - e^{-t} (cos t) for (s + 2)/(s^2 + 2 s + 2)
  const RationalTF h(Polynomial{1.0, 2.0}, Polynomial{1.0, 2.0, 2.0});
  const auto z = step_response(h, {0.7, 2.0});
  CHECK(z[0] == doctest::Approx(1 - std::exp(-0.7) * std::cos(0.7)).epsilon(1e-12));
  CHECK(z[1] == doctest::Approx(1 - std::exp(-2.0) * std::cos(2.0)).epsilon(1e-12));
}
