#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slgfm/equilibrium.hpp"
#include "slgfm/errors.hpp"
#include "slgfm/model.hpp"

using namespace slgfm;

TEST_CASE("mppt map") {
  const SystemParams p = table_one();
  CHECK(mppt_setpoint(0.0, p) == 0.0);
  const double w = 1.1;
  CHECK(mppt_setpoint(2 * w, p) == doctest::Approx(8 * mppt_setpoint(w, p)).epsilon(1e-14));

  // invert the cubic for 0.5 p.u. and go back
  const auto& m = p.mppt;
  const double k = 0.5 * m.rho * std::numbers::pi * std::pow(m.r_blade, 5) * m.c_opt / std::pow(m.lambda_opt, 3);
  const double w_half = std::cbrt(0.5 * p.s_n / k);
  CHECK(mppt_setpoint(w_half, p) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("state layout follows the variant and damper flags") {
  CHECK(StateLayout::make(DroopI{}, {}).size == 11);
  CHECK(StateLayout::make(Rap{}, {}).size == 11);
  CHECK(StateLayout::make(Voltage{}, {}).size == 11);
  CHECK(StateLayout::make(FixedVoltage{}, {}).size == 10);
  CHECK(StateLayout::make(PureDroop{}, {}).size == 10);
  const StateLayout droop = StateLayout::make(Droop{}, {});
  CHECK(droop.size == 11);
  CHECK(droop.e_rf == -1);
  CHECK(droop.labels[static_cast<std::size_t>(droop.q_f)] == "q_f");
  CHECK(StateLayout::make(DroopI{}, AdConfig{1e-6, 1e-4, true}).size == 13);
  CHECK(StateLayout::make(DroopI{}, AdConfig{1e-6, 0.0, true}).size == 11);
  CHECK(StateLayout::make(DroopI{}, AdConfig{1e-6, 1e-4, false}).size == 11);
}

TEST_CASE("no-load operating point is an exact fixed point") {
  Case c;
  c.params.r_g = 0;
  c.inputs.p_st = 0;
  const Model m(c.params, c.control, c.ad);
  const StateLayout& L = m.layout();
  Vec x = Vec::Zero(L.size);
  x[L.v_dc] = 1;
  x[L.omega] = 1;
  x[L.v_d] = 1;
  // the converter supplies the capacitor charging current
  x[L.i_q] = c.params.c_f;
  x[L.e_rf] = 1 - c.params.l_f * c.params.c_f;
  const Vec dx = m.rhs(x, c.inputs);
  CHECK(dx.cwiseAbs().maxCoeff() < 1e-12);
  const Outputs o = m.outputs(x, c.inputs);
  CHECK(o.p == 0.0);
  CHECK(o.q == 0.0);
  CHECK(o.v == 1.0);
}

TEST_CASE("rhs is deterministic and pure") {
  const Case c;
  const Model m(c.params, c.control, c.ad);
  const Equilibrium eq = solve_equilibrium(c);
  Vec x = eq.x0;
  x[m.layout().i_d] += 0.01;
  const Vec a = m.rhs(x, c.inputs);
  const Vec b = m.rhs(x, c.inputs);
  for (int i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("domain errors") {
  const Case c;
  const Model m(c.params, c.control, c.ad);
  Vec x = solve_equilibrium(c).x0;
  x[m.layout().v_dc] = 0.0;
  CHECK_THROWS_AS(m.rhs(x, c.inputs), DomainError);
  x[m.layout().v_dc] = NAN;
  CHECK_THROWS_AS(m.rhs(x, c.inputs), DomainError);
  CHECK_THROWS_AS(m.rhs(Vec::Zero(5), c.inputs), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  SystemParams p = table_one();
  p.l_f = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = table_one();
  p.omega_g = 1.3;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(validate(RapControl{Droop{0.1, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(RapControl{DroopI{10, -1}}), std::invalid_argument);
  CHECK_THROWS_AS((AdConfig{-1, 1e-4, true}.validate()), std::invalid_argument);
}

TEST_CASE("dc draw equals the converter power") {
  const Case c;
  const Model m(c.params, c.control, c.ad);
  const Equilibrium eq = solve_equilibrium(c);
  Vec x = eq.x0;
  x[m.layout().i_q] += 0.3;
  const Outputs o = m.outputs(x, c.inputs);
  CHECK(o.i_dc * o.v_dc == doctest::Approx(o.e_rf * x[m.layout().i_d]).epsilon(1e-15));
  CHECK(o.e_q == 0.0);
}

TEST_CASE("powers are invariant to a common rotation of the dq frame") {
  const Case c;
  const Model m(c.params, c.control, c.ad);
  const StateLayout& L = m.layout();
  const Equilibrium eq = solve_equilibrium(c);
  const Outputs o0 = m.outputs(eq.x0, c.inputs);
  for (double phi : {0.3, -1.2, 2.5}) {
    Vec x = eq.x0;
    auto rot = [&](int d, int q) {
      const double a = x[d], b = x[q];
      x[d] = a * std::cos(phi) - b * std::sin(phi);
      x[q] = a * std::sin(phi) + b * std::cos(phi);
    };
    rot(L.v_d, L.v_q);
    rot(L.i_gd, L.i_gq);
    x[L.delta] -= phi;
    const Outputs o = m.outputs(x, c.inputs);
    CHECK(o.p == doctest::Approx(o0.p).epsilon(1e-13));
    CHECK(o.q == doctest::Approx(o0.q).scale(1).epsilon(1e-13));
    CHECK(o.v == doctest::Approx(o0.v).epsilon(1e-13));
    // line equations see the same grid voltage in the rotated frame
    const Vec dx = m.rhs(x, c.inputs);
    const double gd = dx[L.i_gd], gq = dx[L.i_gq];
    CHECK(std::hypot(gd, gq) < 1e-9);
  }
}

TEST_CASE("named parameter access") {
  Case c;
  CHECK(get_value(c, "x_r_ratio") == doctest::Approx(6.0));
  set_value(c, "l_g", 0.5);
  CHECK(c.params.r_g == doctest::Approx(0.5 / 6.0));
  set_value(c, "x_r_ratio", 10.0);
  CHECK(c.params.r_g == doctest::Approx(0.05));
  set_value(c, "f_n", 60.0);
  CHECK(c.params.omega_n == doctest::Approx(2 * std::numbers::pi * 60.0));
  CHECK(is_known_name(c, "k_q"));
  CHECK_FALSE(is_known_name(c, "k_v"));
  CHECK_THROWS_AS(set_value(c, "nonsense", 1.0), std::invalid_argument);
  set_value(c, "ad_enabled", 1.0);
  CHECK(c.ad.enabled);
}
