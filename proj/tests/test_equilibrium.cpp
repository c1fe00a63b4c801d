#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "slgfm/equilibrium.hpp"
#include "slgfm/errors.hpp"

using namespace slgfm;

namespace {

Case variant_case(const RapControl& rc) {
  Case c;
  c.control = rc;
  return c;
}

}  // namespace

TEST_CASE("baseline equilibrium") {
  const Case c;
  const Equilibrium eq = solve_equilibrium(c);
  CHECK(eq.residual < 1e-10);
  CHECK(eq.p0 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eq.x0[eq.layout.omega] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(eq.delta_v0) < std::numbers::pi / 2);
  const Model m(c.params, c.control, c.ad);
  CHECK(m.rhs(eq.x0, c.inputs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("frequency offset shifts the active power by the droop term") {
  Case c;
  c.params.omega_g = 1.002;
  const Equilibrium eq = solve_equilibrium(c);
  CHECK(eq.x0[eq.layout.omega] == doctest::Approx(1.002).epsilon(1e-13));
  CHECK(eq.p0 == doctest::Approx(0.5 - c.params.d_p * 0.002).epsilon(1e-9));
}

TEST_CASE("no-load equilibrium") {
  Case c;
  c.params.r_g = 0;
  c.inputs.p_st = 0;
  const Equilibrium eq = solve_equilibrium(c);
  CHECK(eq.v0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(eq.delta_v0) < 1e-12);
  CHECK(std::abs(eq.x0[eq.layout.i_gd]) < 1e-12);
  CHECK(std::abs(eq.x0[eq.layout.i_gq]) < 1e-12);
  CHECK(std::abs(eq.x0[eq.layout.i_d]) < 1e-12);
  const SteadyState s = reduced_steady_state(0, 0, c.params, c.control);
  CHECK(std::abs(s.p) < 1e-12);
  CHECK(std::abs(s.q) < 1e-12);
  CHECK(s.v == doctest::Approx(1.0));
  CHECK(std::abs(s.delta_v) < 1e-12);
}

TEST_CASE("infeasible transfer does not converge") {
  Case c;
  c.params.v_g = 0.2;
  set_value(c, "l_g", 0.5);
  c.inputs.p_st = 1.2;
  // transfer limit of the line: max over delta_v of p(delta_v) with V within 20 % of V_st
  const double x = c.params.l_g, r = c.params.r_g, z2 = x * x + r * r;
  double p_max = 0;
  for (double v = 0.8; v <= 1.2; v += 0.01)
    for (double d = 0; d < std::numbers::pi; d += 1e-3)
      p_max = std::max(p_max, (v * v * r - v * c.params.v_g * (r * std::cos(d) - x * std::sin(d))) / z2);
  CHECK(p_max < 1.2);
  CHECK_THROWS_AS(solve_equilibrium(c), NoConvergence);
  CHECK_THROWS_AS(reduced_steady_state(1.2, 0, c.params, c.control), NoConvergence);
}

TEST_CASE("reduced and full steady states agree") {
  for (const RapControl& rc : {RapControl{DroopI{}}, RapControl{Rap{}}, RapControl{FixedVoltage{}},
                               RapControl{Voltage{}}, RapControl{Droop{}}, RapControl{PureDroop{}}}) {
    CAPTURE(variant_name(rc));
    const Case c = variant_case(rc);
    const Equilibrium eq = solve_equilibrium(c);
    const SteadyState s = reduced_steady_state(c.inputs.p_st, c.params.q_st, c.params, c.control);
    CHECK(eq.residual < 1e-10);
    CHECK(std::abs(s.p - eq.p0) < 1e-8);
    CHECK(std::abs(s.q - eq.q0) < 1e-8);
    CHECK(std::abs(s.v - eq.v0) < 1e-8);
    CHECK(std::abs(s.delta_v - eq.delta_v0) < 1e-8);
  }
}

TEST_CASE("droop-I condition holds on a lossless line") {
  Case c;
  c.params.r_g = 0;
  const SteadyState s = reduced_steady_state(0.7, 0.05, c.params, c.control);
  const DroopI& d = std::get<DroopI>(c.control);
  CHECK(std::abs(0.05 - s.q + d.d_q * (c.params.v_st - s.v)) < 1e-10);
}

TEST_CASE("damper leaves the equilibrium unchanged") {
  Case c;
  const Equilibrium plain = solve_equilibrium(c);
  for (AdConfig ad : {AdConfig{3.3e-6, 8e-5, true}, AdConfig{1e-5, 0.0, true}}) {
    c.ad = ad;
    const Equilibrium eq = solve_equilibrium(c);
    for (int i = 0; i < plain.layout.size; ++i) {
      const int j = eq.layout.find(plain.layout.labels[static_cast<std::size_t>(i)]);
      REQUIRE(j >= 0);
      CHECK(eq.x0[j] == plain.x0[i]);
    }
    if (eq.layout.ad_d >= 0) {
      CHECK(eq.x0[eq.layout.ad_d] == 0.0);
      CHECK(eq.x0[eq.layout.ad_q] == 0.0);
    }
    CHECK(eq.p0 == plain.p0);
    CHECK(eq.q0 == plain.q0);
  }
}

TEST_CASE("lossless power flow is homogeneous in the voltage level") {
  SystemParams p = table_one();
  p.r_g = 0;
  const RapControl rc = Voltage{};
  const SteadyState s1 = reduced_steady_state(0.5, 0.0, p, rc);
  const double a = 1.1;
  p.v_g *= a;
  p.v_st *= a;
  const SteadyState s2 = reduced_steady_state(0.5 * a * a, 0.0, p, rc);
  CHECK(s2.v == doctest::Approx(a * s1.v).epsilon(1e-10));
  CHECK(s2.delta_v == doctest::Approx(s1.delta_v).epsilon(1e-10));
  CHECK(s2.q == doctest::Approx(a * a * s1.q).epsilon(1e-9));
}
