#include <doctest.h>

#include <algorithm>

#include "slgfm/damping.hpp"
#include "slgfm/errors.hpp"
#include "slgfm/sweeps.hpp"

using namespace slgfm;

namespace {

bool sign_change_brackets(const LocusResult& r) {
  for (std::size_t k = 1; k < r.values.size(); ++k)
    if (r.max_re_lcl[k - 1] < 0 && r.max_re_lcl[k] >= 0)
      return *r.crossing >= std::min(r.values[k - 1], r.values[k]) &&
             *r.crossing <= std::max(r.values[k - 1], r.values[k]);
  return false;
}

}  // namespace

TEST_CASE("k_q locus") {
  const LocusResult r = root_locus(Case{}, "k_q", 4, 11, 40);
  REQUIRE(r.values.size() == 40);
  CHECK(r.continuity_ok);
  REQUIRE(r.crossing);
  CHECK(*r.crossing > 4);
  CHECK(*r.crossing < 11);
  CHECK(sign_change_brackets(r));
  CHECK(r.modes.back()[static_cast<std::size_t>(r.lcl_id)].lambda.real() > 0);

  // endpoints equal standalone analyses
  Case end;
  set_value(end, "k_q", 11);
  const SpectrumReport a = analyze(end);
  const SpectrumReport b = analyze(Case{});
  auto same_set = [](const std::vector<Mode>& x, const std::vector<Mode>& y) {
    std::vector<std::pair<double, double>> p, q;
    for (const Mode& m : x) p.emplace_back(m.lambda.real(), m.lambda.imag());
    for (const Mode& m : y) q.emplace_back(m.lambda.real(), m.lambda.imag());
    std::sort(p.begin(), p.end());
    std::sort(q.begin(), q.end());
    return p == q;
  };
  CHECK(same_set(r.modes.back(), a.modes));
  CHECK(same_set(r.modes.front(), b.modes));

  // the RAP mode moves from about -39 to about -106
  const auto first = control_mode(b), last = control_mode(a);
  REQUIRE(first);
  REQUIRE(last);
  CHECK(first->lambda.real() == doctest::Approx(-39).epsilon(0.15));
  CHECK(last->lambda.real() == doctest::Approx(-106).epsilon(0.15));
}

TEST_CASE("l_g locus") {
  const LocusResult r = root_locus(Case{}, "l_g", 0.2, 0.5, 40);
  CHECK(r.continuity_ok);
  REQUIRE(r.crossing);
  CHECK(sign_change_brackets(r));
  // active-power mode becomes better damped
  auto ap_zeta = [](const std::vector<Mode>& ms) {
    double z = 1;
    for (const Mode& m : ms)
      if (m.cls == ModeClass::AP) z = std::min(z, m.damping_ratio);
    return z;
  };
  CHECK(ap_zeta(r.modes.back()) > ap_zeta(r.modes.front()));
}

TEST_CASE("l_f locus") {
  const LocusResult r = root_locus(Case{}, "l_f", 0.1, 0.2, 40);
  CHECK_FALSE(r.crossing);
  CHECK(r.max_re_lcl.back() < r.max_re_lcl.front());
}

TEST_CASE("locus errors and truncation") {
  Case bad;
  bad.params.v_g = 0.2;
  set_value(bad, "l_g", 0.5);
  bad.inputs.p_st = 1.2;
  CHECK_THROWS_AS(root_locus(bad, "v_g", 0.2, 0.3, 40), EquilibriumLost);
  const LocusResult t = root_locus(Case{}, "p_st", 0.5, 10.0, 40);
  REQUIRE(t.truncated_at);
  CHECK(t.values.size() < 40);
  CHECK(*t.truncated_at > t.values.back());
  CHECK_FALSE(t.truncation_reason.empty());
  CHECK_THROWS_AS(root_locus(Case{}, "k_q", 4, 11, 1), std::invalid_argument);
  CHECK_THROWS_AS(root_locus(Case{}, "nope", 4, 11, 40), std::invalid_argument);
}

TEST_CASE("greedy mode matching") {
  const std::vector<cd> prev = {{-1, 10}, {-1, -10}, {-50, 0}};
  const std::vector<cd> next = {{-49, 0}, {-1.2, -10.1}, {-1.2, 10.1}};
  CHECK(match_modes(prev, next) == std::vector<int>{2, 1, 0});
  CHECK_THROWS_AS(match_modes(prev, {{1, 0}}), std::invalid_argument);
}

TEST_CASE("control-mode tuning") {
  const TuneResult t = tune_control_mode(Case{}, -40.0);
  CHECK(t.gain_name == "k_q");
  CHECK(t.mode.real() == doctest::Approx(-40).epsilon(0.05 / 40));
  CHECK(t.gain == doctest::Approx(4.0).epsilon(0.05));
  Case fixed;
  fixed.control = FixedVoltage{};
  const TuneResult none = tune_control_mode(fixed, -40.0);
  CHECK(none.gain_name.empty());
  CHECK(std::holds_alternative<FixedVoltage>(none.control));
  try {
    tune_control_mode(Case{}, -1e7);
    FAIL("expected TuningFailed");
  } catch (const TuningFailed& e) {
    CHECK(std::isfinite(e.achieved()));
  }
}

TEST_CASE("strategy ranking") {
  const auto r = rank_rap_strategies(Case{});
  REQUIRE(r.size() == 6);
  std::string order;
  for (const auto& e : r) order += e.letter;
  CHECK(order.back() == 'f');
  CHECK_FALSE(r.back().stable);
  // relative order of the integrating variants
  CHECK(order.find('b') < order.find('a'));
  CHECK(order.find('a') < order.find('d'));
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].critical_re <= r[i].critical_re);
}

TEST_CASE("coupling gain") {
  const double k0 = coupling_gain_kqp(Case{});
  Case zero;
  zero.ad = AdConfig{0.0, 1e-4, true};
  CHECK(coupling_gain_kqp(zero) == doctest::Approx(k0).epsilon(1e-12));
  double lo = k0, hi = k0;
  for (int i = 1; i <= 20; ++i) {
    Case c;
    c.ad = AdConfig{1e-5 * i / 20.0, 1e-4, true};
    const double k = coupling_gain_kqp(c);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  CHECK(hi - lo < 1e-6);

  // extra series resistance couples the loops more strongly while damping the filter
  double prev_k = std::abs(k0), prev_m = -lcl_margin(Case{});
  for (double r : {0.02, 0.04, 0.06}) {
    Case c;
    c.params.r_g += r;
    const double k = std::abs(coupling_gain_kqp(c)), m = -lcl_margin(c);
    CHECK(m > prev_m);
    CHECK(k > prev_k);
    prev_k = k;
    prev_m = m;
  }
  Case unstable;
  set_value(unstable, "k_q", 18);
  CHECK_THROWS_AS(coupling_gain_kqp(unstable), UnstableModel);
}
