#include <doctest.h>

#include "slgfm/config.hpp"

using namespace slgfm;

TEST_CASE("sample config reproduces the built-in baseline") {
  const Case c = case_from_json(load_json_file(SLGFM_CONFIG_DIR "/baseline.json"));
  const Case d;
  CHECK(c.params.l_g == d.params.l_g);
  CHECK(c.params.r_g == doctest::Approx(d.params.r_g).epsilon(1e-15));
  CHECK(c.params.k_idc == d.params.k_idc);
  CHECK(std::get<DroopI>(c.control).k_q == 4.0);
  CHECK(c.inputs.p_st == 0.5);
  CHECK_FALSE(c.ad.enabled);
}

TEST_CASE("line resistance from the X/R ratio") {
  Case c = case_from_json(Json::parse(R"({"params": {"x_r_ratio": 4, "l_g": 0.4}})"));
  CHECK(c.params.r_g == doctest::Approx(0.1));
  c = case_from_json(Json::parse(R"({"params": {"l_g": 0.4, "r_g": 0.0}})"));
  CHECK(c.params.r_g == 0.0);
  CHECK_THROWS_AS(case_from_json(Json::parse(R"({"params": {"r_g": 0.1, "x_r_ratio": 4}})")), ConfigError);
}

TEST_CASE("variants and inputs") {
  const Case c = case_from_json(Json::parse(R"({"control": {"variant": "droop", "t_q": 0.05, "k_droop": 0.2}})"));
  REQUIRE(std::holds_alternative<Droop>(c.control));
  CHECK(std::get<Droop>(c.control).t_q == 0.05);
  CHECK(std::get<Droop>(c.control).k_droop == 0.2);

  const Case w = case_from_json(Json::parse(R"({"inputs": {"omega_r": 1.0}})"));
  CHECK(w.inputs.p_st == doctest::Approx(mppt_setpoint(1.0, w.params)));

  CHECK_THROWS_AS(case_from_json(Json::parse(R"({"control": {"variant": "rap", "d_q": 1}})")), ConfigError);
  CHECK_THROWS_AS(case_from_json(Json::parse(R"({"control": {"variant": "nope"}})")), ConfigError);
  CHECK_THROWS_AS(case_from_json(Json::parse(R"({"params": {"l_f": "x"}})")), ConfigError);
  CHECK_THROWS_AS(case_from_json(Json::parse(R"({"params": {"l_q": 1}})")), ConfigError);
  CHECK_THROWS_AS(case_from_json(Json::parse(R"({"params": {"l_f": -1}})")), ConfigError);
  CHECK_THROWS_AS(case_from_json(Json::parse(R"({"inputs": {"p_st": 2}})")), ConfigError);
  CHECK_THROWS_AS(case_from_json(Json::parse(R"([1, 2])")), ConfigError);
  CHECK_THROWS_AS(load_json_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("scenario section") {
  const Scenario s = scenario_from_json(Json::parse(R"({
    "sim": {"duration": 0.5, "dt": 1e-5, "record_every": 2, "outputs": ["p", "q"],
            "events": [{"time": 0.1, "target": "p_st", "value": 0.6}]}})"));
  CHECK(s.duration == 0.5);
  CHECK(s.record_every == 2);
  CHECK(s.outputs == std::vector<std::string>{"p", "q"});
  REQUIRE(s.events.size() == 1);
  CHECK(s.events[0].target == "p_st");
  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({"sim": {"dt": 1e-3}})")), ConfigError);
  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({"sim": {"events": [{"time": 0.1}]}})")), ConfigError);
}

TEST_CASE("round trip through JSON") {
  Case c;
  c.control = Voltage{7.5};
  c.ad = AdConfig{2e-6, 1e-4, true};
  const Case d = case_from_json(case_to_json(c));
  CHECK(std::get<Voltage>(d.control).k_v == 7.5);
  CHECK(d.ad.k_d == 2e-6);
  CHECK(d.params.r_g == c.params.r_g);
}

TEST_CASE("hash and number formatting") {
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(fmt(1.0) == "1.00000000000e+00");
  CHECK(fmt(-39.862) == "-3.98620000000e+01");
}
