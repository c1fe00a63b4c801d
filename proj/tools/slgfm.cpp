// slgfm: command-line front end for the converter stability analyses.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "slgfm/config.hpp"
#include "slgfm/damping.hpp"
#include "slgfm/errors.hpp"
#include "slgfm/freq.hpp"
#include "slgfm/sim.hpp"
#include "slgfm/sweeps.hpp"

namespace fs = std::filesystem;
using namespace slgfm;

namespace {

constexpr const char* kSchemaHelp = R"(config schema (JSON object, all sections optional):
  params      : {s_n, v_n, f_n, v_dcn, c_f, l_f, l_g, r_g | x_r_ratio, c_dc, h, d_p,
                 omega_g, v_g, omega_st, q_st, v_st, v_dcst, k_pdc, k_idc,
                 mppt: {rho, r_blade, c_opt, lambda_opt}}
  control     : {variant: droop_i|rap|fixed_voltage|voltage|droop|pure_droop, <gains>}
  inputs      : {p_st} or {omega_r}
  ad          : {k_d, t_d, enabled}
  locus       : {param, from, to, points}
  sweep       : {points, runs: [{param, from, to, expect: crossing|decreasing}]}
  bode        : {tf: g_q|g_q_sim|g_p_sim|g_dc_sim, f_min, f_max, points}
  sim         : {duration, dt, record_every, outputs, events: [{time, target, value}],
                 metrics: {column, band_lo, band_hi, t_from, t_to}}
  design_ad   : {rap_mode_target, l_g_max, margin}
  rank        : {target, k_droop}
  sensitivity : {params: [...], rel_step}
  kqp         : {points, k_d_max, r_add_max}
see README.md for details)";

struct CsvFile {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Run {
  Json config;
  Case base;
  int points = 0;  // 0: command default
  std::string param;
  std::optional<double> from, to;
  bool check = false;

  std::vector<CsvFile> files;
  Json results = Json::object();
  Json checks = Json::object();
};

Json section_or_empty(const Json& root, const char* name) {
  if (!root.contains(name)) return Json::object();
  const Json& s = root.at(name);
  if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  return s;
}

double num_or(const Json& s, const char* key, double fallback) {
  if (!s.contains(key)) return fallback;
  if (!s.at(key).is_number()) throw ConfigError(std::string(key) + " must be a number");
  return s.at(key).get<double>();
}

int points_or(const Run& r, const Json& s, int fallback) {
  if (r.points > 0) return r.points;
  const double p = num_or(s, "points", fallback);
  if (p < 2 || p != std::floor(p)) throw ConfigError("points must be an integer >= 2");
  return static_cast<int>(p);
}

std::string cplx(cd z) {
  std::ostringstream s;
  s << z.real() << (z.imag() < 0 ? "-j" : "+j") << std::abs(z.imag());
  return s.str();
}

Json mode_json(const Mode& m) {
  return {{"re", m.lambda.real()},
          {"im", m.lambda.imag()},
          {"freq_hz", m.freq_hz},
          {"damping_ratio", m.damping_ratio},
          {"class", std::string(to_string(m.cls))}};
}

CsvFile modes_csv(const std::string& name, const std::vector<Mode>& modes) {
  CsvFile f{name, {"index", "re", "im", "freq_hz", "damping_ratio", "class"}, {}};
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Mode& m = modes[i];
    f.rows.push_back({std::to_string(i), fmt(m.lambda.real()), fmt(m.lambda.imag()), fmt(m.freq_hz),
                      fmt(m.damping_ratio), std::string(to_string(m.cls))});
  }
  return f;
}

void set_check(Run& r, const std::string& name, bool ok) {
  if (r.check) r.checks[name] = ok;
}

// ---- subcommands ----

void cmd_eig(Run& r) {
  const SpectrumReport rep = analyze(r.base);
  r.files.push_back(modes_csv("modes.csv", rep.modes));

  CsvFile eq{"equilibrium.csv", {"state", "value"}, {}};
  for (std::size_t i = 0; i < rep.ss.state_labels.size(); ++i)
    eq.rows.push_back({rep.ss.state_labels[i], fmt(rep.eq.x0[static_cast<int>(i)])});
  r.files.push_back(eq);

  CsvFile part{"participation.csv", {"state"}, {}};
  const Mat pf = participation(rep.ss.a, [&] {
    std::vector<cd> l;
    for (const Mode& m : rep.modes) l.push_back(m.lambda);
    return l;
  }());
  for (std::size_t j = 0; j < rep.modes.size(); ++j) part.header.push_back("mode" + std::to_string(j));
  for (int i = 0; i < pf.rows(); ++i) {
    std::vector<std::string> row{rep.ss.state_labels[static_cast<std::size_t>(i)]};
    for (int j = 0; j < pf.cols(); ++j) row.push_back(fmt(pf(i, j)));
    part.rows.push_back(row);
  }
  r.files.push_back(part);

  r.results["equilibrium"] = {{"p", rep.eq.p0},          {"q", rep.eq.q0},     {"v", rep.eq.v0},
                              {"delta_v", rep.eq.delta_v0}, {"residual", rep.eq.residual}};
  r.results["jacobian_discrepancy"] = rep.ss.jacobian_discrepancy;
  r.results["stable"] = rep.stable();
  r.results["max_re"] = rep.max_real();
  if (const Mode* m = rep.critical(ModeClass::LCLResonance)) r.results["critical_lcl"] = mode_json(*m);
  if (const Mode* m = rep.critical(ModeClass::RAP)) r.results["rap_mode"] = mode_json(*m);

  // two LCL pairs near w_n (w_res -+ w_g), all modes stable, RAP mode at -39 +-15 %
  const SystemParams& p = r.base.params;
  const double w_res = lcl_resonant_frequency(p.l_f, p.l_g, p.c_f);
  const double hi = p.omega_n * (w_res + p.omega_g), lo = p.omega_n * (w_res - p.omega_g);
  bool hit_hi = false, hit_lo = false;
  int lcl_pairs = 0;
  for (const Mode& m : rep.modes) {
    if (m.cls != ModeClass::LCLResonance || m.lambda.imag() <= 0) continue;
    ++lcl_pairs;
    hit_hi = hit_hi || std::abs(m.lambda.imag() - hi) <= 0.2 * hi;
    hit_lo = hit_lo || std::abs(m.lambda.imag() - lo) <= 0.2 * lo;
  }
  const Mode* rap = rep.critical(ModeClass::RAP);
  set_check(r, "two_lcl_pairs", lcl_pairs == 2 && hit_hi && hit_lo);
  set_check(r, "all_stable", rep.stable());
  set_check(r, "rap_mode_near_-39", rap && std::abs(rap->lambda.real() + 39.0) <= 0.15 * 39.0);
}

void locus_csv(Run& r, const LocusResult& res, const std::string& name) {
  CsvFile f{name, {"param_value", "mode_id", "re", "im", "class"}, {}};
  for (std::size_t k = 0; k < res.values.size(); ++k)
    for (std::size_t id = 0; id < res.modes[k].size(); ++id) {
      const Mode& m = res.modes[k][id];
      f.rows.push_back({fmt(res.values[k]), std::to_string(id), fmt(m.lambda.real()), fmt(m.lambda.imag()),
                        std::string(to_string(m.cls))});
    }
  r.files.push_back(f);
}

Json locus_json(const LocusResult& res) {
  Json j = {{"param", res.param},
            {"points", res.values.size()},
            {"lcl_id", res.lcl_id},
            {"continuity_ok", res.continuity_ok},
            {"max_re_lcl_first", res.max_re_lcl.front()},
            {"max_re_lcl_last", res.max_re_lcl.back()}};
  j["crossing"] = res.crossing ? Json(*res.crossing) : Json(nullptr);
  j["truncated_at"] = res.truncated_at ? Json(*res.truncated_at) : Json(nullptr);
  if (res.truncated_at) j["truncation_reason"] = res.truncation_reason;
  return j;
}

void cmd_locus(Run& r) {
  const Json s = section_or_empty(r.config, "locus");
  std::string param = r.param;
  if (param.empty()) {
    if (!s.contains("param") || !s.at("param").is_string())
      throw ConfigError("locus needs --param or locus.param");
    param = s.at("param").get<std::string>();
  }
  if (!is_known_name(r.base, param)) throw ConfigError("unknown locus parameter '" + param + "'");
  const double from = r.from ? *r.from : num_or(s, "from", std::nan(""));
  const double to = r.to ? *r.to : num_or(s, "to", std::nan(""));
  if (!std::isfinite(from) || !std::isfinite(to) || from == to)
    throw ConfigError("locus needs a finite, non-empty range (--from/--to or locus.from/locus.to)");
  const LocusResult res = root_locus(r.base, param, from, to, points_or(r, s, 40));
  locus_csv(r, res, "locus.csv");
  r.results["locus"] = locus_json(res);
  set_check(r, "continuity", res.continuity_ok);
  set_check(r, "complete", !res.truncated_at.has_value());
}

void cmd_sweep(Run& r) {
  const Json s = section_or_empty(r.config, "sweep");
  Json runs = s.contains("runs") ? s.at("runs")
                                 : Json::parse(R"([{"param":"k_q","from":4,"to":11,"expect":"crossing"},
                                                   {"param":"l_g","from":0.2,"to":0.5,"expect":"crossing"},
                                                   {"param":"l_f","from":0.1,"to":0.2,"expect":"decreasing"}])");
  if (!runs.is_array() || runs.empty()) throw ConfigError("sweep.runs must be a non-empty array");
  const int n = points_or(r, s, 40);
  CsvFile summary{"sweep.csv", {"param", "param_value", "max_re_lcl", "max_re"}, {}};
  r.results["runs"] = Json::array();
  for (const Json& run : runs) {
    if (!run.is_object() || !run.contains("param") || !run.at("param").is_string())
      throw ConfigError("each sweep run needs param, from and to");
    const std::string param = run.at("param").get<std::string>();
    if (!is_known_name(r.base, param)) throw ConfigError("unknown sweep parameter '" + param + "'");
    const double from = num_or(run, "from", std::nan("")), to = num_or(run, "to", std::nan(""));
    if (!std::isfinite(from) || !std::isfinite(to) || from == to) throw ConfigError("sweep run needs from != to");
    const LocusResult res = root_locus(r.base, param, from, to, n);
    for (std::size_t k = 0; k < res.values.size(); ++k)
      summary.rows.push_back({param, fmt(res.values[k]), fmt(res.max_re_lcl[k]), fmt(res.max_re[k])});
    locus_csv(r, res, "locus_" + param + ".csv");
    r.results["runs"].push_back(locus_json(res));

    const std::string expect = run.value("expect", "");
    if (expect == "crossing")
      set_check(r, param + "_rhp_crossing", res.crossing.has_value() && res.continuity_ok);
    else if (expect == "decreasing")
      set_check(r, param + "_decreasing",
                !res.truncated_at && res.max_re_lcl.back() < res.max_re_lcl.front());
    else if (!expect.empty())
      throw ConfigError("sweep expect must be 'crossing' or 'decreasing'");
  }
  r.files.insert(r.files.begin(), summary);
}

void cmd_bode(Run& r) {
  const Json s = section_or_empty(r.config, "bode");
  const std::string which = s.value("tf", "g_q");
  const double f_min = num_or(s, "f_min", 0.1), f_max = num_or(s, "f_max", 2000.0);
  if (!(f_min > 0 && f_max > f_min)) throw ConfigError("bode needs 0 < f_min < f_max");
  const int n = points_or(r, s, 400);

  const Equilibrium eq = solve_equilibrium(r.base);
  std::optional<RationalTF> tf;
  if (which == "g_q") {
    const auto* dq = std::get_if<DroopI>(&r.base.control);
    if (!dq) throw ConfigError("bode tf g_q needs control.variant droop_i");
    tf = rap_open_loop_tf(r.base.params, *dq, eq).g_q;
  } else {
    const SimplifiedTfs st = simplified_tfs(r.base.params, r.base.control, eq);
    if (which == "g_dc_sim") tf = st.g_dc_sim;
    else if (which == "g_p_sim") tf = st.g_p_sim;
    else if (which == "g_q_sim") {
      if (!st.has_q_loop) throw ConfigError("variant has no simplified reactive-power loop");
      tf = st.g_q_sim;
    } else {
      throw ConfigError("bode.tf must be g_q, g_q_sim, g_p_sim or g_dc_sim");
    }
  }
  std::vector<double> freqs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    freqs[static_cast<std::size_t>(i)] = f_min * std::pow(f_max / f_min, static_cast<double>(i) / (n - 1));
  const BodeData b = bode(*tf, freqs);

  CsvFile f{"bode.csv", {"freq_hz", "mag_db", "phase_deg"}, {}};
  for (std::size_t i = 0; i < b.freq_hz.size(); ++i)
    f.rows.push_back({fmt(b.freq_hz[i]), fmt(b.mag_db[i]), fmt(b.phase_deg[i])});
  r.files.push_back(f);
  CsvFile pz{"poles_zeros.csv", {"kind", "re", "im"}, {}};
  for (cd p : tf->poles()) pz.rows.push_back({"pole", fmt(p.real()), fmt(p.imag())});
  for (cd z : tf->zeros()) pz.rows.push_back({"zero", fmt(z.real()), fmt(z.imag())});
  r.files.push_back(pz);

  r.results["tf"] = which;
  r.results["rhp_poles"] = b.rhp_poles;
  r.results["poles"] = Json::array();
  for (cd p : tf->poles()) r.results["poles"].push_back(cplx(p));
  set_check(r, "nonminimum_phase", b.rhp_poles > 0);
}

void cmd_sim(Run& r) {
  const Scenario sc = scenario_from_json(r.config);
  const TimeSeries ts = simulate(sc);

  CsvFile f{"timeseries.csv", {"t"}, {}};
  for (const std::string& n : ts.names) f.header.push_back(n);
  f.rows.reserve(ts.t.size());
  for (std::size_t k = 0; k < ts.t.size(); ++k) {
    std::vector<std::string> row{fmt(ts.t[k])};
    for (const auto& col : ts.columns) row.push_back(fmt(col[k]));
    f.rows.push_back(std::move(row));
  }
  r.files.push_back(std::move(f));
  r.results["samples"] = ts.t.size();
  r.results["diverged"] = ts.diverged;
  if (ts.diverged) {
    r.results["divergence_time"] = ts.divergence_time;
    r.results["divergence_reason"] = ts.divergence_reason;
  }
  set_check(r, "finished", !ts.diverged);

  const Json sim = section_or_empty(r.config, "sim");
  if (sim.contains("metrics")) {
    const Json& m = sim.at("metrics");
    if (!m.is_object() || !m.contains("column") || !m.at("column").is_string())
      throw ConfigError("sim.metrics needs column, band_lo and band_hi");
    const std::string col = m.at("column").get<std::string>();
    if (std::find(ts.names.begin(), ts.names.end(), col) == ts.names.end())
      throw ConfigError("sim.metrics.column '" + col + "' is not a recorded output");
    const EnvelopeMetrics em =
        envelope_metrics(ts, col, num_or(m, "band_lo", std::nan("")), num_or(m, "band_hi", std::nan("")),
                         num_or(m, "t_from", -INFINITY), num_or(m, "t_to", INFINITY));
    r.results["metrics"] = {{"column", col},
                            {"has_peak", em.has_peak},
                            {"dominant_freq_hz", em.dominant_freq_hz},
                            {"peak_amplitude", em.peak_amplitude},
                            {"growth_rate", em.growth_rate}};
    CsvFile e{"envelope.csv", {"t", "amplitude"}, {}};
    for (std::size_t k = 0; k < em.env_t.size(); ++k) e.rows.push_back({fmt(em.env_t[k]), fmt(em.envelope[k])});
    r.files.push_back(e);
  }
  require_finished(ts);
}

void cmd_design_ad(Run& r) {
  const AdDesignSpec spec = design_spec_from_json(section_or_empty(r.config, "design_ad"));
  const AdDesign d = design_ad(r.base, spec);
  r.results["k_d"] = d.ad.k_d;
  r.results["t_d"] = d.ad.t_d;
  r.results["k_q_worst"] = d.k_q_worst;
  r.results["omega_res_worst"] = d.omega_res_worst;
  r.results["k_d_ideal"] = d.k_d_ideal;
  r.results["margin_ideal"] = d.margin_ideal;
  r.results["margin"] = d.margin_final;
  r.results["nudges"] = d.nudges;

  const Case worst = apply_ad(worst_case(r.base, spec), d.ad);
  const SpectrumReport verify = analyze(worst);
  r.files.push_back(modes_csv("worst_case_modes.csv", verify.modes));

  const SpectrumReport base = analyze(apply_ad(r.base, d.ad));
  r.files.push_back(modes_csv("baseline_modes.csv", base.modes));
  Case high = apply_ad(r.base, d.ad);
  set_value(high, "k_q", 18.0);
  const SpectrumReport hk = analyze(high);
  r.results["baseline_max_re"] = base.max_real();
  r.results["k_q_18_max_re"] = hk.max_real();

  set_check(r, "margin", verify.max_real(ModeClass::LCLResonance) <= spec.margin);
  set_check(r, "baseline_stable", base.stable());
  set_check(r, "k_q_18_stable", hk.stable());
}

void cmd_rank(Run& r) {
  const Json s = section_or_empty(r.config, "rank");
  const double target = num_or(s, "target", -40.0);
  const auto ranking = rank_rap_strategies(r.base, target, num_or(s, "k_droop", 0.1));
  CsvFile f{"rank.csv", {"rank", "letter", "variant", "gain_name", "gain", "control_mode_re", "critical_lcl_re", "stable"}, {}};
  std::string order;
  r.results["ranking"] = Json::array();
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const RankEntry& e = ranking[i];
    const bool tuned = !e.tuning.gain_name.empty();
    f.rows.push_back({std::to_string(i + 1), std::string(1, e.letter), e.name, tuned ? e.tuning.gain_name : "-",
                      tuned ? fmt(e.tuning.gain) : "-", tuned ? fmt(e.tuning.mode.real()) : "-",
                      fmt(e.critical_re), e.stable ? "1" : "0"});
    order += e.letter;
    r.results["ranking"].push_back({{"letter", std::string(1, e.letter)},
                                    {"variant", e.name},
                                    {"critical_re", e.critical_re},
                                    {"stable", e.stable}});
  }
  r.files.push_back(f);
  r.results["order"] = order;

  bool tuned_ok = true;
  for (const RankEntry& e : ranking)
    if (!e.tuning.gain_name.empty()) tuned_ok = tuned_ok && std::abs(e.tuning.mode.real() - target) <= 1.0;
  const bool f_unstable = !ranking.empty() && ranking.back().letter == 'f' && !ranking.back().stable;
  set_check(r, "tuned_to_target", tuned_ok);
  set_check(r, "order_ecbadf", order == "ecbadf");
  set_check(r, "f_unstable", f_unstable);
}

void cmd_sensitivity(Run& r) {
  const Json s = section_or_empty(r.config, "sensitivity");
  std::vector<std::string> names = {"l_g", "l_f", "k_q", "k_pdc", "k_idc", "h", "d_p"};
  if (s.contains("params")) {
    if (!s.at("params").is_array()) throw ConfigError("sensitivity.params must be an array of names");
    names.clear();
    for (const Json& n : s.at("params")) {
      if (!n.is_string() || !is_known_name(r.base, n.get<std::string>()))
        throw ConfigError("sensitivity.params holds an unknown name");
      names.push_back(n.get<std::string>());
    }
  }
  const auto entries = sensitivity(r.base, names, num_or(s, "rel_step", 0.01));
  CsvFile f{"sensitivity.csv", {"param", "base_value", "step", "base_re", "base_im", "perturbed_re", "perturbed_im", "delta_re"}, {}};
  Json by_name = Json::object();
  for (const auto& e : entries) {
    f.rows.push_back({e.param, fmt(e.base_value), fmt(e.step), fmt(e.base_lambda.real()), fmt(e.base_lambda.imag()),
                      fmt(e.perturbed_lambda.real()), fmt(e.perturbed_lambda.imag()), fmt(e.delta_re)});
    by_name[e.param] = e.delta_re;
  }
  r.files.push_back(f);
  r.results["delta_re"] = by_name;

  if (r.check) {
    auto d = [&](const char* n) -> std::optional<double> {
      if (!by_name.contains(n)) return std::nullopt;
      return by_name.at(n).get<double>();
    };
    if (d("l_g")) set_check(r, "l_g_destabilizes", *d("l_g") > 0);
    if (d("l_f")) set_check(r, "l_f_stabilizes", *d("l_f") < 0);
    if (d("k_q")) set_check(r, "k_q_destabilizes", *d("k_q") > 0);
    if (d("l_g")) {
      bool decoupled = true;
      for (const char* n : {"k_pdc", "k_idc", "h", "d_p"})
        if (d(n)) decoupled = decoupled && std::abs(*d(n)) < 0.01 * std::abs(*d("l_g"));
      set_check(r, "slow_loops_decoupled", decoupled);
    }
  }
}

void cmd_kqp(Run& r) {
  const Json s = section_or_empty(r.config, "kqp");
  const int n = points_or(r, s, 20);
  const double k_d_max = num_or(s, "k_d_max", 1e-5);
  const double r_max = num_or(s, "r_add_max", 0.1);
  if (!(k_d_max > 0 && r_max > 0)) throw ConfigError("kqp.k_d_max and kqp.r_add_max must be positive");
  const double t_d = r.base.ad.t_d;

  Case no_ad = r.base;
  no_ad.ad = AdConfig{};
  const double k0 = coupling_gain_kqp(no_ad);
  r.results["kqp_no_ad"] = k0;

  // damper on the capacitor voltage
  CsvFile v4{"kqp_rv4.csv", {"k_d", "kqp", "max_re_lcl"}, {}};
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i < n; ++i) {
    const double k_d = k_d_max * i / (n - 1);
    Case c = no_ad;
    c.ad = AdConfig{k_d, t_d, k_d > 0};
    const double k = coupling_gain_kqp(c);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
    v4.rows.push_back({fmt(k_d), fmt(k), fmt(lcl_margin(c))});
  }
  r.files.push_back(v4);
  r.results["rv4_variation"] = hi - lo;

  // series virtual resistor: extra line resistance
  CsvFile v5{"kqp_rv5.csv", {"r_add", "kqp", "neg_re_lcl"}, {}};
  std::vector<std::pair<double, double>> pts;  // (-Re, |K_qp|)
  for (int i = 0; i < n; ++i) {
    const double ra = r_max * i / (n - 1);
    Case c = no_ad;
    c.params.r_g += ra;
    const double k = coupling_gain_kqp(c);
    const double m = -lcl_margin(c);
    pts.emplace_back(m, std::abs(k));
    v5.rows.push_back({fmt(ra), fmt(k), fmt(m)});
  }
  r.files.push_back(v5);
  std::sort(pts.begin(), pts.end());
  bool increasing = true;
  for (std::size_t i = 1; i < pts.size(); ++i) increasing = increasing && pts[i].second > pts[i - 1].second;
  r.results["rv5_kqp_first"] = pts.front().second;
  r.results["rv5_kqp_last"] = pts.back().second;

  set_check(r, "rv4_invariant", hi - lo < 1e-6);
  set_check(r, "rv5_increasing", increasing);
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-signal and time-domain stability analysis of a single-loop grid-forming converter"};
  app.require_subcommand(1, 1);
  app.footer(kSchemaHelp);

  std::string config_path, out_dir = ".";
  Run run;
  double from = 0, to = 0;
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--points", run.points, "grid points (overrides the config)")->check(CLI::Range(2, 100000));
  app.add_option("--param", run.param, "locus parameter");
  auto* from_opt = app.add_option("--from", from, "locus start value");
  auto* to_opt = app.add_option("--to", to, "locus end value");
  app.add_flag("--check", run.check, "evaluate pass/fail checks");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"eig", "eigenvalues, mode classes and participation factors"},
      {"locus", "root locus over one parameter"},
      {"sweep", "stability-margin sweeps (default: k_q, l_g, l_f)"},
      {"bode", "Bode data of a loop transfer function"},
      {"sim", "nonlinear time-domain simulation"},
      {"design-ad", "worst-case active-damping design"},
      {"rank-rap", "ranking of the reactive-power control structures"},
      {"sensitivity", "parameter sensitivities of the critical LCL mode"},
      {"kqp", "active/reactive coupling gain against damper settings"}};
  for (const auto& [name, desc] : commands) app.add_subcommand(name, desc)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (*from_opt) run.from = from;
  if (*to_opt) run.to = to;
  const std::string command = app.get_subcommands().front()->get_name();

  std::string raw;
  try {
    run.config = load_json_file(config_path);
    raw = read_bytes(config_path);
    run.base = case_from_json(run.config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n" << kSchemaHelp << "\n";
    return 1;
  }

  int status = 0;
  std::string error;
  try {
    if (command == "eig") cmd_eig(run);
    else if (command == "locus") cmd_locus(run);
    else if (command == "sweep") cmd_sweep(run);
    else if (command == "bode") cmd_bode(run);
    else if (command == "sim") cmd_sim(run);
    else if (command == "design-ad") cmd_design_ad(run);
    else if (command == "rank-rap") cmd_rank(run);
    else if (command == "sensitivity") cmd_sensitivity(run);
    else if (command == "kqp") cmd_kqp(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n" << kSchemaHelp << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    status = 2;
    error = e.what();
  }
  // a diverged simulation still reports its truncated series
  if (status == 2 && !(command == "sim" && !run.files.empty())) return 2;

  Json report;
  std::string echo;
  for (int i = 0; i < argc; ++i) echo += (i ? " " : "") + std::string(argv[i]);
  report["command"] = echo;
  report["subcommand"] = command;
  report["config_hash"] = "fnv1a64:" + hex64(fnv1a(raw));
  report["outputs"] = Json::array();
  report["results"] = run.results;
  report["status"] = status == 0 ? "ok" : "error";
  if (!error.empty()) report["error"] = error;
  if (run.check) {
    report["checks"] = run.checks;
    bool all = true;
    for (const auto& [k, v] : run.checks.items()) all = all && v.get<bool>();
    report["checks_passed"] = all;
  }

  try {
    fs::create_directories(out_dir);
    for (const CsvFile& f : run.files) {
      write_csv((fs::path(out_dir) / f.name).string(), f.header, f.rows);
      report["outputs"].push_back(f.name);
    }
    report["outputs"].push_back("report.json");
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << report.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write report.json");
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 1;
  }

  for (const auto& [k, v] : run.checks.items())
    std::cout << (v.get<bool>() ? "PASS " : "FAIL ") << command << ": " << k << "\n";
  std::cout << "wrote " << run.files.size() + 1 << " file(s) to " << out_dir << "\n";
  return status;
}
