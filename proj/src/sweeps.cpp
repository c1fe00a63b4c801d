#include "slgfm/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "slgfm/errors.hpp"

namespace slgfm {

namespace {

constexpr int kMaxTuneIterations = 40;

std::vector<cd> lambdas_of(const std::vector<Mode>& modes) {
  std::vector<cd> out;
  out.reserve(modes.size());
  for (const Mode& m : modes) out.push_back(m.lambda);
  return out;
}

std::string gain_name_of(const RapControl& control) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DroopI> || std::is_same_v<T, Rap>) return "k_q";
        else if constexpr (std::is_same_v<T, Voltage>) return "k_v";
        else if constexpr (std::is_same_v<T, Droop>) return "t_q";
        else return "";
      },
      control);
}

}  // namespace

std::optional<Mode> control_mode(const SpectrumReport& r) {
  int idx = -1;
  for (std::size_t i = 0; i < r.ss.state_labels.size(); ++i)
    if (r.ss.state_labels[i] == "e_rf" || r.ss.state_labels[i] == "q_f") idx = static_cast<int>(i);
  if (idx < 0) return std::nullopt;
  const Mat part = participation(r.ss.a, lambdas_of(r.modes));
  int best = 0;
  for (int k = 1; k < part.cols(); ++k)
    if (part(idx, k) > part(idx, best) + 1e-12) best = k;
  Mode m = r.modes[best];
  if (m.lambda.imag() < 0) m.lambda = std::conj(m.lambda);
  return m;
}

std::vector<int> match_modes(const std::vector<cd>& prev, const std::vector<cd>& next) {
  if (prev.size() != next.size()) throw std::invalid_argument("match_modes: spectra differ in size");
  const std::size_t n = prev.size();
  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pairs.push_back({std::abs(prev[i] - next[j]), i, j});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
  std::vector<int> perm(n, -1);
  std::vector<bool> used(n, false);
  for (const Pair& p : pairs) {
    if (perm[p.i] >= 0 || used[p.j]) continue;
    perm[p.i] = static_cast<int>(p.j);
    used[p.j] = true;
  }
  return perm;
}

LocusResult root_locus(const Case& base, const std::string& param, double from, double to, int n_points) {
  if (n_points < 2) throw std::invalid_argument("root_locus needs at least two grid points");
  if (!(from != to)) throw std::invalid_argument("root_locus needs a non-empty parameter range");
  if (!is_known_name(base, param)) throw std::invalid_argument("unknown sweep parameter '" + param + "'");

  LocusResult res;
  res.param = param;
  auto at = [&](double v) {
    Case c = base;
    set_value(c, param, v);
    return analyze(c);
  };

  for (int k = 0; k < n_points; ++k) {
    const double v = from + (to - from) * k / (n_points - 1);
    SpectrumReport r;
    try {
      r = at(v);
    } catch (const NoConvergence& e) {
      if (k == 0) throw EquilibriumLost(std::string("root locus start point: ") + e.what());
      res.truncated_at = v;
      res.truncation_reason = e.what();
      break;
    }
    std::vector<Mode> modes = r.modes;
    if (k > 0) {
      const std::vector<int> perm = match_modes(lambdas_of(res.modes.back()), lambdas_of(modes));
      std::vector<Mode> ordered(modes.size());
      for (std::size_t i = 0; i < perm.size(); ++i) ordered[i] = modes[perm[i]];
      modes = std::move(ordered);
    } else {
      const Mode* crit = r.critical(ModeClass::LCLResonance);
      for (std::size_t i = 0; crit && i < modes.size(); ++i)
        if (modes[i].lambda == crit->lambda) res.lcl_id = static_cast<int>(i);
    }
    res.values.push_back(v);
    res.modes.push_back(std::move(modes));
    res.max_re_lcl.push_back(r.max_real(ModeClass::LCLResonance));
    res.max_re.push_back(r.max_real());
  }

  if (res.lcl_id >= 0 && res.values.size() > 2) {
    std::vector<double> steps;
    for (std::size_t k = 1; k < res.modes.size(); ++k)
      steps.push_back(std::abs(res.modes[k][res.lcl_id].lambda - res.modes[k - 1][res.lcl_id].lambda));
    // a mis-assignment shows up as a spike against the neighbouring steps
    for (std::size_t k = 0; k < steps.size(); ++k) {
      double neighbour = 0.0;
      if (k > 0) neighbour = std::max(neighbour, steps[k - 1]);
      if (k + 1 < steps.size()) neighbour = std::max(neighbour, steps[k + 1]);
      if (steps[k] > 2.0 * neighbour + 1e-9) res.continuity_ok = false;
    }
  }

  for (std::size_t k = 1; k < res.values.size(); ++k) {
    const double a = res.max_re_lcl[k - 1], b = res.max_re_lcl[k];
    if (!std::isfinite(a) || !std::isfinite(b) || (a < 0) == (b < 0)) continue;
    double lo = res.values[k - 1], hi = res.values[k];
    const bool lo_negative = a < 0;
    const double tol = 1e-3 * std::abs(to - from);
    try {
      while (std::abs(hi - lo) > tol) {
        const double mid = 0.5 * (lo + hi);
        const double m = at(mid).max_real(ModeClass::LCLResonance);
        if ((m < 0) == lo_negative) lo = mid;
        else hi = mid;
      }
    } catch (const NoConvergence&) {
      // keep the bracket reached so far
    }
    res.crossing = 0.5 * (lo + hi);
    break;
  }
  return res;
}

TuneResult tune_control_mode(const Case& c, double target_re, double tol) {
  TuneResult out;
  out.control = c.control;
  out.gain_name = gain_name_of(c.control);
  if (out.gain_name.empty()) {
    out.mode = cd(std::numeric_limits<double>::quiet_NaN(), 0.0);
    return out;
  }

  Case work = c;
  auto eval = [&](double theta) {
    set_value(work, out.gain_name, std::exp(theta));
    const auto m = control_mode(analyze(work));
    if (!m) throw TuningFailed("variant has no control state to tune", std::nan(""));
    return m->lambda;
  };

  double theta = std::log(get_value(c, out.gain_name));
  cd lam = eval(theta);
  double best_err = std::abs(lam.real() - target_re);
  double best_re = lam.real();
  int it = 0;
  for (; it < kMaxTuneIterations && std::abs(lam.real() - target_re) > tol; ++it) {
    const double f0 = lam.real() - target_re;
    const double dth = 1e-4;
    const double slope = (eval(theta + dth).real() - eval(theta - dth).real()) / (2.0 * dth);
    if (slope == 0.0 || !std::isfinite(slope))
      throw TuningFailed("control mode does not respond to " + out.gain_name, best_re);
    double step = std::clamp(-f0 / slope, -1.0, 1.0);
    cd trial;
    bool accepted = false;
    for (int h = 0; h < 8; ++h) {
      try {
        trial = eval(theta + step);
        accepted = std::abs(trial.real() - target_re) < std::abs(f0);
      } catch (const NoConvergence&) {
      }
      if (accepted) break;
      step *= 0.5;
    }
    if (!accepted) break;
    theta += step;
    lam = trial;
    if (std::abs(lam.real() - target_re) < best_err) {
      best_err = std::abs(lam.real() - target_re);
      best_re = lam.real();
    }
  }
  if (std::abs(lam.real() - target_re) > tol) {
    std::ostringstream msg;
    msg << "tuning " << out.gain_name << " of variant " << variant_name(c.control)
        << " could not place the control mode at " << target_re << " (closest " << best_re << ")";
    throw TuningFailed(msg.str(), best_re);
  }
  set_value(work, out.gain_name, std::exp(theta));
  out.control = work.control;
  out.gain = std::exp(theta);
  out.mode = lam;
  out.iterations = it;
  return out;
}

std::vector<RankEntry> rank_rap_strategies(const Case& base, double target_re, double k_droop) {
  const std::vector<RapControl> variants = {DroopI{10.0, 4.0}, Rap{10.0},
                                            FixedVoltage{},    Voltage{10.0},
                                            Droop{k_droop, 0.03}, PureDroop{k_droop}};
  std::vector<RankEntry> out;
  for (const RapControl& v : variants) {
    Case c = base;
    c.control = v;
    RankEntry e;
    e.letter = variant_letter(v);
    e.name = std::string(variant_name(v));
    e.tuning = tune_control_mode(c, target_re);
    c.control = e.tuning.control;
    const SpectrumReport r = analyze(c);
    e.critical_re = r.max_real(ModeClass::LCLResonance);
    e.stable = r.stable();
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankEntry& a, const RankEntry& b) { return a.critical_re < b.critical_re; });
  return out;
}

double coupling_gain_kqp(const Case& c) {
  const StateSpaceModel ss = linearize(c);
  double worst = -std::numeric_limits<double>::infinity();
  for (cd l : eigs(ss.a)) worst = std::max(worst, l.real());
  if (!(worst < 0)) {
    std::ostringstream msg;
    msg << "K_qp undefined: linearized model is not stable (max Re = " << worst << ")";
    throw UnstableModel(msg.str());
  }
  const Vec x = ss.a.fullPivLu().solve(ss.b.col(0));
  return ss.d(1, 0) - ss.c.row(1).dot(x);
}

}  // namespace slgfm
