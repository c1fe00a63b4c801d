#include "slgfm/smallsig.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "slgfm/errors.hpp"
#include "slgfm/freq.hpp"

namespace slgfm {

namespace {

const std::vector<std::string> kInputLabels = {"p_st", "q_st", "v_st", "v_dcst", "v_g", "omega_g"};
const std::vector<std::string> kOutputLabels = {"p", "q", "v", "v_dc", "omega"};

Vec output_vector(const Model& m, const Vec& x, const Inputs& u) {
  const Outputs o = m.outputs(x, u);
  Vec y(5);
  y << o.p, o.q, o.v, o.v_dc, o.omega;
  return y;
}

// Model and inputs with one exogenous input shifted by du.
std::pair<Model, Inputs> shifted(const Model& m, const Inputs& u, int input, double du) {
  Inputs u2 = u;
  SystemParams p = m.params();
  switch (input) {
    case 0: u2.p_st += du; break;
    case 1: p.q_st += du; break;
    case 2: p.v_st += du; break;
    case 3: p.v_dcst += du; break;
    case 4: p.v_g += du; break;
    case 5: p.omega_g += du; break;
  }
  return {Model(p, m.control(), m.ad()), u2};
}

double input_value(const Model& m, const Inputs& u, int input) {
  const SystemParams& p = m.params();
  const std::array<double, 6> v = {u.p_st, p.q_st, p.v_st, p.v_dcst, p.v_g, p.omega_g};
  return v[input];
}

struct Jacobians {
  Mat a, b, c, d;
};

Jacobians jacobians(const Model& m, const Vec& x0, const Inputs& u, double factor) {
  const int n = m.size();
  Jacobians j{Mat(n, n), Mat(n, 6), Mat(5, n), Mat(5, 6)};
  Vec xp = x0, xm = x0;
  for (int i = 0; i < n; ++i) {
    const double h = factor * std::max(1e-7, 1e-7 * std::abs(x0[i]));
    xp[i] = x0[i] + h;
    xm[i] = x0[i] - h;
    j.a.col(i) = (m.rhs(xp, u) - m.rhs(xm, u)) / (2.0 * h);
    j.c.col(i) = (output_vector(m, xp, u) - output_vector(m, xm, u)) / (2.0 * h);
    xp[i] = xm[i] = x0[i];
  }
  for (int k = 0; k < 6; ++k) {
    const double h = factor * std::max(1e-7, 1e-7 * std::abs(input_value(m, u, k)));
    const auto [mp, up] = shifted(m, u, k, h);
    const auto [mm, um] = shifted(m, u, k, -h);
    j.b.col(k) = (mp.rhs(x0, up) - mm.rhs(x0, um)) / (2.0 * h);
    j.d.col(k) = (output_vector(mp, x0, up) - output_vector(mm, x0, um)) / (2.0 * h);
  }
  return j;
}

// Entrywise relative disagreement; entries far below the row scale are
// compared against 1e-3 of the row's largest magnitude instead of themselves.
double discrepancy(const Mat& j1, const Mat& j2) {
  double worst = 0.0;
  for (int r = 0; r < j1.rows(); ++r) {
    const double row_scale = j2.row(r).cwiseAbs().maxCoeff();
    for (int c = 0; c < j1.cols(); ++c) {
      const double ref = std::max({std::abs(j2(r, c)), 1e-3 * row_scale, 1e-9});
      worst = std::max(worst, std::abs(j1(r, c) - j2(r, c)) / ref);
    }
  }
  return worst;
}

bool within(double value, double centre, double rel) {
  return centre > 0 && std::abs(value - centre) <= rel * centre;
}

}  // namespace

StateSpaceModel linearize(const Model& model, const Equilibrium& eq, const Inputs& u) {
  if (eq.x0.size() != model.size())
    throw std::invalid_argument("linearize: equilibrium does not match the model layout");
  const Jacobians j1 = jacobians(model, eq.x0, u, 1.0);
  const Jacobians j2 = jacobians(model, eq.x0, u, 0.5);
  const double disc = std::max({discrepancy(j1.a, j2.a), discrepancy(j1.b, j2.b),
                                discrepancy(j1.c, j2.c), discrepancy(j1.d, j2.d)});
  if (!(disc <= kJacobianTolerance)) {
    std::ostringstream msg;
    msg << "linearize: Jacobians at h and h/2 disagree by " << disc << " (limit " << kJacobianTolerance << ")";
    throw JacobianInconsistent(msg.str(), disc);
  }
  StateSpaceModel ss;
  ss.a = j1.a;
  ss.b = j1.b;
  ss.c = j1.c;
  ss.d = j1.d;
  ss.state_labels = model.layout().labels;
  ss.input_labels = kInputLabels;
  ss.output_labels = kOutputLabels;
  ss.jacobian_discrepancy = disc;
  return ss;
}

StateSpaceModel linearize(const Case& c) {
  const Model m(c);
  return linearize(m, solve_equilibrium(m, c.inputs), c.inputs);
}

std::string_view to_string(ModeClass c) {
  switch (c) {
    case ModeClass::DC: return "DC";
    case ModeClass::AP: return "AP";
    case ModeClass::RAP: return "RAP";
    case ModeClass::SynchronousResonance: return "SynchronousResonance";
    case ModeClass::LCLResonance: return "LCLResonance";
    case ModeClass::Other: return "Other";
  }
  return "Other";
}

std::vector<Mode> classify_modes(const Mat& a, const std::vector<std::string>& labels,
                                 const SystemParams& params) {
  std::vector<cd> ev = eigs(a);
  std::sort(ev.begin(), ev.end(), [](cd x, cd y) {
    if (std::abs(x.imag()) != std::abs(y.imag())) return std::abs(x.imag()) > std::abs(y.imag());
    if (x.imag() != y.imag()) return x.imag() > y.imag();
    return x.real() > y.real();
  });
  const Mat part = participation(a, ev);

  const double w_res = lcl_resonant_frequency(params.l_f, params.l_g, params.c_f);
  const double wn = params.omega_n;
  const double lcl_hi = wn * (w_res + params.omega_g);
  const double lcl_lo = wn * std::abs(w_res - params.omega_g);
  const double sync = wn * params.omega_g;

  auto group_of = [](const std::string& l) {
    if (l == "xi_dc" || l == "v_dc") return 0;
    if (l == "omega" || l == "delta") return 1;
    if (l == "e_rf" || l == "q_f") return 2;
    return 3;
  };

  std::vector<Mode> modes;
  modes.reserve(ev.size());
  for (std::size_t k = 0; k < ev.size(); ++k) {
    Mode m;
    m.lambda = ev[k];
    const double im = std::abs(ev[k].imag());
    m.freq_hz = im / (2.0 * std::numbers::pi);
    const double mag = std::abs(ev[k]);
    m.damping_ratio = mag > 0 ? -ev[k].real() / mag : 0.0;

    const bool is_lcl = within(im, lcl_hi, 0.35) || within(im, lcl_lo, 0.35);
    const bool is_sync = within(im, sync, 0.35);
    if (is_lcl && !is_sync) {
      m.cls = ModeClass::LCLResonance;
    } else if (is_sync && !is_lcl) {
      m.cls = ModeClass::SynchronousResonance;
    } else if (!is_lcl && !is_sync) {
      std::array<double, 4> share{};
      for (int i = 0; i < part.rows(); ++i) share[group_of(labels[i])] += part(i, static_cast<int>(k));
      const auto best = std::max_element(share.begin(), share.end());
      double runner_up = 0.0;
      for (auto it = share.begin(); it != share.end(); ++it)
        if (it != best) runner_up = std::max(runner_up, *it);
      const int g = static_cast<int>(best - share.begin());
      if (*best > runner_up && g < 3) m.cls = std::array{ModeClass::DC, ModeClass::AP, ModeClass::RAP}[g];
    }
    modes.push_back(m);
  }
  return modes;
}

double SpectrumReport::max_real(ModeClass cls) const {
  double r = -std::numeric_limits<double>::infinity();
  for (const Mode& m : modes)
    if (m.cls == cls) r = std::max(r, m.lambda.real());
  return r;
}

double SpectrumReport::max_real() const {
  double r = -std::numeric_limits<double>::infinity();
  for (const Mode& m : modes) r = std::max(r, m.lambda.real());
  return r;
}

const Mode* SpectrumReport::critical(ModeClass cls) const {
  const Mode* best = nullptr;
  for (const Mode& m : modes) {
    if (m.cls != cls || m.lambda.imag() < 0) continue;
    if (!best || m.lambda.real() > best->lambda.real()) best = &m;
  }
  return best;
}

SpectrumReport analyze(const Case& c) {
  const Model m(c);
  SpectrumReport r;
  r.eq = solve_equilibrium(m, c.inputs);
  r.ss = linearize(m, r.eq, c.inputs);
  r.modes = classify_modes(r.ss.a, r.ss.state_labels, c.params);
  return r;
}

int track_nearest(const std::vector<cd>& spectrum, cd target, double ratio) {
  if (spectrum.empty()) throw ModeTrackingLost("empty spectrum");
  double best = std::numeric_limits<double>::infinity(), second = best;
  int idx = -1;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double d = std::abs(spectrum[i] - target);
    if (d < best) {
      second = best;
      best = d;
      idx = static_cast<int>(i);
    } else if (d < second) {
      second = d;
    }
  }
  if (best > 0 ? second < ratio * best : second == 0.0) {
    std::ostringstream msg;
    msg << "mode tracking ambiguous near " << target.real() << (target.imag() < 0 ? "-" : "+") << "j"
        << std::abs(target.imag()) << ": nearest " << best << ", runner-up " << second;
    throw ModeTrackingLost(msg.str());
  }
  return idx;
}

std::vector<SensitivityEntry> sensitivity(const Case& c, const std::vector<std::string>& names,
                                          double rel_step) {
  const SpectrumReport base = analyze(c);
  const Mode* crit = base.critical(ModeClass::LCLResonance);
  if (!crit) throw ModeTrackingLost("sensitivity: no LCL resonance mode at the base point");

  std::vector<SensitivityEntry> out;
  for (const std::string& name : names) {
    SensitivityEntry e;
    e.param = name;
    e.base_value = get_value(c, name);
    e.step = e.base_value != 0.0 ? rel_step * e.base_value : rel_step;
    Case pc = c;
    set_value(pc, name, e.base_value + e.step);
    const SpectrumReport r = analyze(pc);
    std::vector<cd> spectrum;
    for (const Mode& m : r.modes) spectrum.push_back(m.lambda);
    e.base_lambda = crit->lambda;
    e.perturbed_lambda = spectrum[track_nearest(spectrum, crit->lambda)];
    e.delta_re = e.perturbed_lambda.real() - e.base_lambda.real();
    out.push_back(e);
  }
  return out;
}

}  // namespace slgfm
