#include "slgfm/damping.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "slgfm/errors.hpp"
#include "slgfm/freq.hpp"

namespace slgfm {

namespace {

constexpr double kKdMin = 1e-8;
constexpr double kKdMax = 1e-3;
constexpr int kGridPerDecade = 4;

}  // namespace

void AdDesignSpec::validate(const SystemParams& baseline) const {
  if (!(margin < 0)) throw std::invalid_argument("damper design margin must be negative");
  if (!(l_g_max >= baseline.l_g)) throw std::invalid_argument("l_g_max must not be below the baseline l_g");
  if (!(rap_mode_target < 0)) throw std::invalid_argument("RAP mode target must be negative");
}

Model apply_ad(const Model& model, AdConfig ad) {
  ad.enabled = true;
  return Model(model.params(), model.control(), ad);
}

Case apply_ad(Case c, AdConfig ad) {
  ad.enabled = true;
  ad.validate();
  c.ad = ad;
  return c;
}

Case worst_case(const Case& base, const AdDesignSpec& spec, double* k_q) {
  Case w = base;
  w.ad = AdConfig{};
  set_value(w, "l_g", spec.l_g_max);
  const TuneResult t = tune_control_mode(w, spec.rap_mode_target);
  if (t.gain_name != "k_q")
    throw std::invalid_argument("damper design needs a k_q-tuned variant (droop_i or rap)");
  w.control = t.control;
  if (k_q) *k_q = t.gain;
  return w;
}

double lcl_margin(const Case& c) { return analyze(c).max_real(ModeClass::LCLResonance); }

AdDesign design_ad(const Case& base, const AdDesignSpec& spec) {
  spec.validate(base.params);
  AdDesign d;
  const Case worst = worst_case(base, spec, &d.k_q_worst);
  d.omega_res_worst = lcl_resonant_frequency(worst.params.l_f, worst.params.l_g, worst.params.c_f);

  // a resonance pushed out of the LCL band cannot be verified
  auto margin_at = [&](double k_d, double t_d) {
    const double m = lcl_margin(apply_ad(worst, AdConfig{k_d, t_d, true}));
    return std::isinf(m) ? std::numeric_limits<double>::infinity() : m;
  };

  // ideal derivative: log grid, then bisection
  double lo = 0.0, hi = 0.0, m_hi = 0.0;
  const int n_grid = static_cast<int>(std::round(std::log10(kKdMax / kKdMin) * kGridPerDecade));
  for (int i = 0; i <= n_grid; ++i) {
    const double k = kKdMin * std::pow(10.0, static_cast<double>(i) / kGridPerDecade);
    const double m = margin_at(k, 0.0);
    if (m <= spec.margin) {
      hi = k;
      m_hi = m;
      break;
    }
    lo = k;
  }
  if (hi == 0.0) {
    std::ostringstream msg;
    msg << "no k_d <= " << kKdMax << " reaches max Re(lambda_LCL) <= " << spec.margin;
    throw DesignInfeasible(msg.str());
  }
  while (lo > 0.0 && hi / lo > 1.01) {
    const double mid = std::sqrt(lo * hi);
    const double m = margin_at(mid, 0.0);
    if (m <= spec.margin) {
      hi = mid;
      m_hi = m;
    } else {
      lo = mid;
    }
  }
  d.k_d_ideal = hi;
  d.margin_ideal = m_hi;

  // corner of the derivative filter at twice the worst-case resonance
  const double t_d = 1.0 / (2.0 * worst.params.omega_n * d.omega_res_worst);
  double k_d = hi;
  double m = margin_at(k_d, t_d);
  while (m > spec.margin) {
    if (k_d * 1.05 > 2.0 * hi) {
      std::ostringstream msg;
      msg << "filtered damper misses the margin (max Re = " << m << ") even at twice the ideal gain";
      throw DesignInfeasible(msg.str());
    }
    k_d *= 1.05;
    ++d.nudges;
    m = margin_at(k_d, t_d);
  }
  d.ad = AdConfig{k_d, t_d, true};
  d.margin_final = m;
  return d;
}

}  // namespace slgfm
