#include "slgfm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "slgfm/equilibrium.hpp"
#include "slgfm/errors.hpp"
#include "slgfm/freq.hpp"

namespace slgfm {

namespace {

constexpr double kDivergenceBound = 1e6;

const std::vector<std::string> kOutputNames = {"v_dc", "p", "q", "v", "omega", "e_rf", "e_d", "e_q", "i_dc", "i_wdc"};

bool is_output_name(const std::string& n) {
  return std::find(kOutputNames.begin(), kOutputNames.end(), n) != kOutputNames.end();
}

double output_field(const Outputs& o, const std::string& n) {
  if (n == "v_dc") return o.v_dc;
  if (n == "p") return o.p;
  if (n == "q") return o.q;
  if (n == "v") return o.v;
  if (n == "omega") return o.omega;
  if (n == "e_rf") return o.e_rf;
  if (n == "e_d") return o.e_d;
  if (n == "e_q") return o.e_q;
  if (n == "i_dc") return o.i_dc;
  return o.i_wdc;
}

long long grid_index(double time, double dt) { return std::llround(time / dt); }

bool on_grid(double time, double dt) {
  return std::abs(time / dt - static_cast<double>(grid_index(time, dt))) < 1e-6;
}

// Hann-windowed amplitude of the component at f within x[begin, begin + n).
double projection(const std::vector<double>& x, std::size_t begin, std::size_t n, double dt, double f) {
  std::complex<double> acc = 0.0;
  double wsum = 0.0;
  const std::complex<double> rot = std::polar(1.0, -2.0 * std::numbers::pi * f * dt);
  std::complex<double> ph = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n);
    acc += w * x[begin + i] * ph;
    wsum += w;
    ph *= rot;
    if ((i & 1023) == 1023) ph /= std::abs(ph);
  }
  return 2.0 * std::abs(acc) / wsum;
}

void check_band(double dt, double lo, double hi) {
  if (!(dt > 0)) throw std::invalid_argument("sample interval must be positive");
  if (!(lo >= 0 && hi > lo)) throw std::invalid_argument("band must satisfy 0 <= low < high");
  if (!(hi < 0.5 / dt)) throw std::invalid_argument("band reaches the Nyquist frequency");
}

}  // namespace

double max_time_step(const SystemParams& p) {
  const double f_res = p.omega_n * lcl_resonant_frequency(p.l_f, p.l_g, p.c_f) / (2.0 * std::numbers::pi);
  return 1.0 / (20.0 * f_res);
}

void Scenario::validate() const {
  if (!(duration > 0)) throw std::invalid_argument("scenario duration must be positive");
  if (!(dt > 0)) throw std::invalid_argument("scenario dt must be positive");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (!on_grid(duration, dt)) throw std::invalid_argument("duration is not a multiple of dt");

  Case c = base;
  (void)Model(c);  // validates parameters
  auto check_dt = [&](const SystemParams& p) {
    if (dt > max_time_step(p) * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "dt = " << dt << " s does not resolve the LCL resonance (need <= " << max_time_step(p) << " s)";
      throw std::invalid_argument(msg.str());
    }
  };
  check_dt(c.params);
  const StateLayout layout0 = StateLayout::make(c.control, c.ad);

  double prev = 0.0;
  for (const Event& e : events) {
    if (e.time < prev) throw std::invalid_argument("scenario events must be sorted by time");
    if (e.time < 0 || e.time > duration) throw std::invalid_argument("event time outside the scenario");
    if (!on_grid(e.time, dt)) {
      std::ostringstream msg;
      msg << "event at t = " << e.time << " s is not on the dt grid";
      throw std::invalid_argument(msg.str());
    }
    if (!is_known_name(c, e.target)) throw std::invalid_argument("unknown event target '" + e.target + "'");
    set_value(c, e.target, e.value);
    (void)Model(c);
    check_dt(c.params);
    prev = e.time;
  }
  for (const std::string& o : outputs) {
    if (!is_output_name(o) && layout0.find(o) < 0 && o != "ad_d" && o != "ad_q")
      throw std::invalid_argument("unknown output '" + o + "'");
  }
  if (initial_state && initial_state->size() != layout0.size)
    throw std::invalid_argument("initial state does not match the state layout");
}

const std::vector<double>& TimeSeries::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return columns[i];
  throw std::invalid_argument("time series has no column '" + name + "'");
}

TimeSeries simulate(const Scenario& sc) {
  sc.validate();
  Case cur = sc.base;
  Model model(cur);
  Vec x;
  if (sc.initial_state) {
    x = *sc.initial_state;
  } else {
    const Equilibrium eq = solve_equilibrium(model, cur.inputs);
    if (!(eq.residual < 1e-8)) throw NoConvergence("initial equilibrium residual above 1e-8");
    x = eq.x0;
  }

  TimeSeries ts;
  ts.names = sc.outputs;
  ts.columns.assign(sc.outputs.size(), {});

  const long long n_steps = grid_index(sc.duration, sc.dt);
  const std::size_t n_rec = static_cast<std::size_t>(n_steps / sc.record_every + 1);
  ts.t.reserve(n_rec);
  for (auto& col : ts.columns) col.reserve(n_rec);

  auto record = [&](double t) {
    const Outputs o = model.outputs(x, cur.inputs);
    ts.t.push_back(t);
    for (std::size_t i = 0; i < sc.outputs.size(); ++i) {
      const std::string& name = sc.outputs[i];
      double v = 0.0;
      if (is_output_name(name)) {
        v = output_field(o, name);
      } else {
        const int idx = model.layout().find(name);
        v = idx >= 0 ? x[idx] : 0.0;
      }
      ts.columns[i].push_back(v);
    }
  };

  const int n = model.size();
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto f = [&](const Vec& xs, Vec& out) {
    model.rhs(std::span<const double>(xs.data(), xs.size()), cur.inputs, std::span<double>(out.data(), out.size()));
  };

  std::size_t next_event = 0;
  for (long long k = 0;; ++k) {
    const double t = static_cast<double>(k) * sc.dt;
    bool changed = false;
    while (next_event < sc.events.size() && grid_index(sc.events[next_event].time, sc.dt) == k) {
      const Event& e = sc.events[next_event++];
      set_value(cur, e.target, e.value);
      changed = true;
    }
    if (changed) {
      Model next(cur);
      if (next.layout().labels != model.layout().labels) {
        Vec mapped = Vec::Zero(next.size());
        for (int i = 0; i < next.size(); ++i) {
          const int old = model.layout().find(next.layout().labels[i]);
          if (old >= 0) mapped[i] = x[old];
        }
        x = mapped;
        k1.resize(next.size());
        k2.resize(next.size());
        k3.resize(next.size());
        k4.resize(next.size());
        tmp.resize(next.size());
      }
      model = std::move(next);
    }
    if (k % sc.record_every == 0) {
      try {
        record(t);
      } catch (const DomainError& err) {
        ts.diverged = true;
        ts.divergence_time = t;
        ts.divergence_reason = err.what();
        break;
      }
    }
    if (k == n_steps) break;

    try {
      f(x, k1);
      tmp = x + 0.5 * sc.dt * k1;
      f(tmp, k2);
      tmp = x + 0.5 * sc.dt * k2;
      f(tmp, k3);
      tmp = x + sc.dt * k3;
      f(tmp, k4);
    } catch (const DomainError& err) {
      ts.diverged = true;
      ts.divergence_time = t;
      ts.divergence_reason = err.what();
      break;
    }
    x += sc.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceBound) {
      ts.diverged = true;
      ts.divergence_time = t + sc.dt;
      ts.divergence_reason = "state magnitude exceeded 1e6";
      break;
    }
  }
  ts.final_state = x;
  ts.final_labels = model.layout().labels;
  return ts;
}

void require_finished(const TimeSeries& ts) {
  if (ts.diverged) {
    std::ostringstream msg;
    msg << "simulation diverged at t = " << ts.divergence_time << " s: " << ts.divergence_reason;
    throw Diverged(msg.str(), ts.divergence_time);
  }
}

EnvelopeMetrics envelope_metrics(const std::vector<double>& x_in, double dt, double band_lo, double band_hi) {
  check_band(dt, band_lo, band_hi);
  const std::size_t n = x_in.size();
  const double span = n * dt;
  if (span < 0.2 - 1e-9) {
    std::ostringstream msg;
    msg << "envelope metrics need at least 0.2 s of data, got " << span << " s";
    throw InsufficientData(msg.str());
  }
  double mean = 0.0, peak_abs = 0.0;
  for (double v : x_in) {
    mean += v;
    peak_abs = std::max(peak_abs, std::abs(v));
  }
  mean /= static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = x_in[i] - mean;

  EnvelopeMetrics m;
  // coarse scan at half-bin spacing, then golden-section refinement
  const double df = 0.5 / span;
  double f_best = band_lo, a_best = -1.0;
  for (double fr = band_lo; fr <= band_hi + 1e-12; fr += df) {
    const double a = projection(x, 0, n, dt, fr);
    if (a > a_best) {
      a_best = a;
      f_best = fr;
    }
  }
  double lo = std::max(band_lo, f_best - df), hi = std::min(band_hi, f_best + df);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = hi - g * (hi - lo), c2 = lo + g * (hi - lo);
  double a1 = projection(x, 0, n, dt, c1), a2 = projection(x, 0, n, dt, c2);
  for (int it = 0; it < 30; ++it) {
    if (a1 > a2) {
      hi = c2;
      c2 = c1;
      a2 = a1;
      c1 = hi - g * (hi - lo);
      a1 = projection(x, 0, n, dt, c1);
    } else {
      lo = c1;
      c1 = c2;
      a1 = a2;
      c2 = lo + g * (hi - lo);
      a2 = projection(x, 0, n, dt, c2);
    }
  }
  const double f_peak = 0.5 * (lo + hi);
  const double a_peak = projection(x, 0, n, dt, f_peak);
  m.peak_amplitude = a_peak;
  if (!(a_peak > 1e-10 * peak_abs + 1e-15)) return m;
  m.has_peak = true;
  m.dominant_freq_hz = f_peak;

  const std::size_t win = static_cast<std::size_t>(std::max(20.0 / f_peak, 0.01) / dt);
  const std::size_t hop = std::max<std::size_t>(1, win / 4);
  if (win > n) throw InsufficientData("signal shorter than one envelope window");
  for (std::size_t b = 0; b + win <= n; b += hop) {
    m.env_t.push_back((b + 0.5 * win) * dt);
    m.envelope.push_back(projection(x, b, win, dt, f_peak));
  }
  if (m.envelope.size() < 3) throw InsufficientData("fewer than three envelope windows");

  double st = 0, sy = 0, stt = 0, sty = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < m.envelope.size(); ++i) {
    if (!(m.envelope[i] > 0)) continue;
    const double ly = std::log(m.envelope[i]);
    st += m.env_t[i];
    sy += ly;
    stt += m.env_t[i] * m.env_t[i];
    sty += m.env_t[i] * ly;
    ++cnt;
  }
  const double den = cnt * stt - st * st;
  m.growth_rate = cnt >= 2 && den > 0 ? (cnt * sty - st * sy) / den : 0.0;
  return m;
}

EnvelopeMetrics envelope_metrics(const TimeSeries& ts, const std::string& column, double band_lo,
                                 double band_hi, double t_from, double t_to) {
  const auto& col = ts.column(column);
  std::vector<double> x;
  double t0 = 0.0;
  for (std::size_t i = 0; i < ts.t.size(); ++i) {
    if (ts.t[i] < t_from - 1e-12 || ts.t[i] > t_to + 1e-12) continue;
    if (x.empty()) t0 = ts.t[i];
    x.push_back(col[i]);
  }
  EnvelopeMetrics m = envelope_metrics(x, ts.dt(), band_lo, band_hi);
  for (double& t : m.env_t) t += t0;
  return m;
}

std::pair<std::vector<double>, std::vector<double>> band_envelope(const std::vector<double>& x, double dt,
                                                                  double band_lo, double band_hi,
                                                                  double window) {
  check_band(dt, band_lo, band_hi);
  const std::size_t win = static_cast<std::size_t>(std::llround(window / dt));
  if (win < 8 || win > x.size()) throw InsufficientData("envelope window does not fit the signal");
  const double df = 0.5 / window;
  std::vector<double> tc, env;
  for (std::size_t b = 0; b + win <= x.size(); b += win / 2) {
    double mean = 0.0;
    for (std::size_t i = 0; i < win; ++i) mean += x[b + i];
    mean /= static_cast<double>(win);
    std::vector<double> seg(x.begin() + b, x.begin() + b + win);
    for (double& v : seg) v -= mean;
    double best = 0.0;
    for (double f = band_lo; f <= band_hi + 1e-12; f += df) best = std::max(best, projection(seg, 0, win, dt, f));
    tc.push_back((b + 0.5 * win) * dt);
    env.push_back(best);
  }
  return {tc, env};
}

std::vector<double> lowpass(const std::vector<double>& x, double dt, double cutoff_hz) {
  if (!(cutoff_hz > 0 && cutoff_hz < 0.5 / dt)) throw std::invalid_argument("cut-off must lie below Nyquist");
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  const double k = std::tan(std::numbers::pi * cutoff_hz * dt);
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
  const double b0 = k * k * norm, b1 = 2.0 * b0, b2 = b0;
  const double a1 = 2.0 * (k * k - 1.0) * norm;
  const double a2 = (1.0 - std::numbers::sqrt2 * k + k * k) * norm;
  double x1 = x[0], x2 = x[0], y1 = x[0], y2 = x[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double yi = b0 * x[i] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x[i];
    y2 = y1;
    y1 = yi;
    y[i] = yi;
  }
  return y;
}

}  // namespace slgfm
