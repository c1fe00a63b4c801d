#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "slgfm/model.hpp"

namespace slgfm {

/// Step change of a named parameter or set-point (see set_value) at a time
/// that lies on the integration grid.
struct Event {
  double time = 0;
  std::string target;
  double value = 0;
};

struct Scenario {
  Case base;
  double duration = 1.0;  // s
  double dt = 1e-5;       // s
  std::vector<Event> events;
  /// Explicit initial state; the equilibrium of `base` when empty.
  std::optional<Vec> initial_state;
  /// Recorded signals: v_dc, p, q, v, omega, e_rf, e_d, e_q, i_dc, i_wdc or a state label.
  std::vector<std::string> outputs = {"v_dc", "p", "q", "v", "omega"};
  int record_every = 1;

  /// Throws std::invalid_argument on unsorted or off-grid events, unknown
  /// targets/outputs, or a step too coarse for the LCL resonance.
  void validate() const;
};

/// Largest dt resolving the LCL resonance with 20 samples per period.
double max_time_step(const SystemParams& params);

struct TimeSeries {
  std::vector<double> t;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  bool diverged = false;
  double divergence_time = std::numeric_limits<double>::quiet_NaN();
  std::string divergence_reason;
  Vec final_state;
  std::vector<std::string> final_labels;

  const std::vector<double>& column(const std::string& name) const;
  double dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
};

/// Classic fixed-step RK4. Events act exactly at their grid time, before the
/// step that starts there. When an event changes the state layout (damper
/// states appearing or disappearing) states are carried over by label and new
/// ones start at zero. A state leaving |x| <= 1e6 (or the model domain) ends
/// the run: the series is truncated and marked diverged.
TimeSeries simulate(const Scenario& scenario);

/// Throws Diverged when the series carries a divergence marker.
void require_finished(const TimeSeries& ts);

struct EnvelopeMetrics {
  bool has_peak = false;
  double dominant_freq_hz = 0;
  double peak_amplitude = 0;
  double growth_rate = 0;  // 1/s
  std::vector<double> env_t;
  std::vector<double> envelope;
};

/// Oscillation content of a uniformly sampled signal within [band_lo, band_hi] Hz:
/// peak of the Hann-windowed Fourier projection, Hann-windowed sliding
/// amplitude at that frequency, and the least-squares slope of its logarithm.
/// Throws InsufficientData below 0.2 s of data; invalid_argument when the band
/// is not below the Nyquist frequency.
EnvelopeMetrics envelope_metrics(const std::vector<double>& x, double dt, double band_lo, double band_hi);
EnvelopeMetrics envelope_metrics(const TimeSeries& ts, const std::string& column, double band_lo,
                                 double band_hi, double t_from = -std::numeric_limits<double>::infinity(),
                                 double t_to = std::numeric_limits<double>::infinity());

/// Largest in-band amplitude over sliding Hann windows of the given length;
/// returns (window centre times, amplitudes).
std::pair<std::vector<double>, std::vector<double>> band_envelope(const std::vector<double>& x, double dt,
                                                                  double band_lo, double band_hi,
                                                                  double window);

/// Causal second-order Butterworth low-pass (bilinear transform, prewarped),
/// started in steady state at the first sample.
std::vector<double> lowpass(const std::vector<double>& x, double dt, double cutoff_hz);

}  // namespace slgfm
