#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slgfm/smallsig.hpp"

namespace slgfm {

/// Mode most strongly tied to the reactive-power/voltage control state
/// (e_rf or q_f), by participation. nullptr for variants without such a state.
std::optional<Mode> control_mode(const SpectrumReport& r);

struct LocusResult {
  std::string param;
  std::vector<double> values;
  /// modes[k][id]: mode `id` at values[k]; ids follow nearest-neighbour tracking.
  std::vector<std::vector<Mode>> modes;
  std::vector<double> max_re_lcl;
  std::vector<double> max_re;  // over all modes
  /// Tracked id of the critical LCL mode at the first grid point.
  int lcl_id = -1;
  /// False when a step of the tracked LCL mode exceeds twice both neighbouring steps.
  bool continuity_ok = true;
  /// First parameter value where max Re(lambda_LCL) crosses zero, refined by bisection.
  std::optional<double> crossing;
  /// Set when an equilibrium could not be found; the locus stops before it.
  std::optional<double> truncated_at;
  std::string truncation_reason;
};

/// Re-equilibrates and re-linearizes the model on an evenly spaced grid.
/// Throws EquilibriumLost only when the first grid point already fails.
LocusResult root_locus(const Case& base, const std::string& param, double from, double to, int n_points);

/// Greedy nearest-neighbour assignment: perm[i] is the index in `next`
/// matched to prev[i].
std::vector<int> match_modes(const std::vector<cd>& prev, const std::vector<cd>& next);

/// Auto-tuning of a variant's slow control mode to a target real part by
/// Newton iteration on the logarithm of its gain.
struct TuneResult {
  RapControl control;
  std::string gain_name;  // empty when the variant has no tuning knob
  double gain = 0;
  cd mode;
  int iterations = 0;
};

/// Throws TuningFailed (with the closest real part reached).
TuneResult tune_control_mode(const Case& c, double target_re, double tol = 0.05);

struct RankEntry {
  char letter = '?';
  std::string name;
  TuneResult tuning;
  double critical_re = 0;  // max Re of the LCL resonance modes
  bool stable = false;     // all modes in the open left half-plane
};

/// Tunes each variant's slow mode to target_re and orders the variants from
/// most to least damped critical LCL mode.
std::vector<RankEntry> rank_rap_strategies(const Case& base, double target_re = -40.0,
                                           double k_droop = 0.1);

/// Steady-state reactive-power change per unit active-power set-point step,
/// d - c a^{-1} b on the (p_st -> q) channel. Throws UnstableModel.
double coupling_gain_kqp(const Case& c);

}  // namespace slgfm
