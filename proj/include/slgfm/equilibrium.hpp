#pragma once

#include "slgfm/model.hpp"

namespace slgfm {

/// Capacitor-side power-flow quantities of an operating point.
struct SteadyState {
  double p = 0;
  double q = 0;
  double v = 0;        // capacitor voltage magnitude
  double delta_v = 0;  // capacitor voltage angle relative to the grid, rad
};

struct Equilibrium {
  Vec x0;
  StateLayout layout;
  double p0 = 0;
  double q0 = 0;
  double v0 = 0;
  double delta_v0 = 0;
  double i_dc0 = 0;
  double e_rf0 = 0;
  double delta0 = 0;
  double residual = 0;  // max-norm of rhs at x0
  int iterations = 0;   // full-model Newton iterations after the analytic seed
};

/// Solves the algebraic steady state of the grid connection directly:
/// the active-power balance, the variant's reactive/voltage condition and the
/// line power-flow expressions, by a damped 2-D Newton iteration in (V, delta_v).
/// Returns the high-voltage, small-angle branch. Throws NoConvergence.
SteadyState reduced_steady_state(double p_st, double q_st, const SystemParams& params,
                                 const RapControl& control);

/// Full operating point of the nonlinear model, seeded from
/// reduced_steady_state() and refined by damped Newton on rhs() until the
/// max-norm residual drops below 1e-10. Throws NoConvergence.
Equilibrium solve_equilibrium(const Model& model, const Inputs& u);
Equilibrium solve_equilibrium(const Case& c);

}  // namespace slgfm
