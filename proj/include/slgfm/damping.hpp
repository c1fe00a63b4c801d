#pragma once

#include "slgfm/sweeps.hpp"

namespace slgfm {

struct AdDesignSpec {
  double rap_mode_target = -110.0;  // 1/s
  double l_g_max = 0.5;             // p.u.
  double margin = -10.0;            // required bound on max Re(lambda_LCL), 1/s

  void validate(const SystemParams& baseline) const;
};

/// Result of the worst-case damper design.
struct AdDesign {
  AdConfig ad;
  double k_q_worst = 0;        // gain placing the RAP mode at the target on the worst case
  double omega_res_worst = 0;  // LCL resonance of the worst case, p.u.
  double k_d_ideal = 0;        // smallest gain meeting the margin with t_d = 0
  double margin_ideal = 0;     // max Re(lambda_LCL) at k_d_ideal, t_d = 0
  double margin_final = 0;     // max Re(lambda_LCL) with the returned gains
  int nudges = 0;              // 5% increases applied after adding the filter
};

/// Model with the capacitor-voltage damper switched on.
Model apply_ad(const Model& model, AdConfig ad);
Case apply_ad(Case c, AdConfig ad);

/// Worst case of the design: line inductance at its maximum (X/R kept) and the
/// RAP mode tuned to the target. Throws TuningFailed.
Case worst_case(const Case& base, const AdDesignSpec& spec, double* k_q = nullptr);

/// Max Re(lambda_LCL) of a case.
double lcl_margin(const Case& c);

/// Finds the smallest ideal-derivative gain meeting the margin (log grid, then
/// bisection to 1% relative), sets t_d for a corner at twice the worst-case
/// resonance and re-verifies, raising k_d by at most a factor of two.
/// Throws DesignInfeasible when no k_d <= 1e-3 works.
AdDesign design_ad(const Case& base, const AdDesignSpec& spec);

}  // namespace slgfm
