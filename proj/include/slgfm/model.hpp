#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slgfm/params.hpp"

namespace slgfm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Index map of the state vector for one (control, damper) combination.
/// Absent states carry index -1.
struct StateLayout {
  int xi_dc = 0;
  int v_dc = 1;
  int omega = 2;
  int delta = 3;
  int e_rf = -1;
  int i_d = -1;
  int i_q = -1;
  int v_d = -1;
  int v_q = -1;
  int i_gd = -1;
  int i_gq = -1;
  int q_f = -1;
  int ad_d = -1;
  int ad_q = -1;
  int size = 0;
  std::vector<std::string> labels;

  static StateLayout make(const RapControl& control, const AdConfig& ad);
  /// Index of a label, or -1.
  int find(const std::string& label) const;
};

/// Algebraic quantities derived from a state.
struct Outputs {
  double p = 0;      // active power at the capacitor
  double q = 0;      // reactive power at the capacitor
  double v = 0;      // capacitor voltage magnitude
  double v_dc = 0;
  double omega = 0;
  double e_rf = 0;   // reference magnitude before damping
  double e_d = 0;    // converter voltage applied to the filter
  double e_q = 0;
  double i_dc = 0;   // DC current drawn by the grid-side converter
  double i_wdc = 0;  // DC current injected by the machine-side converter
};

/// Converts a rotor speed (rad/s) into the MPPT active-power set-point (p.u.).
double mppt_setpoint(double omega_r, const SystemParams& params);

/// Nonlinear averaged model of the single-loop grid-forming converter with LCL
/// filter, DC link and Thevenin grid, written in the converter dq frame.
///
/// The model is immutable; rhs() is pure and may be called concurrently.
class Model {
 public:
  Model(SystemParams params, RapControl control, AdConfig ad = {});
  explicit Model(const Case& c) : Model(c.params, c.control, c.ad) {}

  const StateLayout& layout() const { return layout_; }
  const SystemParams& params() const { return params_; }
  const RapControl& control() const { return control_; }
  const AdConfig& ad() const { return ad_; }
  int size() const { return layout_.size; }

  /// Time derivative of the state. Throws DomainError when v_dc <= 0 or the
  /// state is not finite.
  Vec rhs(const Vec& x, const Inputs& u) const;
  void rhs(std::span<const double> x, const Inputs& u, std::span<double> dx) const;

  Outputs outputs(const Vec& x, const Inputs& u) const;
  Outputs outputs(std::span<const double> x, const Inputs& u) const;

 private:
  SystemParams params_;
  RapControl control_;
  AdConfig ad_;
  StateLayout layout_;
};

}  // namespace slgfm
