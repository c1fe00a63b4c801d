#pragma once

#include <complex>
#include <string>
#include <vector>

#include "slgfm/equilibrium.hpp"

namespace slgfm {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;

/// Eigenvalues of a dense real matrix: balancing, Householder reduction to
/// Hessenberg form and Francis double-shift QR. Conjugate pairs are returned
/// adjacent, positive imaginary part first. Throws NoConvergence.
std::vector<cd> eigs(const Mat& a);

/// Right eigenvectors (columns, unit 2-norm) by inverse iteration on the
/// supplied eigenvalues.
CMat eigenvectors(const Mat& a, const std::vector<cd>& lambdas);

/// Normalized participation factors |v_ki w_ik|, one column per eigenvalue,
/// each column summing to 1.
Mat participation(const Mat& a, const std::vector<cd>& lambdas);

/// Linearized model x' = a x + b u, y = c x + d u around an equilibrium.
/// Inputs: p_st, q_st, v_st, v_dcst, v_g, omega_g. Outputs: p, q, v, v_dc, omega.
struct StateSpaceModel {
  Mat a, b, c, d;
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;
  std::vector<std::string> output_labels;
  double jacobian_discrepancy = 0;  // worst relative disagreement of the h and h/2 Jacobians
};

/// Central-difference Jacobians with h_i = max(1e-7, 1e-7|x_i|), verified
/// against a second evaluation at h/2. Throws JacobianInconsistent when the two
/// disagree by more than 1e-4 relative.
StateSpaceModel linearize(const Model& model, const Equilibrium& eq, const Inputs& u);
StateSpaceModel linearize(const Case& c);

constexpr double kJacobianTolerance = 1e-4;

enum class ModeClass { DC, AP, RAP, SynchronousResonance, LCLResonance, Other };

std::string_view to_string(ModeClass c);

struct Mode {
  cd lambda;
  double freq_hz = 0;
  double damping_ratio = 0;
  ModeClass cls = ModeClass::Other;
};

/// Classifies every eigenvalue. Resonances by frequency band (+-35%),
/// slow modes by the dominant state group in the participation factors.
std::vector<Mode> classify_modes(const Mat& a, const std::vector<std::string>& labels,
                                 const SystemParams& params);

struct SpectrumReport {
  Equilibrium eq;
  StateSpaceModel ss;
  std::vector<Mode> modes;

  /// Largest real part among modes of a class, -inf when the class is empty.
  double max_real(ModeClass cls) const;
  double max_real() const;
  /// The slowest-decaying mode of a class, or nullptr.
  const Mode* critical(ModeClass cls) const;
  bool stable() const { return max_real() < 0; }
};

SpectrumReport analyze(const Case& c);

struct SensitivityEntry {
  std::string param;
  double base_value = 0;
  double step = 0;  // absolute parameter increment
  cd base_lambda;
  cd perturbed_lambda;
  double delta_re = 0;
};

/// Change of the real part of the critical LCL resonance mode for a relative
/// increase of each named parameter. The mode is followed by nearest
/// eigenvalue; ModeTrackingLost when the runner-up is closer than twice the match.
std::vector<SensitivityEntry> sensitivity(const Case& c, const std::vector<std::string>& names,
                                          double rel_step = 0.01);

/// Index of the eigenvalue closest to target; throws ModeTrackingLost when the
/// second closest is within ratio * best distance.
int track_nearest(const std::vector<cd>& spectrum, cd target, double ratio = 2.0);

}  // namespace slgfm
