#pragma once

#include <complex>
#include <vector>

#include "slgfm/equilibrium.hpp"

namespace slgfm {

/// Real polynomial, coefficients in descending powers.
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  Polynomial(std::initializer_list<double> c) : Polynomial(std::vector<double>(c)) {}
  explicit Polynomial(std::vector<double> c);

  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double leading() const { return c_.front(); }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }

  std::complex<double> operator()(std::complex<double> s) const;
  double operator()(double s) const;

  Polynomial derivative() const;
  /// Roots via the eigenvalues of the scaled companion matrix, Newton-polished.
  std::vector<std::complex<double>> roots() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double k, const Polynomial& a);

 private:
  std::vector<double> c_;
};

/// num(s)/den(s) with a monic denominator.
class RationalTF {
 public:
  RationalTF(Polynomial num, Polynomial den);

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  std::complex<double> operator()(std::complex<double> s) const;
  std::vector<std::complex<double>> poles() const { return den_.roots(); }
  std::vector<std::complex<double>> zeros() const { return num_.roots(); }
  /// Value at s = 0; infinite for a pole at the origin.
  double dc_gain() const;

  /// Unity negative feedback: G / (1 + G).
  RationalTF feedback() const;

 private:
  Polynomial num_, den_;
};

/// Number of roots of den with positive real part.
int rhp_pole_count(const RationalTF& tf, double tol = 1e-9);

/// LCL resonance in p.u. of the nominal angular frequency.
double lcl_resonant_frequency(double l_f, double l_g, double c_f);

/// Static gains and loop TFs of the conventional model that neglects the
/// filter dynamics and the coupling between loops.
struct SimplifiedTfs {
  double x_eq = 0;
  double g_dcv = 0;
  double g_pdelta = 0;
  double g_qe = 0;
  double g_ve = 0;
  RationalTF g_dc_sim{Polynomial{0.0}, Polynomial{1.0}};
  RationalTF g_p_sim{Polynomial{0.0}, Polynomial{1.0}};
  RationalTF g_q_sim{Polynomial{0.0}, Polynomial{1.0}};
  bool has_q_loop = false;  // false for variants without a droop-I loop
};

/// Throws SingularXeq when |X_eq| < 1e-9.
SimplifiedTfs simplified_tfs(const SystemParams& params, const RapControl& control,
                             const Equilibrium& eq);

/// Open-loop RAP TF of the detailed LCL model for droop-I control, built from
/// the closed-form numerator/denominator polynomials (lossless line).
struct RapOpenLoop {
  Polynomial n_qe, n_ve, d_lcl;
  RationalTF g_qe{Polynomial{0.0}, Polynomial{1.0}};
  RationalTF g_ve{Polynomial{0.0}, Polynomial{1.0}};
  RationalTF g_q{Polynomial{0.0}, Polynomial{1.0}};
  std::vector<std::complex<double>> poles;
};

/// Throws SingularXeq, DegenerateEquilibrium (V_0 = 0).
RapOpenLoop rap_open_loop_tf(const SystemParams& params, const DroopI& control, const Equilibrium& eq);

/// Poles of the RAP loop opened at the reactive-power feedback of the full
/// linearized model (all states, line resistance included).
std::vector<std::complex<double>> rap_open_loop_poles(const Case& c);

struct BodeData {
  std::vector<double> freq_hz;
  std::vector<double> mag_db;
  std::vector<double> phase_deg;  // unwrapped
  int rhp_poles = 0;
};

/// Throws PoleOnGrid when |den(j 2 pi f)| < 1e-12 at a grid frequency.
BodeData bode(const RationalTF& tf, const std::vector<double>& freqs_hz);

/// Response of tf to a unit step, sampled at the given times (exact
/// discretization of a controllable realization).
std::vector<double> step_response(const RationalTF& tf, const std::vector<double>& times);

}  // namespace slgfm
