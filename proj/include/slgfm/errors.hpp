#pragma once

#include <stdexcept>
#include <string>

namespace slgfm {

/// Base of every analysis failure raised by the library. The CLI maps these
/// to exit status 2 and prints what() verbatim.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State or parameters outside the model's domain (v_dc <= 0, non-finite input).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class JacobianInconsistent : public Error {
 public:
  JacobianInconsistent(const std::string& what, double discrepancy)
      : Error(what), discrepancy_(discrepancy) {}
  double discrepancy() const noexcept { return discrepancy_; }

 private:
  double discrepancy_;
};

class ModeTrackingLost : public Error {
 public:
  using Error::Error;
};

class SingularXeq : public Error {
 public:
  using Error::Error;
};

class DegenerateEquilibrium : public Error {
 public:
  using Error::Error;
};

class PoleOnGrid : public Error {
 public:
  using Error::Error;
};

class EquilibriumLost : public Error {
 public:
  using Error::Error;
};

class TuningFailed : public Error {
 public:
  TuningFailed(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class UnstableModel : public Error {
 public:
  using Error::Error;
};

class DesignInfeasible : public Error {
 public:
  using Error::Error;
};

class Diverged : public Error {
 public:
  Diverged(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace slgfm
