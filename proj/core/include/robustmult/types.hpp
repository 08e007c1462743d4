#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace robustmult {

using Complex = std::complex<double>;

// Dense complex matrix; carrier for A, B, G(jw), K(jw) and every multiplier.
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kJ{0.0, 1.0};

// Numerical thresholds shared by every module. All relative thresholds are
// scaled by a norm of the object under test at the point of use.
struct Tolerances {
  double psd_margin = 1e-9;    // relative eigenvalue threshold
  double rank_rel = 1e-8;      // relative singular-value cutoff
  double det_zero_rel = 1e-8;  // relative determinant-zero threshold
  double eig_cond_max = 1e6;   // eigenvector-matrix condition cap

  // Throws InvalidArgument unless all fields are positive and rank_rel < 1.
  void validate() const;
};

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  NonSquare,
  DimensionMismatch,
  ZeroMatrix,
  NegativeRealEigenvalue,
  DefectiveZeroEigenvalue,
  DefectiveNonzeroEigenvalue,
  UnitCircleEigenvalue,
  IllConditionedEigenvectors,
  TargetOutsideRange,
  NotSectorial,
  UnknownForm,
  NotVerifiedForSource,
  ConversionFailsVerification,
  SpectrumOnNegativeRealAxis,
  PhaseSumViolated,
  ClassViolated,
  NoGainCertificate,
  ConditionHolds,
  ConstructionFallbackFailed,
  VerificationFailed,
  ResolventSingular,
  OpenLoopUnstable,
  IllPosed,
  SignConditionViolated,
  InverseNotInRHinf,
  FeedbackUnstable,
  EpsilonUnderflow,
  PerFrequencyFailure,
  XiInconsistent,
  PreconditionViolatedAtOmega,
  EndpointInfeasible,
  NonPositiveParameter,
  ParseError,
  SchemaError,
  DimensionError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Library-wide exception. `value` carries the offending eigenvalue or sum
// when one exists; `omega` the failing frequency for LTI sweeps; `undecided`
// marks inputs in the regime where no verdict is known either way.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  Error(ErrorCode code, const std::string& message, Complex value);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<Complex>& value() const noexcept { return value_; }
  const std::optional<double>& omega() const noexcept { return omega_; }
  bool undecided() const noexcept { return undecided_; }

  Error& with_omega(double omega) {
    omega_ = omega;
    return *this;
  }
  Error& mark_undecided() {
    undecided_ = true;
    return *this;
  }

 private:
  ErrorCode code_;
  std::optional<Complex> value_;
  std::optional<double> omega_;
  bool undecided_ = false;
};

}  // namespace robustmult
