#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robustmult/separation.hpp"
#include "robustmult/types.hpp"

// Continuous-time LTI layer: frequency responses, feedback stability and
// frequency-wise multiplier certificates for the interconnection of
// G (outputs m, inputs n) and K (outputs n, inputs m).

namespace robustmult {

struct StateSpace {
  RealMatrix A, B, C, D;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return D.cols(); }
  Eigen::Index outputs() const { return D.rows(); }

  // Throws DimensionMismatch or NonFinite.
  void validate() const;

  static StateSpace make(const RealMatrix& a, const RealMatrix& b,
                         const RealMatrix& c, const RealMatrix& d);
  static StateSpace gain(const RealMatrix& d);  // no states
};

// All eigenvalues of the state matrix have real part below
// -psd_margin * max(1, |A|). Assumes the realization has no unstable hidden
// modes.
bool is_rhinf(const StateSpace& sys, const Tolerances& tol = {});
double spectral_abscissa(const RealMatrix& a);

// Series connection lhs * rhs (rhs acts first).
StateSpace series(const StateSpace& lhs, const StateSpace& rhs);
StateSpace scaled(const StateSpace& sys, double tau);
// Inverse system; throws IllPosed when D is singular.
StateSpace inverse_system(const StateSpace& sys, const Tolerances& tol = {});

// First-order all-pass u(s) = (a - s) / (a + s). Throws NonPositiveParameter.
StateSpace allpass_first_order(double a);

// Sorted frequencies starting at 0 and ending at +infinity.
struct FrequencyGrid {
  std::vector<double> omegas;

  // 0, `points` log-spaced values in [lo, hi], and infinity.
  static FrequencyGrid log_spaced(int points = 200, double lo = 1e-3,
                                  double hi = 1e3);
  // Throws InvalidArgument unless strictly increasing from 0 to infinity.
  void validate() const;
  std::size_t size() const { return omegas.size(); }
};

// C (j omega I - A)^{-1} B + D; D at omega = infinity. Throws
// ResolventSingular when j omega is an eigenvalue of A.
ComplexMatrix freq_response(const StateSpace& sys, double omega,
                            const Tolerances& tol = {});

struct FeedbackVerdict {
  bool stable = false;
  double spectral_abscissa = 0.0;   // of the closed-loop state matrix
  std::vector<Complex> poles;       // closed-loop eigenvalues
  RealMatrix closed_loop_A;
};

// Stability of (I + G K)^{-1} via a realization of the loop. Throws
// DimensionMismatch, OpenLoopUnstable (G or K not in RH-infinity) or IllPosed
// (I + D_G D_K singular).
FeedbackVerdict feedback_stable(const StateSpace& g, const StateSpace& k,
                                const Tolerances& tol = {});

enum class LtiFamily {
  PhasalScaling,
  RotationCongruenceEndpoints,
  GainRotation,
  ScaledGainUnitary,
  Passivity,
  SmallGain,
  Necessity,
  Custom,
};

std::string_view to_string(LtiFamily f);
// Accepts the kebab-case names printed by to_string.
LtiFamily lti_family_from_string(std::string_view s);

struct FrequencySample {
  double omega = 0.0;
  Multiplier pi;
  SeparationReport report;
  std::optional<double> epsilon;
  std::optional<double> gamma_sq;
  std::optional<int> xi;
  // |Pi_k - Pi_{k-1}|_F / max(|Pi_k|_F, |Pi_{k-1}|_F) divided by the spacing
  // of omega / (1 + omega); zero for the first sample.
  double jump = 0.0;
};

struct FrequencyCertificate {
  LtiFamily family = LtiFamily::Custom;
  std::vector<FrequencySample> samples;  // ascending omega
  std::optional<double> epsilon;          // family-wide value, if any
  std::optional<int> xi;                  // ScaledGainUnitary
  double max_jump = 0.0;
  double median_jump = 0.0;
  bool discontinuity_suspect = false;     // max_jump > 10 * median_jump
  bool pass = false;
  std::string note;  // sampled verification caveat and family details
};

enum class SignMode { Standard, Flipped };

using MultiplierProvider = std::function<Multiplier(double omega)>;

// Checks, at every grid point, that Pi is Hermitian, the diagonal blocks have
// the sign pattern of `mode`, and one of the separation forms holds for
// (G(j omega), K(j omega)). Throws SignConditionViolated (with omega) and, in
// flipped mode, InverseNotInRHinf. A failing separation inequality does not
// throw; it leaves pass = false.
FrequencyCertificate check_iqc_sufficient(const StateSpace& g,
                                          const StateSpace& k,
                                          const MultiplierProvider& pi,
                                          SignMode mode,
                                          const FrequencyGrid& grid,
                                          const Tolerances& tol = {});

// Pi(j omega) = [G*; I][G, I] - eps I with eps = 1/2, 1/4, ... until Eq3 holds
// at every grid point. Throws FeedbackUnstable and EpsilonUnderflow.
FrequencyCertificate necessity_multiplier(const StateSpace& g,
                                          const StateSpace& k,
                                          const FrequencyGrid& grid,
                                          const Tolerances& tol = {});

// Per-frequency synthesis for `family`. Throws PerFrequencyFailure (with
// omega), XiInconsistent, PreconditionViolatedAtOmega.
FrequencyCertificate sweep_certificate(const StateSpace& g,
                                       const StateSpace& k, LtiFamily family,
                                       const FrequencyGrid& grid,
                                       const Tolerances& tol = {});

struct EndpointChoice {
  double omega = 0.0;  // 0 or infinity
  int sign = 1;        // Pi = sign * [[0, I], [I, 0]]
  Form form = Form::Eq4;
  SeparationReport report;
};

// Real rotation test at omega = 0 and omega = infinity. Throws
// EndpointInfeasible (with omega).
std::vector<EndpointChoice> endpoint_congruence_check(
    const StateSpace& g, const StateSpace& k, const Tolerances& tol = {});

}  // namespace robustmult
