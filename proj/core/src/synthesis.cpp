#include "robustmult/synthesis.hpp"

#include <cmath>
#include <limits>

#include "robustmult/matcore.hpp"
#include "robustmult/phase.hpp"

namespace robustmult {
namespace {

ComplexMatrix scalar(double v) { return ComplexMatrix::Constant(1, 1, v); }
ComplexMatrix scalar(Complex v) { return ComplexMatrix::Constant(1, 1, v); }

void require_real(const ComplexMatrix& a, std::string_view what) {
  if (a.imag().cwiseAbs().maxCoeff() != 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "real mode requires real " + std::string(what));
  }
}

void require_same_square(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(a, "A");
  require_square(b, "B");
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A and B must have equal size");
  }
  require_finite(a, "A");
  require_finite(b, "B");
}

SeparationReport certify(const ComplexMatrix& a, const ComplexMatrix& b,
                         const Multiplier& p, Form form,
                         const Tolerances& tol) {
  SeparationReport r = verify_multiplier(a, b, p, form, std::nullopt, tol);
  if (!r.pass) {
    throw Error(ErrorCode::VerificationFailed,
                "constructed multiplier fails " + std::string(to_string(form)) +
                    " (margins " + std::to_string(r.margin_A) + ", " +
                    std::to_string(r.margin_B) + ")");
  }
  return r;
}

// Rejects F = AB with an eigenvalue on the negative real axis or a
// non-semi-simple zero eigenvalue.
void check_scaling_spectrum(const ComplexMatrix& f, const Tolerances& tol) {
  const double norm = spectral_norm(f);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(f, false);
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const Complex lam = es.eigenvalues()(i);
    if (lam.real() < -tol.rank_rel * norm &&
        std::abs(lam.imag()) <= tol.rank_rel * norm) {
      throw Error(ErrorCode::SpectrumOnNegativeRealAxis,
                  "AB has an eigenvalue on the negative real axis", lam);
    }
  }
  const int r1 = numerical_rank(f, tol.rank_rel);
  if (r1 < f.rows() && r1 > 0) {
    const int r2 = numerical_rank(f * f, tol.rank_rel);
    if (r2 != r1) {
      Error e(ErrorCode::DefectiveZeroEigenvalue,
              "zero eigenvalue of AB is not semi-simple");
      if (f.rows() == 2) e.mark_undecided();
      throw e;
    }
  }
}

}  // namespace

SynthesisResult synth_phasal_scaling(const ComplexMatrix& a,
                                     const ComplexMatrix& b, bool real_mode,
                                     const Tolerances& tol) {
  require_same_square(a, b);
  if (real_mode) {
    require_real(a, "A");
    require_real(b, "B");
  }
  const Eigen::Index n = a.rows();
  const ComplexMatrix f = a * b;
  check_scaling_spectrum(f, tol);

  const ComplexMatrix r = principal_sqrt(f, tol);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(r);
  const ComplexMatrix& x = es.eigenvectors();
  const double cond = condition_number(x);
  if (!(cond <= tol.eig_cond_max)) {
    throw Error(ErrorCode::DefectiveNonzeroEigenvalue,
                "square root of AB is not numerically diagonalizable "
                "(eigenvector condition " + std::to_string(cond) + ")");
  }
  const double r_norm = spectral_norm(r);
  ComplexVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lam = es.eigenvalues()(i);
    d(i) = std::abs(lam) > tol.rank_rel * r_norm ? lam : Complex(1.0, 0.0);
  }
  const ComplexMatrix x_inv = x.fullPivLu().inverse();
  // H = A* X^{-*} D^{-*} X^{-1}
  const ComplexVector d_inv_conj = d.cwiseInverse().conjugate();
  ComplexMatrix h =
      a.adjoint() * x_inv.adjoint() * d_inv_conj.asDiagonal() * x_inv;
  if (real_mode) h = h.real().cast<Complex>();

  SynthesisResult out;
  out.multiplier = Multiplier::phasal(h);
  out.form = Form::Eq4;
  out.report = certify(a, b, out.multiplier, Form::Eq4, tol);
  out.epsilon = out.report.epsilon;
  if (numerical_rank(a, tol.rank_rel) == n) {
    out.strict_report = certify(a, b, out.multiplier, Form::Eq3, tol);
  }
  out.log = {{"sqrt_AB", r},
             {"X", x},
             {"D", ComplexMatrix(d.asDiagonal())},
             {"H", h},
             {"eigvec_condition", scalar(cond)}};
  return out;
}

SynthesisResult synth_phasal_congruence(const ComplexMatrix& a,
                                        const ComplexMatrix& b, bool real_mode,
                                        const Tolerances& tol) {
  require_same_square(a, b);
  if (spectral_norm(a) == 0.0 || spectral_norm(b) == 0.0) {
    throw Error(ErrorCode::ZeroMatrix, "A and B must be nonzero");
  }
  if (real_mode) {
    require_real(a, "A");
    require_real(b, "B");
  }
  const PhaseSumVerdict v = phase_sum_condition(a, b, tol);
  if (!v.roles_ok) {
    throw Error(ErrorCode::ClassViolated,
                "need one quasi-sectorial and one semi-sectorial matrix "
                "(classes " + std::string(to_string(v.a.cls.tag)) + ", " +
                    std::string(to_string(v.b.cls.tag)) + ")");
  }
  if (!v.feasible) {
    throw Error(ErrorCode::PhaseSumViolated,
                "phase sums violate the strict bound (max " +
                    std::to_string(v.sum_max) + ", min " +
                    std::to_string(v.sum_min) + ")",
                Complex(v.sum_max, v.sum_min));
  }
  const double shift = 2.0 * kPi * v.offset;
  const bool a_quasi = v.quasi_side == QuasiSide::A;
  // alpha = arg z: phases of zA in the right half plane (open on the quasi
  // side) and phases of conj(z) B likewise (closed on the semi side).
  const double lo_a = -kPi / 2 - v.a.phi_min;
  const double hi_a = kPi / 2 - v.a.phi_max;
  const double lo_b = v.b.phi_max + shift - kPi / 2;
  const double hi_b = v.b.phi_min + shift + kPi / 2;
  const double lo = std::max(lo_a, lo_b);
  const double hi = std::min(hi_a, hi_b);
  const bool lo_open = (lo_a >= lo_b) == a_quasi;
  const bool hi_open = (hi_a <= hi_b) == a_quasi;
  double alpha = 0.5 * (lo + hi);

  if (real_mode) {
    const double ang_tol = 1e-9;
    std::optional<double> best;
    const int k0 = static_cast<int>(std::floor((lo - 1.0) / kPi));
    const int k1 = static_cast<int>(std::ceil((hi + 1.0) / kPi));
    for (int k = k0; k <= k1; ++k) {
      const double c = kPi * k;
      const bool above = lo_open ? c > lo + ang_tol : c >= lo - ang_tol;
      const bool below = hi_open ? c < hi - ang_tol : c <= hi + ang_tol;
      if (above && below &&
          (!best || std::abs(c - alpha) < std::abs(*best - alpha))) {
        best = c;
      }
    }
    if (!best) {
      throw Error(ErrorCode::PhaseSumViolated,
                  "no real rotation z in {1, -1} lies in the feasible arc",
                  Complex(v.sum_max, v.sum_min));
    }
    alpha = *best;
  }
  const Complex z = real_mode ? Complex(std::cos(alpha) > 0 ? 1.0 : -1.0, 0.0)
                              : std::polar(1.0, alpha);

  SynthesisResult out;
  out.multiplier = Multiplier::rotation(z, a.rows());
  const ComplexMatrix& quasi = a_quasi ? a : b;
  out.form = a_quasi ? Form::Eq4 : Form::Eq6;
  out.report = certify(a, b, out.multiplier, out.form, tol);
  out.epsilon = out.report.epsilon;
  if (numerical_rank(quasi, tol.rank_rel) == quasi.rows()) {
    out.strict_report = certify(a, b, out.multiplier,
                                a_quasi ? Form::Eq3 : Form::Eq5, tol);
  }
  out.log = {{"z", scalar(z)},
             {"arc_lo", scalar(lo)},
             {"arc_hi", scalar(hi)},
             {"offset_m", scalar(static_cast<double>(v.offset))},
             {"phase_sum_max", scalar(v.sum_max)},
             {"phase_sum_min", scalar(v.sum_min)}};
  return out;
}

SynthesisResult synth_gain_rotation(const ComplexMatrix& a,
                                    const ComplexMatrix& b,
                                    const Tolerances& tol) {
  if (a.rows() < 1 || a.cols() < 1 || a.rows() != b.cols() ||
      a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A must be m x n and B n x m");
  }
  require_finite(a, "A");
  require_finite(b, "B");
  const SteinSolution st = stein_split(a * b, tol);
  const double q_min = min_hermitian_eigenvalue(st.Q);
  const double nb = spectral_norm(b);
  const double eps = 0.5 * q_min / (nb > 0.0 ? nb * nb : 1.0);
  const Eigen::Index n = a.cols();
  const ComplexMatrix n_blk =
      a.adjoint() * st.M * a + eps * ComplexMatrix::Identity(n, n);

  SynthesisResult out;
  out.multiplier = Multiplier::gain(n_blk, st.M);
  out.form = Form::Eq3;
  out.report = certify(a, b, out.multiplier, Form::Eq3, tol);
  if (!out.report.strict_B) {
    throw Error(ErrorCode::VerificationFailed,
                "gain multiplier is not strict on the B side");
  }
  out.log = {{"M", st.M},
             {"Q", st.Q},
             {"N", n_blk},
             {"stein_residual", scalar(st.residual)},
             {"epsilon", scalar(eps)}};
  return out;
}

SynthesisResult synth_gain_unitary(const ComplexMatrix& a,
                                   const ComplexMatrix& b,
                                   const Tolerances& tol) {
  if (a.rows() < 1 || a.cols() < 1 || a.rows() != b.cols() ||
      a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A must be m x n and B n x m");
  }
  require_finite(a, "A");
  require_finite(b, "B");
  const RealVector sa = Eigen::JacobiSVD<ComplexMatrix>(a).singularValues();
  const RealVector sb = Eigen::JacobiSVD<ComplexMatrix>(b).singularValues();
  const double a1 = sa(0);
  const double b1 = sb(0);
  const double margin = tol.psd_margin;

  int xi = 0;
  double gamma_sq = 0.0;
  double eps = 0.0;
  if (a1 * b1 < 1.0 - margin) {
    xi = 1;
    eps = a1 > 0.0 ? 0.5 * (1.0 / (a1 * a1) - b1 * b1) : 1.0;
    gamma_sq = 1.0 / (b1 * b1 + eps);
  } else if (a.rows() == a.cols()) {
    const double an = sa(sa.size() - 1);
    const double bn = sb(sb.size() - 1);
    if (an * bn > 1.0 + margin) {
      xi = -1;
      eps = 0.5 * (bn * bn - 1.0 / (an * an));
      gamma_sq = 1.0 / (bn * bn - eps);
    }
  }
  if (xi == 0) {
    throw Error(ErrorCode::NoGainCertificate,
                "singular values of A and B straddle the unit product; a "
                "destabilizing unitary pair exists");
  }
  SynthesisResult out;
  out.multiplier = Multiplier::scaled_gain(gamma_sq, xi, a.cols(), a.rows());
  out.form = Form::Eq3;
  out.report = certify(a, b, out.multiplier, Form::Eq3, tol);
  out.log = {{"gamma_sq", scalar(gamma_sq)},
             {"xi", scalar(static_cast<double>(xi))},
             {"epsilon", scalar(eps)}};
  return out;
}

}  // namespace robustmult
