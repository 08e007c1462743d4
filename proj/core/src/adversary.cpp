#include "robustmult/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "robustmult/matcore.hpp"
#include "robustmult/phase.hpp"

namespace robustmult {
namespace {

void check_pair(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() < 1 || a.cols() < 1 || a.rows() != b.cols() ||
      a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A must be m x n and B n x m");
  }
  require_finite(a, "A");
  require_finite(b, "B");
}

[[noreturn]] void condition_holds(UncertaintyClass cls) {
  throw Error(ErrorCode::ConditionHolds,
              "no destabilizing " + std::string(to_string(cls)) +
                  " perturbation exists; the matching synthesis succeeds");
}

Witness scaling_witness(const ComplexMatrix& a, const ComplexMatrix& b,
                        const Tolerances& tol) {
  const ComplexMatrix f = a * b;
  const double norm = spectral_norm(f);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(f, false);
  std::optional<Complex> pick;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const Complex lam = es.eigenvalues()(i);
    if (lam.real() < -tol.rank_rel * norm &&
        std::abs(lam.imag()) <= tol.rank_rel * norm &&
        (!pick || std::abs(lam.imag()) < std::abs(pick->imag()))) {
      pick = lam;
    }
  }
  if (!pick) condition_holds(UncertaintyClass::Scaling);
  Witness w;
  w.cls = UncertaintyClass::Scaling;
  w.tau = -1.0 / pick->real();
  w.method = "negative real eigenvalue of AB";
  return w;
}

Witness rotation_witness(const ComplexMatrix& a, const ComplexMatrix& b,
                         const Tolerances& tol) {
  const ComplexMatrix f = a * b;
  Eigen::ComplexEigenSolver<ComplexMatrix> es(f, false);
  std::optional<double> best;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const Complex lam = es.eigenvalues()(i);
    if (std::abs(std::abs(lam) - 1.0) <= tol.psd_margin) {
      double theta = std::fmod(kPi - std::arg(lam), 2.0 * kPi);
      if (theta < 0.0) theta += 2.0 * kPi;
      if (!best || theta < *best) best = theta;
    }
  }
  if (!best) condition_holds(UncertaintyClass::Rotation);
  Witness w;
  w.cls = UncertaintyClass::Rotation;
  w.theta = *best;
  w.method = "unit-circle eigenvalue of AB";
  return w;
}

// ---------------------------------------------------------------------------
// Unitary class.
// ---------------------------------------------------------------------------

// Unitary matrix sending the unit vector `from` to the unit vector `to`.
ComplexMatrix unitary_mapping(const ComplexVector& from,
                              const ComplexVector& to) {
  const Eigen::Index n = from.size();
  ComplexMatrix f(n, n), t(n, n);
  f.col(0) = from;
  t.col(0) = to;
  if (n > 1) {
    f.rightCols(n - 1) = orthonormal_complement(from);
    t.rightCols(n - 1) = orthonormal_complement(to);
  }
  return t * f.adjoint();
}

Witness unitary_witness_single_row(const ComplexMatrix& a,
                                   const ComplexMatrix& b) {
  // m = 1: U is a unit scalar and a V b ranges over the disc of radius
  // |a||b| (the circle when n = 1).
  const Eigen::Index n = a.cols();
  const ComplexVector arow = a.row(0).transpose();  // a = arow^T
  const double na = arow.norm();
  const double nb = b.col(0).norm();
  const ComplexVector b_hat = b.col(0) / nb;
  const ComplexVector a_dir = arow.conjugate() / na;  // a * a_dir = na
  const double c1 = std::min(1.0, 1.0 / (na * nb));
  ComplexVector v = c1 * a_dir;
  if (n > 1 && c1 < 1.0) {
    v += std::sqrt(1.0 - c1 * c1) * orthonormal_complement(a_dir).col(0);
  }
  Witness w;
  w.cls = UncertaintyClass::Unitary;
  w.V = unitary_mapping(b_hat, v);
  const Complex val = (a * w.V * b)(0, 0);
  w.U = ComplexMatrix::Constant(1, 1, -std::conj(val) / std::abs(val));
  w.method = "single-row alignment";
  return w;
}

Witness unitary_witness(const ComplexMatrix& a, const ComplexMatrix& b,
                        const Tolerances& tol) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const RealVector sa = Eigen::JacobiSVD<ComplexMatrix>(a).singularValues();
  const RealVector sb = Eigen::JacobiSVD<ComplexMatrix>(b).singularValues();
  const double margin = tol.psd_margin;
  const bool small_gain = sa(0) * sb(0) < 1.0 - margin;
  const bool large_gain = m == n && sa(n - 1) * sb(n - 1) > 1.0 + margin;
  if (small_gain || large_gain) condition_holds(UncertaintyClass::Unitary);
  if (m == 1) return unitary_witness_single_row(a, b);

  Eigen::JacobiSVD<ComplexMatrix> svd_a(a, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  Eigen::JacobiSVD<ComplexMatrix> svd_b(b, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  // V pairs right singular vectors of A with left singular vectors of B.
  // When n > m, A's m-th direction is sent to a null direction of B so the
  // product gains a zero singular value.
  ComplexMatrix perm = ComplexMatrix::Identity(n, n);
  if (n > m) {
    perm.col(m - 1).swap(perm.col(n - 1));
  }
  const ComplexMatrix v0 =
      svd_a.matrixV() * perm * svd_b.matrixU().adjoint();
  const ComplexMatrix c0 = a * v0 * b;  // m x m
  Eigen::JacobiSVD<ComplexMatrix> svd_c(c0, Eigen::ComputeFullU |
                                                Eigen::ComputeFullV);
  const RealVector s = svd_c.singularValues();
  const double s_hi = s(0);
  const double s_lo = s(m - 1);
  const double t = std::sqrt(
      std::max(0.0, (s_hi * s_hi - 1.0) * (1.0 - s_lo * s_lo)));
  // Target with the same singular values and eigenvalue -1.
  ComplexMatrix core = ComplexMatrix::Zero(m, m);
  for (Eigen::Index i = 1; i + 1 < m; ++i) core(i, i) = s(i);
  core(0, 0) = -1.0;
  core(0, m - 1) = t;
  core(m - 1, m - 1) = -s_hi * s_lo;
  Eigen::JacobiSVD<ComplexMatrix> svd_core(core, Eigen::ComputeFullU |
                                                     Eigen::ComputeFullV);
  // Y c0 = Q core Q* with Q = Z Vc*, giving Y = Z Vc* Uc W*.
  const ComplexMatrix& w_c0 = svd_c.matrixU();
  const ComplexMatrix& z_c0 = svd_c.matrixV();
  const ComplexMatrix y = z_c0 * svd_core.matrixV().adjoint() *
                          svd_core.matrixU() * w_c0.adjoint();
  Witness w;
  w.cls = UncertaintyClass::Unitary;
  w.U = y;
  w.V = v0;
  w.method = "singular value alignment";
  return w;
}

// ---------------------------------------------------------------------------
// Congruence class.
// ---------------------------------------------------------------------------

struct RaySpan {
  double lo = 0.0;
  double hi = -1.0;  // empty when hi < lo
};

// Intersection of the ray {r e^{j psi} : r >= 0} with the convex polygon.
RaySpan ray_span(const std::vector<Complex>& poly, double psi, double scale,
                 bool origin_inside) {
  const Complex rot = std::polar(1.0, -psi);
  const double tiny = 1e-12 * scale;
  RaySpan span;
  bool any = false;
  auto add = [&](double x) {
    if (x < -tiny) return;
    x = std::max(0.0, x);
    if (!any) {
      span.lo = span.hi = x;
      any = true;
    } else {
      span.lo = std::min(span.lo, x);
      span.hi = std::max(span.hi, x);
    }
  };
  const std::size_t k = poly.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Complex u = rot * poly[i];
    const Complex v = rot * poly[(i + 1) % k];
    if (std::abs(u.imag()) <= tiny) add(u.real());
    if ((u.imag() < -tiny && v.imag() > tiny) ||
        (u.imag() > tiny && v.imag() < -tiny)) {
      const double w = u.imag() / (u.imag() - v.imag());
      add(u.real() + w * (v.real() - u.real()));
    }
  }
  if (any && origin_inside) span.lo = 0.0;
  return span;
}

ComplexMatrix rotation2(double phi) {
  ComplexMatrix r(2, 2);
  r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return r;
}

// A = e^{j theta} [[1, 2], [0, 1]] (to rounding); returns theta.
std::optional<double> jordan_pair_angle(const ComplexMatrix& a) {
  if (a.rows() != 2) return std::nullopt;
  const Complex d = a(0, 0);
  if (std::abs(std::abs(d) - 1.0) > 1e-12 ||
      std::abs(a(1, 1) - d) > 1e-12 || std::abs(a(1, 0)) > 1e-12 ||
      std::abs(a(0, 1) - 2.0 * d) > 1e-12) {
    return std::nullopt;
  }
  return std::arg(d);
}

std::optional<Witness> congruence_jordan_pair(const ComplexMatrix& a,
                                              const ComplexMatrix& b,
                                              const Tolerances& tol) {
  const auto ta = jordan_pair_angle(a);
  const auto tb = jordan_pair_angle(b);
  if (!ta || !tb) return std::nullopt;
  Witness w;
  w.cls = UncertaintyClass::Congruence;
  w.T = rotation2(kPi / 2 + 0.5 * (*ta + *tb)).cast<Complex>();
  w.S = ComplexMatrix::Identity(2, 2);
  w.method = "real rotation of Jordan pair";
  evaluate_witness(a, b, w);
  if (w.relative_det < tol.det_zero_rel) return w;
  return std::nullopt;
}

std::vector<double> candidate_directions(const PhaseProfile& pa,
                                         const PhaseProfile& pb,
                                         const ComplexMatrix& a,
                                         const ComplexMatrix& b) {
  std::vector<double> base;
  for (const PhaseProfile* p : {&pa, &pb}) {
    const double sign = p == &pa ? 1.0 : -1.0;
    const double off = p == &pa ? 0.0 : kPi;
    if (p->cls.tag != SectorialTag::None) {
      for (double x : {p->phi_max, p->phi_min, p->center + kPi / 2,
                       p->center - kPi / 2}) {
        base.push_back(off + sign * x);
      }
    }
  }
  for (const ComplexMatrix* m : {&a, &b}) {
    const double sign = m == &a ? 1.0 : -1.0;
    const double off = m == &a ? 0.0 : kPi;
    Eigen::ComplexEigenSolver<ComplexMatrix> es(*m, false);
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      const Complex lam = es.eigenvalues()(i);
      if (std::abs(lam) > 0.0) base.push_back(off + sign * std::arg(lam));
    }
  }
  std::vector<double> out;
  for (double x : base) {
    for (double nudge : {0.0, 1e-7, -1e-7, 1e-4, -1e-4, 1e-2, -1e-2}) {
      out.push_back(x + nudge);
    }
  }
  constexpr int kGrid = 720;
  for (int k = 0; k < kGrid; ++k) out.push_back(2.0 * kPi * k / kGrid);
  return out;
}

// Builds T = rho [x, basis((Ax)^perp)] and S = [y, basis((By)^perp)]. Both
// congruences are block upper triangular in the first column, so the
// product has eigenvalue rho^2 (x*Ax)(y*By) = -1.
std::optional<Witness> congruence_from_vectors(const ComplexMatrix& a,
                                               const ComplexMatrix& b,
                                               const ComplexVector& x,
                                               const ComplexVector& y) {
  const Eigen::Index n = a.rows();
  const Complex c = x.dot(a * x);
  const Complex beta = y.dot(b * y);
  const double mag = std::abs(c * beta);
  if (!(mag > 0.0)) return std::nullopt;
  const double rho = 1.0 / std::sqrt(mag);
  Witness w;
  w.cls = UncertaintyClass::Congruence;
  w.T.resize(n, n);
  w.S.resize(n, n);
  w.T.col(0) = x;
  w.S.col(0) = y;
  if (n > 1) {
    w.T.rightCols(n - 1) = orthonormal_complement(a * x);
    w.S.rightCols(n - 1) = orthonormal_complement(b * y);
  }
  w.T *= rho;
  w.method = "numerical range alignment";
  return w;
}

std::optional<Witness> congruence_by_numerical_range(const ComplexMatrix& a,
                                                     const ComplexMatrix& b,
                                                     const PhaseProfile& pa,
                                                     const PhaseProfile& pb,
                                                     const Tolerances& tol) {
  constexpr int kAngles = 256;
  const NumericalRangeBoundary wa = numerical_range_boundary(a, kAngles, tol);
  const NumericalRangeBoundary wb = numerical_range_boundary(b, kAngles, tol);
  const double na = spectral_norm(a);
  const double nb = spectral_norm(b);
  const bool a_has_origin = wa.origin != OriginLocation::Outside;
  const bool b_has_origin = wb.origin != OriginLocation::Outside;

  struct Choice {
    double psi;
    RaySpan sa, sb;
    double score;
  };
  std::optional<Choice> best;
  for (double psi : candidate_directions(pa, pb, a, b)) {
    const RaySpan sa = ray_span(wa.points, psi, na, a_has_origin);
    const RaySpan sb = ray_span(wb.points, kPi - psi, nb, b_has_origin);
    if (sa.hi < sa.lo || sb.hi < sb.lo) continue;
    if (sa.hi <= 1e-9 * na || sb.hi <= 1e-9 * nb) continue;
    const double score =
        std::min((sa.hi - sa.lo) / na, (sb.hi - sb.lo) / nb) +
        1e-3 * std::min(sa.hi / na, sb.hi / nb);
    if (!best || score > best->score) best = Choice{psi, sa, sb, score};
  }
  if (!best) return std::nullopt;
  const Complex target_a =
      std::polar(0.5 * (best->sa.lo + best->sa.hi), best->psi);
  const Complex target_b =
      std::polar(0.5 * (best->sb.lo + best->sb.hi), kPi - best->psi);
  try {
    const ComplexVector x = nr_witness(a, target_a, tol);
    const ComplexVector y = nr_witness(b, target_b, tol);
    auto w = congruence_from_vectors(a, b, x, y);
    if (!w) return std::nullopt;
    evaluate_witness(a, b, *w);
    if (w->relative_det < tol.det_zero_rel) return w;
  } catch (const Error&) {
  }
  return std::nullopt;
}

Witness congruence_witness(const ComplexMatrix& a, const ComplexMatrix& b,
                           const Tolerances& tol,
                           const FallbackOptions& fallback) {
  require_square(a, "A");
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A and B must have equal size");
  }
  if (spectral_norm(a) == 0.0 || spectral_norm(b) == 0.0) {
    condition_holds(UncertaintyClass::Congruence);
  }
  if (a.rows() == 1) {
    const Complex ab = a(0, 0) * b(0, 0);
    const double r = std::abs(ab);
    if (!(ab.real() < 0.0 && std::abs(ab.imag()) <= tol.rank_rel * r)) {
      condition_holds(UncertaintyClass::Congruence);
    }
    Witness w;
    w.cls = UncertaintyClass::Congruence;
    w.T = ComplexMatrix::Constant(1, 1, 1.0 / std::sqrt(r));
    w.S = ComplexMatrix::Constant(1, 1, 1.0);
    w.method = "scalar magnitude match";
    evaluate_witness(a, b, w);
    return w;
  }
  const PhaseSumVerdict v = phase_sum_condition(a, b, tol);
  if (v.feasible) condition_holds(UncertaintyClass::Congruence);

  Witness id;
  id.cls = UncertaintyClass::Congruence;
  id.T = ComplexMatrix::Identity(a.rows(), a.rows());
  id.S = id.T;
  id.method = "unperturbed loop";
  evaluate_witness(a, b, id);
  if (id.relative_det < tol.det_zero_rel) return id;

  if (auto w = congruence_jordan_pair(a, b, tol)) return *w;
  if (auto w = congruence_by_numerical_range(a, b, v.a, v.b, tol)) return *w;

  Witness w = falsify_random(a, b, UncertaintyClass::Congruence,
                             fallback.budget, fallback.seed, tol);
  if (w.relative_det < tol.det_zero_rel) return w;
  Error e(ErrorCode::ConstructionFallbackFailed,
          "no congruence witness found; best relative determinant " +
              std::to_string(w.relative_det));
  throw e;
}

}  // namespace

Witness destabilize(const ComplexMatrix& a, const ComplexMatrix& b,
                    UncertaintyClass cls, const Tolerances& tol,
                    const FallbackOptions& fallback) {
  check_pair(a, b);
  Witness w;
  switch (cls) {
    case UncertaintyClass::Scaling:
      w = scaling_witness(a, b, tol);
      break;
    case UncertaintyClass::Rotation:
      w = rotation_witness(a, b, tol);
      break;
    case UncertaintyClass::Unitary:
      w = unitary_witness(a, b, tol);
      break;
    case UncertaintyClass::Congruence:
      w = congruence_witness(a, b, tol, fallback);
      break;
  }
  evaluate_witness(a, b, w);
  if (w.relative_det >= tol.det_zero_rel && cls != UncertaintyClass::Congruence) {
    Witness r = falsify_random(a, b, cls, fallback.budget, fallback.seed, tol);
    if (r.relative_det < w.relative_det) w = r;
    if (w.relative_det >= tol.det_zero_rel) {
      throw Error(ErrorCode::ConstructionFallbackFailed,
                  "construction missed; best relative determinant " +
                      std::to_string(w.relative_det));
    }
  }
  return w;
}

}  // namespace robustmult
