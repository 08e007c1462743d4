#include <algorithm>
#include <cctype>
#include <cmath>

#include "robustmult/adversary.hpp"
#include "robustmult/matcore.hpp"

namespace robustmult {
namespace {

constexpr int kRefineCandidates = 4;
constexpr int kRefineIters = 40;

ComplexMatrix complex_normal(Eigen::Index r, Eigen::Index c,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  ComplexMatrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = Complex(nd(rng), nd(rng));
  }
  return m;
}

// Complex normal matrix with singular values clipped to cond <= cap.
ComplexMatrix conditioned_normal(Eigen::Index n, double cap,
                                 std::mt19937_64& rng) {
  const ComplexMatrix g = complex_normal(n, n, rng);
  Eigen::JacobiSVD<ComplexMatrix> svd(g, Eigen::ComputeFullU |
                                             Eigen::ComputeFullV);
  RealVector s = svd.singularValues();
  const double floor = s(0) / cap;
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::max(s(i), floor);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
}

// Cayley map of a Hermitian matrix built from real parameters: exactly
// unitary and the identity at p = 0.
ComplexMatrix cayley(const double* p, Eigen::Index n) {
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  int k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) = p[k++];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      h(i, j) = Complex(p[k], p[k + 1]);
      h(j, i) = std::conj(h(i, j));
      k += 2;
    }
  }
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix half = 0.5 * kJ * h;
  return (id - half).partialPivLu().solve(id + half);
}

int num_params(const ComplexMatrix& a, UncertaintyClass cls) {
  switch (cls) {
    case UncertaintyClass::Scaling:
    case UncertaintyClass::Rotation:
      return 1;
    case UncertaintyClass::Congruence:
      return static_cast<int>(2 * a.rows() * a.rows());
    case UncertaintyClass::Unitary:
      return static_cast<int>(a.rows() * a.rows() + a.cols() * a.cols());
  }
  return 1;
}

// Candidate obtained by moving `base` along the real parameter vector p.
Witness displaced(const ComplexMatrix& a, const Witness& base,
                  const RealVector& p) {
  Witness w = base;
  switch (base.cls) {
    case UncertaintyClass::Scaling:
      w.tau = base.tau * std::exp(p(0));
      break;
    case UncertaintyClass::Rotation:
      w.theta = base.theta + p(0);
      break;
    case UncertaintyClass::Congruence: {
      // Multiplicative update T (I + P), S held at the identity.
      const Eigen::Index n = a.rows();
      ComplexMatrix q = ComplexMatrix::Identity(n, n);
      int k = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          q(i, j) += Complex(p(k), p(k + 1));
          k += 2;
        }
      }
      w.T = base.T * q;
      break;
    }
    case UncertaintyClass::Unitary: {
      const Eigen::Index m = a.rows();
      const Eigen::Index n = a.cols();
      w.U = base.U * cayley(p.data(), m);
      w.V = base.V * cayley(p.data() + m * m, n);
      break;
    }
  }
  return w;
}

// Determinant divided by the relative-det normaliser, so Gauss-Newton steps
// cannot win by inflating the perturbation.
Complex det_of(const ComplexMatrix& a, const ComplexMatrix& b,
               const Witness& w) {
  const ComplexMatrix x = perturbed_return_difference(a, b, w);
  const Eigen::Index k = x.rows();
  return x.determinant() / hadamard_scale(x - ComplexMatrix::Identity(k, k));
}

// Damped Gauss-Newton on the complex determinant, accepting only steps that
// lower relative_det.
Witness refine_candidate(const ComplexMatrix& a, const ComplexMatrix& b,
                         Witness w, double target) {
  if (w.cls == UncertaintyClass::Congruence) {
    // det(I + T* A T S* B S) = det(I + W* A W B) with W = T S*, so the search
    // runs over W alone.
    w.T = w.T * w.S.adjoint();
    w.S = ComplexMatrix::Identity(w.T.rows(), w.T.cols());
    evaluate_witness(a, b, w);
  }
  const int np = num_params(a, w.cls);
  for (int it = 0; it < kRefineIters && w.relative_det > target; ++it) {
    const Complex d0 = det_of(a, b, w);
    Eigen::MatrixXd jac(2, np);
    const double h = 1e-6;
    RealVector p = RealVector::Zero(np);
    for (int k = 0; k < np; ++k) {
      p(k) = h;
      const Complex dp = det_of(a, b, displaced(a, w, p));
      p(k) = -h;
      const Complex dm = det_of(a, b, displaced(a, w, p));
      p(k) = 0.0;
      jac(0, k) = (dp.real() - dm.real()) / (2.0 * h);
      jac(1, k) = (dp.imag() - dm.imag()) / (2.0 * h);
    }
    const Eigen::Vector2d r(d0.real(), d0.imag());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU |
                                                   Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    if (!(sv(0) > 0.0)) break;
    const RealVector ur = svd.matrixU().transpose() * r;
    bool improved = false;
    for (double damp : {0.0, 1e-8, 1e-4, 1e-1}) {
      RealVector coef(sv.size());
      for (Eigen::Index i = 0; i < sv.size(); ++i) {
        const double s = sv(i);
        const double mu = damp * sv(0) * sv(0);
        coef(i) = s > 1e-14 * sv(0) ? ur(i) * s / (s * s + mu) : 0.0;
      }
      const RealVector step = -svd.matrixV() * coef;
      for (double scale = 1.0; scale > 1e-6; scale *= 0.25) {
        Witness cand = displaced(a, w, scale * step);
        evaluate_witness(a, b, cand);
        if (std::isfinite(cand.relative_det) &&
            cand.relative_det < w.relative_det) {
          w = std::move(cand);
          improved = true;
          break;
        }
      }
      if (improved) break;
    }
    if (!improved) break;
  }
  return w;
}

// Real rescaling of T multiplies T* A T S* B S by c^2, so the eigenvalue whose
// phase is closest to pi is moved onto the unit circle.
void unit_modulus_congruence(const ComplexMatrix& a, const ComplexMatrix& b,
                             Witness& w) {
  const ComplexMatrix p = w.T.adjoint() * a * w.T * w.S.adjoint() * b * w.S;
  const ComplexVector ev = Eigen::ComplexEigenSolver<ComplexMatrix>(p, false).eigenvalues();
  Complex pick(0.0, 0.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > 0.0 &&
        (pick == Complex(0.0, 0.0) || std::abs(std::arg(ev(i))) > std::abs(std::arg(pick)))) {
      pick = ev(i);
    }
  }
  if (std::abs(pick) > 0.0 && std::isfinite(std::abs(pick))) {
    w.T /= std::sqrt(std::abs(pick));
  }
}

Witness identity_candidate(const ComplexMatrix& a, UncertaintyClass cls) {
  Witness w;
  w.cls = cls;
  w.tau = 1.0;
  w.theta = 0.0;
  if (cls == UncertaintyClass::Congruence) {
    w.T = ComplexMatrix::Identity(a.rows(), a.rows());
    w.S = w.T;
  } else if (cls == UncertaintyClass::Unitary) {
    w.U = ComplexMatrix::Identity(a.rows(), a.rows());
    w.V = ComplexMatrix::Identity(a.cols(), a.cols());
  }
  return w;
}

}  // namespace

std::string_view to_string(UncertaintyClass c) {
  switch (c) {
    case UncertaintyClass::Scaling: return "scaling";
    case UncertaintyClass::Rotation: return "rotation";
    case UncertaintyClass::Congruence: return "congruence";
    case UncertaintyClass::Unitary: return "unitary";
  }
  return "scaling";
}

UncertaintyClass uncertainty_class_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "scaling") return UncertaintyClass::Scaling;
  if (lower == "rotation") return UncertaintyClass::Rotation;
  if (lower == "congruence") return UncertaintyClass::Congruence;
  if (lower == "unitary") return UncertaintyClass::Unitary;
  throw Error(ErrorCode::InvalidArgument,
              "unknown uncertainty class '" + std::string(s) + "'");
}

ComplexMatrix perturbed_return_difference(const ComplexMatrix& a,
                                          const ComplexMatrix& b,
                                          const Witness& w) {
  switch (w.cls) {
    case UncertaintyClass::Scaling: {
      const Eigen::Index m = a.rows();
      return ComplexMatrix::Identity(m, m) + w.tau * (a * b);
    }
    case UncertaintyClass::Rotation: {
      const Eigen::Index m = a.rows();
      return ComplexMatrix::Identity(m, m) + std::polar(1.0, w.theta) * (a * b);
    }
    case UncertaintyClass::Congruence: {
      const Eigen::Index n = a.rows();
      return ComplexMatrix::Identity(n, n) +
             (w.T.adjoint() * a * w.T) * (w.S.adjoint() * b * w.S);
    }
    case UncertaintyClass::Unitary: {
      const Eigen::Index m = a.rows();
      return ComplexMatrix::Identity(m, m) + w.U * a * w.V * b;
    }
  }
  return ComplexMatrix();
}

void evaluate_witness(const ComplexMatrix& a, const ComplexMatrix& b,
                      Witness& w) {
  const ComplexMatrix x = perturbed_return_difference(a, b, w);
  w.closed_loop_det = std::abs(x.determinant());
  const Eigen::Index k = x.rows();
  w.relative_det =
      w.closed_loop_det / hadamard_scale(x - ComplexMatrix::Identity(k, k));
}

ComplexMatrix haar_unitary(Eigen::Index n, std::mt19937_64& rng) {
  const ComplexMatrix g = complex_normal(n, n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mag = std::abs(r(i, i));
    if (mag > 0.0) q.col(i) *= r(i, i) / mag;
  }
  return q;
}

Witness falsify_random(const ComplexMatrix& a, const ComplexMatrix& b,
                       UncertaintyClass cls, int budget, std::uint64_t seed,
                       const Tolerances& tol, bool refine) {
  if (budget < 1) {
    throw Error(ErrorCode::InvalidArgument, "budget must be at least 1");
  }
  if (a.rows() != b.cols() || a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A must be m x n and B n x m");
  }
  if (cls == UncertaintyClass::Congruence && a.rows() != a.cols()) {
    throw Error(ErrorCode::NonSquare, "congruence needs square A and B");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Witness> pool;
  pool.reserve(budget);
  for (int k = 0; k < budget; ++k) {
    Witness w = identity_candidate(a, cls);
    if (k > 0) {
      switch (cls) {
        case UncertaintyClass::Scaling:
          w.tau = std::pow(10.0, -4.0 + 8.0 * unit(rng));
          break;
        case UncertaintyClass::Rotation:
          w.theta = 2.0 * kPi * unit(rng);
          break;
        case UncertaintyClass::Congruence:
          w.T = conditioned_normal(a.rows(), 1e4, rng);
          w.S = conditioned_normal(a.rows(), 1e4, rng);
          unit_modulus_congruence(a, b, w);
          break;
        case UncertaintyClass::Unitary:
          w.U = haar_unitary(a.rows(), rng);
          w.V = haar_unitary(a.cols(), rng);
          break;
      }
    }
    evaluate_witness(a, b, w);
    pool.push_back(std::move(w));
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Witness& x, const Witness& y) {
                     return x.relative_det < y.relative_det;
                   });
  Witness best = pool.front();
  if (refine) {
    const int count = std::min<int>(kRefineCandidates, pool.size());
    for (int k = 0; k < count && best.relative_det >= tol.det_zero_rel * 1e-3;
         ++k) {
      Witness r = refine_candidate(a, b, pool[k], tol.det_zero_rel * 1e-3);
      if (r.relative_det < best.relative_det) best = std::move(r);
    }
  }
  if (best.cls == UncertaintyClass::Rotation) {
    best.theta = std::fmod(best.theta, 2.0 * kPi);
    if (best.theta < 0.0) best.theta += 2.0 * kPi;
  }
  best.from_fallback = true;
  best.method = "random search";
  return best;
}

}  // namespace robustmult
