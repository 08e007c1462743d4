#include "robustmult/matcore.hpp"

#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

namespace robustmult {

void require_square(const ComplexMatrix& a, std::string_view what) {
  if (a.rows() < 1 || a.rows() != a.cols()) {
    throw Error(ErrorCode::NonSquare,
                std::string(what) + " must be square and non-empty, got " +
                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

void require_finite(const ComplexMatrix& a, std::string_view what) {
  if (!a.allFinite()) {
    throw Error(ErrorCode::NonFinite,
                std::string(what) + " contains NaN or Inf entries");
  }
}

double spectral_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

RealVector hermitian_eigenvalues(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(h),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_hermitian_eigenvalue(const ComplexMatrix& h) {
  return hermitian_eigenvalues(h).minCoeff();
}

double max_hermitian_eigenvalue(const ComplexMatrix& h) {
  return hermitian_eigenvalues(h).maxCoeff();
}

int numerical_rank(const ComplexMatrix& a, double rel) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  const RealVector& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel * s(0)) ++r;
  }
  return r;
}

double condition_number(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  const RealVector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

double hadamard_bound(const ComplexMatrix& a) {
  double prod = 1.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) prod *= a.col(j).norm();
  return prod;
}

double hadamard_scale(const ComplexMatrix& p) {
  double prod = 1.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) prod *= 1.0 + p.col(j).norm();
  return prod;
}

ComplexMatrix orthonormal_complement(const ComplexVector& v) {
  const Eigen::Index n = v.size();
  Eigen::HouseholderQR<ComplexMatrix> qr(v.normalized());
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  return q.rightCols(n - 1);
}

double max_feasible_ratio(const ComplexMatrix& x, const ComplexMatrix& y,
                          double rel_tol) {
  const ComplexMatrix xs = hermitian_part(x);
  const ComplexMatrix ys = hermitian_part(y);
  const double scale = std::max({spectral_norm(xs), spectral_norm(ys),
                                 std::numeric_limits<double>::min()});
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(xs);
  const RealVector& mu = es.eigenvalues();
  if (mu.minCoeff() < -rel_tol * scale) return 0.0;

  const double cut = rel_tol * scale;
  std::vector<Eigen::Index> range_idx, null_idx;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    (mu(i) > cut ? range_idx : null_idx).push_back(i);
  }
  const ComplexMatrix& w = es.eigenvectors();
  if (!null_idx.empty()) {
    ComplexMatrix wn(w.rows(), static_cast<Eigen::Index>(null_idx.size()));
    for (size_t k = 0; k < null_idx.size(); ++k) wn.col(k) = w.col(null_idx[k]);
    if (spectral_norm(wn.adjoint() * ys * wn) > cut) return 0.0;
  }
  if (range_idx.empty()) return std::numeric_limits<double>::infinity();

  const Eigen::Index r = static_cast<Eigen::Index>(range_idx.size());
  ComplexMatrix wr(w.rows(), r);
  RealVector inv_sqrt(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    wr.col(k) = w.col(range_idx[k]);
    inv_sqrt(k) = 1.0 / std::sqrt(mu(range_idx[k]));
  }
  ComplexMatrix yr = wr.adjoint() * ys * wr;
  yr = inv_sqrt.asDiagonal() * yr * inv_sqrt.asDiagonal();
  const double top = max_hermitian_eigenvalue(yr);
  if (top <= std::numeric_limits<double>::epsilon() * spectral_norm(yr) ||
      top <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 1.0 / top;
}

AccretivityClass accretivity_classify(const ComplexMatrix& a,
                                      const Tolerances& tol) {
  require_square(a, "A");
  require_finite(a, "A");
  AccretivityClass out;
  out.margin = min_hermitian_eigenvalue(hermitian_part(a));
  const double norm = spectral_norm(a);
  const double thr = tol.psd_margin * norm;
  if (out.margin > thr) {
    out.tag = AccretivityTag::StrictlyAccretive;
    return out;
  }
  if (out.margin < -thr) {
    out.tag = AccretivityTag::None;
    return out;
  }
  out.tag = AccretivityTag::Accretive;
  // Quasi-strict: A = U diag(0, A_r) U* with A_r strictly accretive.
  const Eigen::Index n = a.rows();
  const int r = numerical_rank(a, tol.rank_rel);
  if (r == 0 || r == n) return out;
  Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullV);
  const ComplexMatrix v = svd.matrixV().leftCols(r);
  const ComplexMatrix reduced = v.adjoint() * a * v;
  const double leak = (a - v * reduced * v.adjoint()).norm();
  if (leak > tol.rank_rel * a.norm()) return out;
  if (min_hermitian_eigenvalue(hermitian_part(reduced)) > thr) {
    out.tag = AccretivityTag::QuasiStrictlyAccretive;
  }
  return out;
}

ComplexMatrix principal_sqrt(const ComplexMatrix& m, const Tolerances& tol) {
  require_square(m, "M");
  require_finite(m, "M");
  const Eigen::Index n = m.rows();
  const double norm = spectral_norm(m);
  if (norm == 0.0) return ComplexMatrix::Zero(n, n);

  Eigen::ComplexEigenSolver<ComplexMatrix> es(m, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lam = es.eigenvalues()(i);
    if (lam.real() < -tol.rank_rel * norm &&
        std::abs(lam.imag()) <= tol.rank_rel * norm) {
      throw Error(ErrorCode::NegativeRealEigenvalue,
                  "matrix has an eigenvalue on the negative real axis", lam);
    }
  }

  const int r = numerical_rank(m, tol.rank_rel);
  if (r == n) {
    ComplexMatrix s = m.sqrt();
    return s;
  }
  const int r2 = numerical_rank(m * m, tol.rank_rel);
  if (r2 != r) {
    throw Error(ErrorCode::DefectiveZeroEigenvalue,
                "zero eigenvalue is not semi-simple (rank(M) = " +
                    std::to_string(r) + ", rank(M^2) = " +
                    std::to_string(r2) + ")");
  }
  if (r == 0) return ComplexMatrix::Zero(n, n);

  // C^n = ker(M) (+) range(M); both invariant, M vanishes on the kernel.
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU |
                                             Eigen::ComputeFullV);
  ComplexMatrix basis(n, n);
  basis.leftCols(n - r) = svd.matrixV().rightCols(n - r);
  basis.rightCols(r) = svd.matrixU().leftCols(r);
  Eigen::PartialPivLU<ComplexMatrix> lu(basis);
  const ComplexMatrix similar = lu.solve(m * basis);
  const ComplexMatrix core = similar.bottomRightCorner(r, r);
  ComplexMatrix block = ComplexMatrix::Zero(n, n);
  block.bottomRightCorner(r, r) = core.sqrt();
  return basis * block * lu.inverse();
}

}  // namespace robustmult
