#include <cmath>

#include "robustmult/matcore.hpp"

namespace robustmult {
namespace {

// Solves H - J* H J = I for H by vectorization:
// (I - J^T (x) J*) vec(H) = vec(I).
ComplexMatrix solve_block(const ComplexMatrix& j) {
  const Eigen::Index k = j.rows();
  if (k == 0) return ComplexMatrix(0, 0);
  const Eigen::Index kk = k * k;
  ComplexMatrix sys = ComplexMatrix::Identity(kk, kk);
  const ComplexMatrix jt = j.transpose();
  const ComplexMatrix js = j.adjoint();
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index r = 0; r < k; ++r) {
      sys.block(r * k, c * k, k, k) -= jt(r, c) * js;
    }
  }
  ComplexVector rhs = ComplexVector::Zero(kk);
  for (Eigen::Index i = 0; i < k; ++i) rhs(i * k + i) = 1.0;
  const ComplexVector h = sys.fullPivLu().solve(rhs);
  const ComplexMatrix hm = Eigen::Map<const ComplexMatrix>(h.data(), k, k);
  return hermitian_part(hm);
}

}  // namespace

SteinSolution stein_split(const ComplexMatrix& f, const Tolerances& tol) {
  require_square(f, "F");
  require_finite(f, "F");
  const Eigen::Index n = f.rows();
  Eigen::ComplexEigenSolver<ComplexMatrix> es(f);
  const ComplexVector& lam = es.eigenvalues();
  std::vector<Eigen::Index> stable, antistable;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gap = std::abs(lam(i)) - 1.0;
    if (std::abs(gap) <= tol.psd_margin) {
      throw Error(ErrorCode::UnitCircleEigenvalue,
                  "F has an eigenvalue on the unit circle", lam(i));
    }
    (gap < 0.0 ? stable : antistable).push_back(i);
  }
  ComplexMatrix x(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index i : stable) x.col(col++) = es.eigenvectors().col(i);
  for (Eigen::Index i : antistable) x.col(col++) = es.eigenvectors().col(i);
  const double cond = condition_number(x);
  if (!(cond <= tol.eig_cond_max)) {
    throw Error(ErrorCode::IllConditionedEigenvectors,
                "eigenvector matrix condition number " + std::to_string(cond) +
                    " exceeds the cap");
  }
  const ComplexMatrix x_inv = x.fullPivLu().inverse();
  const ComplexMatrix j = x_inv * f * x;
  const Eigen::Index s = static_cast<Eigen::Index>(stable.size());
  const Eigen::Index u = n - s;

  // The antistable block satisfies the same equation; its solution equals
  // the negative series in the inverse block.
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  if (s > 0) h.topLeftCorner(s, s) = solve_block(j.topLeftCorner(s, s));
  if (u > 0) h.bottomRightCorner(u, u) = solve_block(j.bottomRightCorner(u, u));

  SteinSolution out;
  out.M = hermitian_part(x_inv.adjoint() * h * x_inv);
  out.Q = hermitian_part(x_inv.adjoint() * x_inv);
  out.stable_dim = static_cast<int>(s);
  const ComplexMatrix res = out.M - f.adjoint() * out.M * f - out.Q;
  out.residual = res.norm() / out.Q.norm();
  return out;
}

}  // namespace robustmult
