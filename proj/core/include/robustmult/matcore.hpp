#pragma once

#include <vector>

#include "robustmult/types.hpp"

// Dense complex linear-algebra substrate shared by every other module:
// Hermitian-part spectra, numerical ranges, principal square roots and the
// spectrally split Stein solver.

namespace robustmult {

// ---------------------------------------------------------------------------
// Small helpers.
// ---------------------------------------------------------------------------

void require_square(const ComplexMatrix& a, std::string_view what);
void require_finite(const ComplexMatrix& a, std::string_view what);

double spectral_norm(const ComplexMatrix& a);
ComplexMatrix hermitian_part(const ComplexMatrix& a);  // (A + A*) / 2

// Ascending eigenvalues of the Hermitian part of `h` (h is symmetrised first).
RealVector hermitian_eigenvalues(const ComplexMatrix& h);
double min_hermitian_eigenvalue(const ComplexMatrix& h);
double max_hermitian_eigenvalue(const ComplexMatrix& h);

// Singular values cut at rel * sigma_1.
int numerical_rank(const ComplexMatrix& a, double rel);
double condition_number(const ComplexMatrix& a);

// Product of column norms of `a`; an upper bound on |det(a)|.
double hadamard_bound(const ComplexMatrix& a);

// Product over columns of (1 + |p e_j|): an upper bound on |det(I + p)|
// that, unlike hadamard_bound(I + p), does not shrink when a column of
// I + p cancels.
double hadamard_scale(const ComplexMatrix& p);

// Orthonormal basis (as columns) of the orthogonal complement of `v`.
ComplexMatrix orthonormal_complement(const ComplexVector& v);

// Largest eps >= 0 with X - eps*Y >= 0 for Hermitian X >= 0 and Y >= 0,
// measured up to `rel_tol`. Returns +inf when Y vanishes on range(X) and
// 0 when X is indefinite or null(X) is not contained in null(Y).
double max_feasible_ratio(const ComplexMatrix& x, const ComplexMatrix& y,
                          double rel_tol);

// ---------------------------------------------------------------------------
// Accretivity.
// ---------------------------------------------------------------------------

enum class AccretivityTag {
  StrictlyAccretive,
  QuasiStrictlyAccretive,
  Accretive,
  None,
};

struct AccretivityClass {
  AccretivityTag tag = AccretivityTag::None;
  double margin = 0.0;  // smallest eigenvalue of (A + A*)/2
};

// QuasiStrictlyAccretive is reported for singular accretive matrices that are
// unitarily similar to diag(0, A_r) with A_r strictly accretive. Accretive
// matrices whose numerical range touches the imaginary axis away from the
// origin, such as diag(j, 1), stay Accretive.
AccretivityClass accretivity_classify(const ComplexMatrix& a,
                                      const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Numerical range.
// ---------------------------------------------------------------------------

enum class OriginLocation { Interior, Boundary, Outside };

struct NumericalRangeBoundary {
  std::vector<double> angles;
  std::vector<Complex> points;           // x_k* A x_k
  std::vector<ComplexVector> witnesses;  // unit x_k
  std::vector<double> support;           // lambda_max(Re(e^{-j theta} A))
  OriginLocation origin = OriginLocation::Boundary;
};

// Support value h(theta) = max over W(A) of Re(e^{-j theta} z).
double support_value(const ComplexMatrix& a, double theta);

NumericalRangeBoundary numerical_range_boundary(const ComplexMatrix& a,
                                                int num_angles,
                                                const Tolerances& tol = {});

// Unit vector x with x* A x = target (to rounding). The target must lie in
// the convex hull of sampled boundary points of W(A).
ComplexVector nr_witness(const ComplexMatrix& a, Complex target,
                         const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Principal square root and Stein equation.
// ---------------------------------------------------------------------------

ComplexMatrix principal_sqrt(const ComplexMatrix& m,
                             const Tolerances& tol = {});

struct SteinSolution {
  ComplexMatrix M;  // Hermitian, M - F* M F = Q
  ComplexMatrix Q;  // Hermitian positive definite
  double residual = 0.0;
  int stable_dim = 0;  // eigenvalues inside the unit disc
};

SteinSolution stein_split(const ComplexMatrix& f, const Tolerances& tol = {});

}  // namespace robustmult
