#include <gtest/gtest.h>

#include "robustmult/matcore.hpp"
#include "test_util.hpp"

namespace rm = robustmult;
using namespace testutil;

namespace {

ComplexMatrix nilpotent2() {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  return a;
}

ComplexMatrix diag2(Complex a, Complex b) {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

template <class F>
void expect_error(F&& f, rm::ErrorCode code) {
  try {
    f();
    FAIL() << "expected " << rm::to_string(code);
  } catch (const rm::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Accretivity, IdentityIsStrict) {
  const auto c = rm::accretivity_classify(ComplexMatrix::Identity(2, 2));
  EXPECT_EQ(c.tag, rm::AccretivityTag::StrictlyAccretive);
  EXPECT_NEAR(c.margin, 1.0, 1e-14);
}

TEST(Accretivity, NilpotentIsNone) {
  const auto c = rm::accretivity_classify(nilpotent2());
  EXPECT_EQ(c.tag, rm::AccretivityTag::None);
  EXPECT_NEAR(c.margin, -0.5, 1e-14);
}

TEST(Accretivity, ImaginaryEntryIsAccretive) {
  const auto c = rm::accretivity_classify(diag2(kJ, 1.0));
  EXPECT_EQ(c.tag, rm::AccretivityTag::Accretive);
  EXPECT_NEAR(c.margin, 0.0, 1e-14);
}

TEST(Accretivity, SingularAccretiveIsQuasiStrict) {
  const auto c = rm::accretivity_classify(diag2(0.0, 1.0));
  EXPECT_EQ(c.tag, rm::AccretivityTag::QuasiStrictlyAccretive);
}

TEST(Accretivity, AgreesWithDirectHermitianSolve) {
  std::mt19937_64 rng(11);
  const rm::Tolerances tol;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 4;
    ComplexMatrix a = random_complex(n, n, rng);
    a += (0.3 * (trial % 7) - 0.5) * singular_values(a)(0) *
         ComplexMatrix::Identity(n, n);
    const double lmin = min_eig_herm(a);
    const double scale = singular_values(a)(0);
    const auto c = rm::accretivity_classify(a, tol);
    EXPECT_NEAR(c.margin, lmin, 1e-12 * (1.0 + scale));
    const bool strict = lmin > tol.psd_margin * scale;
    const bool accretive = lmin >= -tol.psd_margin * scale;
    EXPECT_EQ(c.tag == rm::AccretivityTag::StrictlyAccretive, strict);
    EXPECT_EQ(c.tag != rm::AccretivityTag::None, accretive);
  }
}

TEST(NumericalRange, SegmentExcludesOrigin) {
  const auto r = rm::numerical_range_boundary(diag2(1.0, kJ), 64);
  EXPECT_EQ(r.origin, rm::OriginLocation::Outside);
  for (const Complex& p : r.points) {
    // Hull of {1, j}: real and imaginary parts nonnegative, summing to 1.
    EXPECT_GT(p.real(), -1e-12);
    EXPECT_GT(p.imag(), -1e-12);
    EXPECT_NEAR(p.real() + p.imag(), 1.0, 1e-12);
  }
}

TEST(NumericalRange, NilpotentDisc) {
  const auto r = rm::numerical_range_boundary(nilpotent2(), 64);
  EXPECT_EQ(r.origin, rm::OriginLocation::Interior);
  for (double s : r.support) EXPECT_NEAR(s, 0.5, 1e-12);
  for (double t : {0.0, 0.7, 2.0, -1.3}) {
    EXPECT_NEAR(rm::support_value(nilpotent2(), t), 0.5, 1e-12);
  }
}

TEST(NumericalRange, HermitianSupportValues) {
  const ComplexMatrix a = diag2(2.0, -1.0);
  for (double t : {0.0, 0.4, 1.2, kPi / 2, 2.5, kPi}) {
    EXPECT_NEAR(rm::support_value(a, t),
                std::max(2.0 * std::cos(t), -std::cos(t)), 1e-12);
  }
  // The origin lies inside the real segment [-1, 2], which is all of W(A).
  // The closed range has empty interior in the plane, so the tag is the
  // boundary one.
  const auto r = rm::numerical_range_boundary(a, 64);
  EXPECT_NE(r.origin, rm::OriginLocation::Outside);
}

TEST(NumericalRange, PointsInsideRangeOnFinerGrid) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const ComplexMatrix a = random_complex(n, n, rng);
    const int k = 32;
    const auto r = rm::numerical_range_boundary(a, k);
    const double scale = singular_values(a)(0);
    for (int i = 0; i < 4 * k; ++i) {
      const double t = 2.0 * kPi * i / (4 * k);
      // Independent support function: largest eigenvalue of Re(e^{-jt} A).
      const double h = max_eig_herm(std::exp(-kJ * t) * a);
      for (const Complex& p : r.points) {
        EXPECT_LE((std::exp(-kJ * t) * p).real(), h + 1e-8 * (1.0 + scale));
      }
    }
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      const ComplexVector& x = r.witnesses[i];
      EXPECT_NEAR(x.norm(), 1.0, 1e-12);
      EXPECT_LT(std::abs(x.dot(a * x) - r.points[i]), 1e-10 * (1.0 + scale));
    }
  }
}

TEST(NumericalRange, OriginTagMonotoneInRefinement) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    ComplexMatrix a = random_complex(n, n, rng);
    a += (trial % 5) * 0.6 * ComplexMatrix::Identity(n, n);
    bool seen_outside = false;
    for (int k : {8, 16, 64, 256}) {
      const auto r = rm::numerical_range_boundary(a, k);
      if (seen_outside) EXPECT_NE(r.origin, rm::OriginLocation::Interior);
      seen_outside = seen_outside || r.origin == rm::OriginLocation::Outside;
    }
  }
}

TEST(NrWitness, Vertex) {
  const ComplexVector x = rm::nr_witness(diag2(1.0, kJ), 1.0);
  EXPECT_NEAR(std::abs(x(0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(x(1)), 0.0, 1e-12);
}

TEST(NrWitness, SegmentMidpoint) {
  const ComplexMatrix a = diag2(1.0, kJ);
  const ComplexVector x = rm::nr_witness(a, Complex(0.5, 0.5));
  EXPECT_NEAR(std::abs(x(0)), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(std::abs(x(1)), std::sqrt(0.5), 1e-12);
  EXPECT_LT(std::abs(x.dot(a * x) - Complex(0.5, 0.5)), 1e-12);
}

TEST(NrWitness, NilpotentNegativeHalf) {
  const ComplexMatrix a = nilpotent2();
  const ComplexVector x = rm::nr_witness(a, -0.5);
  EXPECT_NEAR(x.norm(), 1.0, 1e-12);
  EXPECT_LT(std::abs(x.dot(a * x) + 0.5), 1e-8 * 1.5);
}

TEST(NrWitness, OutsideTargetRejected) {
  expect_error([] { rm::nr_witness(diag2(1.0, kJ), Complex(2.0, 2.0)); },
               rm::ErrorCode::TargetOutsideRange);
}

TEST(NrWitness, ConvexCombinationsOfBoundaryPoints) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 3;
    const ComplexMatrix a = random_complex(n, n, rng);
    const auto r = rm::numerical_range_boundary(a, 48);
    std::uniform_int_distribution<std::size_t> pick(0, r.points.size() - 1);
    const double w = u(rng);
    const Complex goal = w * r.points[pick(rng)] + (1.0 - w) * r.points[pick(rng)];
    const ComplexVector x = rm::nr_witness(a, goal);
    EXPECT_NEAR(x.norm(), 1.0, 1e-12);
    EXPECT_LT(std::abs(x.dot(a * x) - goal), 1e-8 * (1.0 + std::abs(goal)));
  }
}

TEST(PrincipalSqrt, Examples) {
  EXPECT_LT((rm::principal_sqrt(ComplexMatrix::Identity(2, 2)) -
             ComplexMatrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LT((rm::principal_sqrt(diag2(4.0, 9.0)) - diag2(2.0, 3.0)).norm(), 1e-14);
  expect_error([] { rm::principal_sqrt(nilpotent2()); },
               rm::ErrorCode::DefectiveZeroEigenvalue);
  expect_error([] { rm::principal_sqrt(ComplexMatrix::Constant(1, 1, -4.0)); },
               rm::ErrorCode::NegativeRealEigenvalue);
}

TEST(PrincipalSqrt, ResidualOnRandomSpectra) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> ang(-0.9 * kPi, 0.9 * kPi);
  std::uniform_real_distribution<double> mag(0.1, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 5;
    ComplexVector lam(n);
    for (int i = 0; i < n; ++i) lam(i) = std::polar(mag(rng), ang(rng));
    const ComplexMatrix x = random_invertible(n, 10.0, rng);
    const ComplexMatrix m = x * lam.asDiagonal() * x.inverse();
    const ComplexMatrix s = rm::principal_sqrt(m);
    EXPECT_LE((s * s - m).norm(), 1e-10 * m.norm()) << "trial " << trial;
    // Principal branch: every eigenvalue of S has positive real part.
    for (const Complex& e : eigenvalues(s)) EXPECT_GT(e.real(), 0.0);
  }
}

TEST(Stein, ScalarExamples) {
  const auto s1 = rm::stein_split(ComplexMatrix::Constant(1, 1, 0.5));
  EXPECT_NEAR(s1.M(0, 0).real(), 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(s1.Q(0, 0).real(), 1.0, 1e-14);
  const auto s2 = rm::stein_split(ComplexMatrix::Constant(1, 1, 2.0));
  EXPECT_NEAR(s2.M(0, 0).real(), -1.0 / 3.0, 1e-14);
  EXPECT_NEAR(s2.Q(0, 0).real(), 1.0, 1e-14);
}

TEST(Stein, BlockDiagonalExample) {
  const auto s = rm::stein_split(diag2(0.5, 2.0));
  EXPECT_LT((s.M - diag2(4.0 / 3.0, -1.0 / 3.0)).norm(), 1e-13);
  EXPECT_LT((s.Q - ComplexMatrix::Identity(2, 2)).norm(), 1e-13);
  EXPECT_EQ(s.stable_dim, 1);
}

TEST(Stein, UnitCircleRejected) {
  const ComplexMatrix f = ComplexMatrix::Constant(1, 1, std::polar(1.0, kPi / 7));
  expect_error([&] { rm::stein_split(f); }, rm::ErrorCode::UnitCircleEigenvalue);
}

TEST(Stein, MatchesGeometricSeriesOnDiagonals) {
  for (double f : {0.1, 0.5, 0.9, 1.1, 2.0, 3.0}) {
    const auto s = rm::stein_split(ComplexMatrix::Constant(1, 1, f));
    EXPECT_NEAR(s.M(0, 0).real() / s.Q(0, 0).real(), scalar_stein(f), 1e-12);
  }
}

TEST(Stein, ResidualAndPositiveQOnRandomF) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> inner(0.0, 0.9), outer(1.1, 3.0);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 5;
    ComplexVector lam(n);
    for (int i = 0; i < n; ++i) {
      lam(i) = std::polar(coin(rng) ? inner(rng) : outer(rng), ang(rng));
    }
    const ComplexMatrix x = random_invertible(n, 10.0, rng);
    const ComplexMatrix f = x * lam.asDiagonal() * x.inverse();
    const auto s = rm::stein_split(f);
    const double res = (s.M - f.adjoint() * s.M * f - s.Q).norm() / s.Q.norm();
    EXPECT_LT(res, 1e-9) << "trial " << trial;
    EXPECT_LT(s.residual, 1e-9);
    EXPECT_GT(min_eig_herm(s.Q), 0.0);
    EXPECT_LT((s.M - s.M.adjoint()).norm(), 1e-12 * (1.0 + s.M.norm()));
  }
}

TEST(Helpers, HadamardScaleBoundsDeterminant) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    const ComplexMatrix p = random_complex(n, n, rng);
    const double det = std::abs((ComplexMatrix::Identity(n, n) + p).determinant());
    EXPECT_LE(det, rm::hadamard_scale(p) * (1.0 + 1e-12));
    EXPECT_NEAR(rel_det(p), det / rm::hadamard_scale(p), 1e-14);
  }
}

TEST(Helpers, MaxFeasibleRatio) {
  // X = diag(4, 1), Y = diag(1, 1): largest eps with X - eps Y >= 0 is 1.
  const ComplexMatrix x = diag2(4.0, 1.0);
  EXPECT_NEAR(rm::max_feasible_ratio(x, ComplexMatrix::Identity(2, 2), 1e-12), 1.0, 1e-9);
  // null(X) is not contained in null(Y).
  EXPECT_EQ(rm::max_feasible_ratio(diag2(1.0, 0.0), diag2(0.0, 1.0), 1e-12), 0.0);
  // Y = 0 never binds.
  EXPECT_TRUE(std::isinf(rm::max_feasible_ratio(x, ComplexMatrix::Zero(2, 2), 1e-12)));
  EXPECT_EQ(rm::max_feasible_ratio(diag2(1.0, -1.0), ComplexMatrix::Identity(2, 2), 1e-12), 0.0);
}

TEST(Helpers, RejectsNonFiniteAndNonSquare) {
  ComplexMatrix a = ComplexMatrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  expect_error([&] { rm::accretivity_classify(a); }, rm::ErrorCode::NonFinite);
  expect_error([] { rm::principal_sqrt(ComplexMatrix::Zero(2, 3)); },
               rm::ErrorCode::NonSquare);
}
