#include <gtest/gtest.h>

#include "robustmult/matcore.hpp"
#include "robustmult/separation.hpp"
#include "robustmult/synthesis.hpp"
#include "test_util.hpp"
#include "triangles.hpp"

namespace rm = robustmult;
using namespace testutil;

namespace {

ComplexMatrix eye(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

ComplexMatrix diag2(Complex a, Complex b) {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

template <class F>
rm::Error expect_error(F&& f, rm::ErrorCode code) {
  try {
    f();
  } catch (const rm::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    return e;
  }
  ADD_FAILURE() << "expected " << rm::to_string(code);
  return rm::Error(code, "not thrown");
}

void expect_sound(const ComplexMatrix& a, const ComplexMatrix& b,
                  const rm::SynthesisResult& r) {
  const auto again = rm::verify_multiplier(a, b, r.multiplier, r.form, r.epsilon);
  EXPECT_TRUE(again.pass);
  EXPECT_TRUE(r.report.pass);
  if (r.strict_report) {
    EXPECT_TRUE(rm::verify_multiplier(a, b, r.multiplier, r.strict_report->form).pass);
  }
  EXPECT_TRUE(rm::graph_sep_check(a, b).separated);
}

}  // namespace

TEST(PhasalScaling, IdentityPair) {
  const auto r = rm::synth_phasal_scaling(eye(2), eye(2));
  EXPECT_LT((r.multiplier.H - eye(2)).norm(), 1e-12);
  EXPECT_TRUE(rm::verify_multiplier(eye(2), eye(2), r.multiplier, rm::Form::Eq3).pass);
  EXPECT_TRUE(rm::verify_multiplier(eye(2), eye(2), r.multiplier, rm::Form::Eq4).pass);
}

TEST(PhasalScaling, DiagonalPair) {
  const ComplexMatrix a = diag2(1.0, 2.0), b = diag2(3.0, 4.0);
  const auto r = rm::synth_phasal_scaling(a, b);
  const ComplexMatrix expected = diag2(1.0 / std::sqrt(3.0), 2.0 / std::sqrt(8.0));
  EXPECT_LT((r.multiplier.H - expected).norm(), 1e-12);
  const ComplexMatrix ha = r.multiplier.H * a;
  const ComplexMatrix hb = r.multiplier.H.adjoint() * b;
  EXPECT_GT(min_eig_herm(ha), 0.0);
  EXPECT_GT(min_eig_herm(hb), 0.0);
  expect_sound(a, b, r);
}

TEST(PhasalScaling, NegativeRealEigenvalue) {
  const auto e = expect_error([] { rm::synth_phasal_scaling(-eye(2), eye(2)); },
                              rm::ErrorCode::SpectrumOnNegativeRealAxis);
  ASSERT_TRUE(e.value().has_value());
  EXPECT_NEAR(std::abs(*e.value() - Complex(-1.0)), 0.0, 1e-12);
}

TEST(PhasalScaling, ExampleOneDefectiveZero) {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 2) = 1.0;
  expect_error([&] { rm::synth_phasal_scaling(a, eye(3)); },
               rm::ErrorCode::DefectiveZeroEigenvalue);
}

TEST(PhasalScaling, TwoByTwoDefectiveZeroIsUndecided) {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  const auto e = expect_error([&] { rm::synth_phasal_scaling(a, eye(2)); },
                              rm::ErrorCode::DefectiveZeroEigenvalue);
  EXPECT_TRUE(e.undecided());
}

TEST(PhasalScaling, StrictWhenInvertible) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    const ComplexMatrix a = random_invertible(n, 20.0, rng);
    const ComplexMatrix b = random_complex(n, n, rng);
    rm::SynthesisResult r;
    try {
      r = rm::synth_phasal_scaling(a, b);
    } catch (const rm::Error& e) {
      ADD_FAILURE() << "trial " << trial << ": " << e.what();
      continue;
    }
    expect_sound(a, b, r);
    const ComplexMatrix& h = r.multiplier.H;
    EXPECT_GT(rm::accretivity_classify(h * a).margin, 0.0) << trial;
    const auto bside = rm::accretivity_classify(h.adjoint() * b);
    EXPECT_TRUE(bside.tag == rm::AccretivityTag::StrictlyAccretive ||
                bside.tag == rm::AccretivityTag::QuasiStrictlyAccretive)
        << trial;
  }
}

TEST(PhasalScaling, RealModeGivesRealH) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const ComplexMatrix a = random_real(n, n, rng).cast<Complex>();
    const ComplexMatrix b = random_real(n, n, rng).cast<Complex>();
    try {
      const auto r = rm::synth_phasal_scaling(a, b, true);
      EXPECT_LT(r.multiplier.H.imag().norm(), 1e-12);
      expect_sound(a, b, r);
    } catch (const rm::Error& e) {
      EXPECT_EQ(e.code(), rm::ErrorCode::SpectrumOnNegativeRealAxis) << e.what();
    }
  }
}

TEST(PhasalCongruence, Examples) {
  EXPECT_NEAR(std::abs(rm::synth_phasal_congruence(eye(2), eye(2)).multiplier.z - 1.0), 0.0, 1e-12);
  const ComplexMatrix r3 = std::polar(1.0, kPi / 3) * eye(2);
  const auto r = rm::synth_phasal_congruence(r3, r3);
  EXPECT_NEAR(std::abs(r.multiplier.z - 1.0), 0.0, 1e-9);
  expect_sound(r3, r3, r);
  const auto neg = rm::synth_phasal_congruence(-eye(2), -eye(2), true);
  EXPECT_NEAR(std::abs(neg.multiplier.z + 1.0), 0.0, 1e-12);
  expect_error([] { rm::synth_phasal_congruence(kJ * eye(2), kJ * eye(2)); },
               rm::ErrorCode::PhaseSumViolated);
}

TEST(PhasalCongruence, RobustToSampledCongruences) {
  std::mt19937_64 rng(43);
  int feasible = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto c = congruence_case(1 + trial % 4, false, rng);
    ASSERT_TRUE(c.condition);
    ASSERT_TRUE(c.synth_ok) << trial;
    EXPECT_GT(c.sampled_min, kSingularRel) << trial;
    ++feasible;
  }
  EXPECT_EQ(feasible, 60);
}

TEST(GainRotation, StableScalar) {
  const auto r = rm::synth_gain_rotation(0.5 * eye(2), eye(2));
  EXPECT_LT((r.multiplier.M - 4.0 / 3.0 * eye(2)).norm(), 1e-12);
  EXPECT_LT((r.multiplier.N - 5.0 / 6.0 * eye(2)).norm(), 1e-12);
  expect_sound(0.5 * eye(2), eye(2), r);
}

TEST(GainRotation, AntistableScalar) {
  const auto r = rm::synth_gain_rotation(2.0 * eye(2), eye(2));
  EXPECT_LT((r.multiplier.M + 1.0 / 3.0 * eye(2)).norm(), 1e-12);
  EXPECT_LT((r.multiplier.N + 5.0 / 6.0 * eye(2)).norm(), 1e-12);
  const ComplexMatrix a = 2.0 * eye(2);
  // A* M A < N and B* N B < M.
  EXPECT_LT(max_eig_herm(a.adjoint() * r.multiplier.M * a - r.multiplier.N), 0.0);
  EXPECT_LT(max_eig_herm(r.multiplier.N - r.multiplier.M), 0.0);
}

TEST(GainRotation, UnitCircleSpectrum) {
  ComplexMatrix a(2, 2);
  a << 0.0, -1.0, 1.0, 0.0;
  const auto e = expect_error([&] { rm::synth_gain_rotation(a, eye(2)); },
                              rm::ErrorCode::UnitCircleEigenvalue);
  ASSERT_TRUE(e.value().has_value());
  EXPECT_NEAR(std::abs(*e.value()), 1.0, 1e-12);
}

TEST(GainRotation, RectangularPairs) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + trial % 3, n = 1 + (trial / 3) % 4;
    const ComplexMatrix a = random_complex(m, n, rng);
    const ComplexMatrix b = random_complex(n, m, rng);
    const auto r = rm::synth_gain_rotation(a, b);
    expect_sound(a, b, r);
    EXPECT_EQ(r.multiplier.N.rows(), n);
    EXPECT_EQ(r.multiplier.M.rows(), m);
  }
}

TEST(GainUnitary, SmallGainBranch) {
  const auto r = rm::synth_gain_unitary(0.5 * eye(2), eye(2));
  EXPECT_EQ(r.multiplier.xi, 1);
  EXPECT_NEAR(r.multiplier.gamma_sq, 0.4, 1e-12);
  expect_sound(0.5 * eye(2), eye(2), r);
}

TEST(GainUnitary, LargeGainBranch) {
  const auto r = rm::synth_gain_unitary(2.0 * eye(2), eye(2));
  EXPECT_EQ(r.multiplier.xi, -1);
  EXPECT_NEAR(r.multiplier.gamma_sq, 1.6, 1e-12);
  expect_sound(2.0 * eye(2), eye(2), r);
}

TEST(GainUnitary, StraddlingGainsHaveNoCertificate) {
  expect_error([] { rm::synth_gain_unitary(diag2(2.0, 0.5), eye(2)); },
               rm::ErrorCode::NoGainCertificate);
}

TEST(SynthesisTriangles, ScalingSpectrumCondition) {
  std::mt19937_64 rng(45);
  TriangleTally tally;
  for (int i = 0; i < 300; ++i) {
    tally.add(scaling_case(1 + i % 5, i % 2 == 1, rng), i);
  }
  EXPECT_EQ(tally.disagreements, 0) << tally.first_problem;
  EXPECT_EQ(tally.bad_witnesses, 0) << tally.first_problem;
  EXPECT_GT(tally.failing, 100);
}

TEST(SynthesisTriangles, RotationSpectrumCondition) {
  std::mt19937_64 rng(46);
  TriangleTally tally;
  for (int i = 0; i < 300; ++i) {
    tally.add(rotation_case(1 + i % 5, i % 2 == 1, rng), i);
  }
  EXPECT_EQ(tally.disagreements, 0) << tally.first_problem;
  EXPECT_EQ(tally.bad_witnesses, 0) << tally.first_problem;
  EXPECT_GT(tally.failing, 100);
}

TEST(SynthesisTriangles, UnitarySingularValueCondition) {
  std::mt19937_64 rng(47);
  TriangleTally tally;
  for (int i = 0; i < 150; ++i) tally.add(unitary_case(1 + i % 4, rng), i);
  EXPECT_EQ(tally.disagreements, 0) << tally.first_problem;
  EXPECT_EQ(tally.bad_witnesses, 0) << tally.first_problem;
  EXPECT_GT(tally.failing, 20);
}

TEST(SynthesisTriangles, CongruencePhaseCondition) {
  std::mt19937_64 rng(48);
  TriangleTally tally;
  for (int i = 0; i < 150; ++i) {
    tally.add(congruence_case(1 + i % 4, i % 2 == 1, rng), i);
  }
  EXPECT_EQ(tally.disagreements, 0) << tally.first_problem;
  EXPECT_EQ(tally.bad_witnesses, 0) << tally.first_problem;
  EXPECT_GT(tally.failing, 40);
}

TEST(SynthesisLog, RecordsDeterministicChoices) {
  const auto r1 = rm::synth_gain_unitary(0.5 * eye(2), eye(2));
  const auto r2 = rm::synth_gain_unitary(0.5 * eye(2), eye(2));
  ASSERT_FALSE(r1.log.empty());
  ASSERT_EQ(r1.log.size(), r2.log.size());
  for (std::size_t i = 0; i < r1.log.size(); ++i) {
    EXPECT_EQ(r1.log[i].name, r2.log[i].name);
    EXPECT_EQ(r1.log[i].value, r2.log[i].value);
  }
}
