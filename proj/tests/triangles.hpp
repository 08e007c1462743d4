#pragma once

// Three-way agreement checks between a robustness condition (evaluated by an
// independent oracle), the matching synthesis routine and sampled
// perturbations. Failing instances are planted so that a sample hits the
// singular perturbation exactly; robust instances are drawn away from the
// condition boundary so the sampled surrogate is meaningful.

#include <algorithm>
#include <string>

#include "robustmult/adversary.hpp"
#include "robustmult/synthesis.hpp"
#include "test_util.hpp"

namespace testutil {

struct TriangleCase {
  ComplexMatrix a, b;
  bool condition = false;         // oracle verdict: robust
  bool synth_ok = false;          // synthesis returned a certificate
  bool sampled_singular = false;  // some sample reached relative det < 1e-8
  double sampled_min = 0.0;
  double witness_rel = 1.0;       // destabilize on failing instances
  bool agree() const { return condition == synth_ok && synth_ok != sampled_singular; }
};

inline constexpr double kSingularRel = 1e-8;

inline ComplexVector random_unit_phases(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(1.0, ang(rng));
  return v;
}

// A with A B = X diag(lambda) X^{-1} for a random invertible B.
inline void plant_product(const ComplexVector& lambda, std::mt19937_64& rng,
                          ComplexMatrix& a, ComplexMatrix& b) {
  const Eigen::Index n = lambda.size();
  const ComplexMatrix x = random_invertible(n, 5.0, rng);
  b = random_invertible(n, 5.0, rng);
  a = x * lambda.asDiagonal() * x.inverse() * b.inverse();
}

inline void finish_witness(TriangleCase& c, robustmult::UncertaintyClass cls) {
  if (c.condition) return;
  try {
    const auto w = robustmult::destabilize(c.a, c.b, cls);
    robustmult::Witness check = w;
    robustmult::evaluate_witness(c.a, c.b, check);
    c.witness_rel = check.relative_det;
  } catch (const robustmult::Error&) {
    c.witness_rel = 1.0;
  }
}

// Scaling: no eigenvalue of AB on the open negative real axis.
inline TriangleCase scaling_case(int n, bool planted_fail, std::mt19937_64& rng) {
  const std::vector<double> taus = log_spaced(50, 1e-3, 1e3);
  std::uniform_real_distribution<double> mag(0.05, 20.0), ang(-kPi, kPi);
  std::uniform_int_distribution<std::size_t> pick(0, taus.size() - 1);
  TriangleCase c;
  ComplexVector lambda(n);
  for (;;) {
    for (int i = 0; i < n; ++i) lambda(i) = std::polar(mag(rng), ang(rng));
    bool clear = true;
    for (int i = 0; i < n; ++i) clear = clear && std::abs(std::arg(lambda(i))) < kPi - 0.05;
    if (clear) break;
  }
  if (planted_fail) lambda(0) = -1.0 / taus[pick(rng)];
  plant_product(lambda, rng, c.a, c.b);

  c.condition = true;
  for (const Complex& e : eigenvalues(c.a * c.b)) {
    if (e.real() < 0.0 && std::abs(e.imag()) <= 1e-8 * std::abs(e)) c.condition = false;
  }
  try {
    robustmult::synth_phasal_scaling(c.a, c.b);
    c.synth_ok = true;
  } catch (const robustmult::Error&) {
  }
  c.sampled_min = 1.0;
  for (double t : taus) c.sampled_min = std::min(c.sampled_min, rel_det(t * c.a * c.b));
  c.sampled_singular = c.sampled_min < kSingularRel;
  finish_witness(c, robustmult::UncertaintyClass::Scaling);
  return c;
}

// Rotation: no eigenvalue of AB on the unit circle.
inline TriangleCase rotation_case(int n, bool planted_fail, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lo(0.05, 0.95), hi(1.05, 20.0), ang(-kPi, kPi);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> pick(0, 719);
  TriangleCase c;
  ComplexVector lambda(n);
  for (int i = 0; i < n; ++i) lambda(i) = std::polar(coin(rng) ? lo(rng) : hi(rng), ang(rng));
  if (planted_fail) lambda(0) = std::polar(1.0, kPi - 2.0 * kPi * pick(rng) / 720.0);
  plant_product(lambda, rng, c.a, c.b);

  c.condition = true;
  for (const Complex& e : eigenvalues(c.a * c.b)) {
    if (std::abs(std::abs(e) - 1.0) <= 1e-8) c.condition = false;
  }
  try {
    robustmult::synth_gain_rotation(c.a, c.b);
    c.synth_ok = true;
  } catch (const robustmult::Error&) {
  }
  c.sampled_min = 1.0;
  for (int k = 0; k < 720; ++k) {
    const Complex z = std::polar(1.0, 2.0 * kPi * k / 720.0);
    c.sampled_min = std::min(c.sampled_min, rel_det(z * c.a * c.b));
  }
  c.sampled_singular = c.sampled_min < kSingularRel;
  finish_witness(c, robustmult::UncertaintyClass::Rotation);
  return c;
}

// Congruence: A = T_a* D_a T_a and B = T_b* D_b T_b with known phases; the
// phase-sum condition is evaluated on those phases directly.
inline TriangleCase congruence_case(int n, bool want_fail, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> width(0.05, 0.45 * kPi), center(-kPi, kPi);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TriangleCase c;
  std::vector<double> pa(n), pb(n);
  for (;;) {
    const double ca = center(rng);
    // Robust pairs rotate B back toward -ca; failing pairs push the sum past pi.
    const double cb = want_fail ? kPi - ca + 0.6 * u(rng) : -ca + 0.6 * u(rng);
    const double wa = width(rng), wb = width(rng);
    for (int i = 0; i < n; ++i) pa[i] = ca + wa * u(rng);
    for (int i = 0; i < n; ++i) pb[i] = cb + wb * u(rng);
    const double smax = *std::max_element(pa.begin(), pa.end()) +
                        *std::max_element(pb.begin(), pb.end());
    const double smin = *std::min_element(pa.begin(), pa.end()) +
                        *std::min_element(pb.begin(), pb.end());
    // Best 2 pi offset: the interval [smin, smax] must fit in (-pi, pi).
    double slack = -1e300;
    for (int m = -3; m <= 3; ++m) {
      slack = std::max(slack, std::min(kPi - (smax + 2 * kPi * m), (smin + 2 * kPi * m) + kPi));
    }
    if (std::abs(slack) < 0.05) continue;
    c.condition = slack > 0.0;
    break;
  }
  auto build = [&](const std::vector<double>& phi) {
    ComplexVector d(n);
    for (int i = 0; i < n; ++i) d(i) = std::polar(1.0, phi[i]);
    const ComplexMatrix t = random_invertible(n, 5.0, rng);
    return ComplexMatrix(t.adjoint() * d.asDiagonal() * t);
  };
  c.a = build(pa);
  c.b = build(pb);
  try {
    robustmult::synth_phasal_congruence(c.a, c.b);
    c.synth_ok = true;
  } catch (const robustmult::Error&) {
  }
  if (c.condition) {
    c.sampled_min = 1.0;
    for (int k = 0; k < 200; ++k) {
      const ComplexMatrix t = random_invertible(n, 1e3, rng);
      const ComplexMatrix s = random_invertible(n, 1e3, rng);
      c.sampled_min = std::min(c.sampled_min,
                               rel_det_sv(t.adjoint() * c.a * t * s.adjoint() * c.b * s));
    }
  } else {
    c.sampled_min = robustmult::falsify_random(c.a, c.b,
                                               robustmult::UncertaintyClass::Congruence,
                                               720, rng())
                        .relative_det;
  }
  c.sampled_singular = c.sampled_min < kSingularRel;
  finish_witness(c, robustmult::UncertaintyClass::Congruence);
  return c;
}

// Unitary pairs: robust iff s1(A) s1(B) < 1 or s_n(A) s_n(B) > 1.
inline TriangleCase unitary_case(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lg(-1.0, 1.0);
  TriangleCase c;
  for (;;) {
    Eigen::VectorXd sa(n), sb(n);
    for (int i = 0; i < n; ++i) sa(i) = std::pow(10.0, 0.7 * lg(rng));
    for (int i = 0; i < n; ++i) sb(i) = std::pow(10.0, 0.7 * lg(rng));
    const double top = sa.maxCoeff() * sb.maxCoeff();
    const double bottom = sa.minCoeff() * sb.minCoeff();
    if (std::abs(top - 1.0) < 0.05 || std::abs(bottom - 1.0) < 0.05) continue;
    c.a = gram_schmidt_unitary(n, rng) * sa.cast<Complex>().asDiagonal() *
          gram_schmidt_unitary(n, rng).adjoint();
    c.b = gram_schmidt_unitary(n, rng) * sb.cast<Complex>().asDiagonal() *
          gram_schmidt_unitary(n, rng).adjoint();
    c.condition = top < 1.0 || bottom > 1.0;
    break;
  }
  try {
    robustmult::synth_gain_unitary(c.a, c.b);
    c.synth_ok = true;
  } catch (const robustmult::Error&) {
  }
  if (c.condition) {
    c.sampled_min = 1.0;
    for (int k = 0; k < 200; ++k) {
      const ComplexMatrix u = gram_schmidt_unitary(n, rng);
      const ComplexMatrix v = gram_schmidt_unitary(n, rng);
      c.sampled_min = std::min(c.sampled_min, rel_det(u * c.a * v * c.b));
    }
  } else {
    c.sampled_min = robustmult::falsify_random(c.a, c.b,
                                               robustmult::UncertaintyClass::Unitary,
                                               720, rng())
                        .relative_det;
  }
  c.sampled_singular = c.sampled_min < kSingularRel;
  finish_witness(c, robustmult::UncertaintyClass::Unitary);
  return c;
}

struct TriangleTally {
  int instances = 0;
  int failing = 0;
  int disagreements = 0;
  int bad_witnesses = 0;
  double worst_witness = 0.0;
  std::string first_problem;

  void add(const TriangleCase& c, int index) {
    ++instances;
    const bool disagree = !c.agree();
    if (disagree) ++disagreements;
    if (!c.condition) {
      ++failing;
      worst_witness = std::max(worst_witness, c.witness_rel);
      if (!(c.witness_rel < kSingularRel)) ++bad_witnesses;
    }
    if ((disagree || (!c.condition && !(c.witness_rel < kSingularRel))) &&
        first_problem.empty()) {
      first_problem = "instance " + std::to_string(index) + ": condition=" +
                      std::to_string(c.condition) + " synth=" + std::to_string(c.synth_ok) +
                      " sampled_min=" + std::to_string(c.sampled_min) +
                      " witness=" + std::to_string(c.witness_rel);
    }
  }
};

}  // namespace testutil
