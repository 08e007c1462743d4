#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "robustmult/types.hpp"

// Destabilizing perturbations for the four uncertainty classes and a seeded
// randomized falsifier used as an independent oracle.
//
//   Scaling     det(I + tau A B),              tau >= 0
//   Rotation    det(I + e^{j theta} A B),      theta in [0, 2 pi)
//   Congruence  det(I + T* A T S* B S),        T, S invertible
//   Unitary     det(I + U A V B),              U, V unitary

namespace robustmult {

enum class UncertaintyClass { Scaling, Rotation, Congruence, Unitary };

std::string_view to_string(UncertaintyClass c);
// Accepts "scaling", "rotation", "congruence", "unitary" (any case).
UncertaintyClass uncertainty_class_from_string(std::string_view s);

struct Witness {
  UncertaintyClass cls = UncertaintyClass::Scaling;
  double tau = 1.0;
  double theta = 0.0;
  ComplexMatrix T, S;  // Congruence
  ComplexMatrix U, V;  // Unitary
  double closed_loop_det = 0.0;  // |det(I + perturbed product)|
  double relative_det = 0.0;     // closed_loop_det / hadamard_scale
  bool from_fallback = false;    // produced by the randomized search
  std::string method;            // construction used
};

// Perturbed return difference I + (perturbed A)(perturbed B) for `w`.
ComplexMatrix perturbed_return_difference(const ComplexMatrix& a,
                                          const ComplexMatrix& b,
                                          const Witness& w);

// Fills closed_loop_det and relative_det of `w` in place.
void evaluate_witness(const ComplexMatrix& a, const ComplexMatrix& b,
                      Witness& w);

struct FallbackOptions {
  int budget = 20000;
  std::uint64_t seed = 1;
};

// Throws ConditionHolds when the class's robustness condition holds, and
// ConstructionFallbackFailed when neither the construction nor the
// randomized fallback reaches relative_det < det_zero_rel.
Witness destabilize(const ComplexMatrix& a, const ComplexMatrix& b,
                    UncertaintyClass cls, const Tolerances& tol = {},
                    const FallbackOptions& fallback = {});

// Best of `budget` random admissible perturbations (the identity
// perturbation is always the first candidate), followed by Gauss-Newton
// refinement of the best few when `refine` is set. Deterministic in `seed`.
Witness falsify_random(const ComplexMatrix& a, const ComplexMatrix& b,
                       UncertaintyClass cls, int budget, std::uint64_t seed,
                       const Tolerances& tol = {}, bool refine = true);

// Haar-distributed n x n unitary.
ComplexMatrix haar_unitary(Eigen::Index n, std::mt19937_64& rng);

}  // namespace robustmult
