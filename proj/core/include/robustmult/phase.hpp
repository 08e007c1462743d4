#pragma once

#include <vector>

#include "robustmult/types.hpp"

// Sectorial classification, sectorial factorization A = T* D T and matrix
// phases, including the rank-deficient (quasi-sectorial) reduction and the
// semi-sectorial extension.

namespace robustmult {

enum class SectorialTag { Sectorial, QuasiSectorial, SemiSectorial, None };

struct SectorialClass {
  SectorialTag tag = SectorialTag::None;
  double opening_angle = 2.0 * kPi;  // radians in [0, 2 pi]
};

struct PhaseProfile {
  SectorialClass cls;
  std::vector<double> phases;  // nonincreasing
  double phi_max = 0.0;
  double phi_min = 0.0;
  double center = 0.0;  // rotation angle used for extraction
  int rank = 0;
  // False when interior semi-sectorial phases are a perturbative estimate.
  bool phases_exact = true;
  // True when center + pi is also an admissible rotation (A is a rotated
  // indefinite Hermitian matrix); the alternate representative differs.
  bool has_alternate = false;
};

struct SectorialFactorization {
  ComplexMatrix T;
  ComplexMatrix D;  // diagonal unitary
  double residual = 0.0;  // ||T* D T - A||_F / ||A||_F
};

// The representative is fixed by (phi_max + phi_min) / 2 in (-pi, pi]; when
// an alternate representative exists the one with midpoint in (-pi/2, pi/2]
// is returned.
PhaseProfile classify_and_phases(const ComplexMatrix& a,
                                 const Tolerances& tol = {});

// Other admissible representative of a profile with has_alternate set.
PhaseProfile alternate_representative(const PhaseProfile& p);

SectorialFactorization sectorial_factorize(const ComplexMatrix& a,
                                           const Tolerances& tol = {});

enum class QuasiSide { A, B };

struct PhaseSumVerdict {
  bool feasible = false;
  int offset = 0;  // integer m of the 2 pi m shift
  double sum_max = 0.0;  // phi_max(A) + phi_max(B) + 2 pi m
  double sum_min = 0.0;  // phi_min(A) + phi_min(B) + 2 pi m
  bool roles_ok = false;  // one quasi-sectorial, the other semi-sectorial
  QuasiSide quasi_side = QuasiSide::A;
  PhaseProfile a;  // representatives achieving the verdict
  PhaseProfile b;
};

// A and B square of the same size. Representatives and the offset m are
// searched; the strict inequalities must clear psd_margin (radians).
PhaseSumVerdict phase_sum_condition(const ComplexMatrix& a,
                                    const ComplexMatrix& b,
                                    const Tolerances& tol = {});

bool is_quasi_sectorial(const PhaseProfile& p);
bool is_semi_sectorial(const PhaseProfile& p);

std::string_view to_string(SectorialTag tag);

}  // namespace robustmult
