#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robustmult/separation.hpp"
#include "robustmult/types.hpp"

// Closed-form multiplier synthesis. Every returned certificate has been
// verified by verify_multiplier for the form it claims.

namespace robustmult {

struct LogItem {
  std::string name;
  ComplexMatrix value;  // scalars are stored as 1 x 1 matrices
};

struct SynthesisResult {
  Multiplier multiplier;
  Form form = Form::Eq4;
  std::optional<double> epsilon;
  SeparationReport report;
  // Strict companion form (Eq3 or Eq5) when the construction also certifies it.
  std::optional<SeparationReport> strict_report;
  std::vector<LogItem> log;
};

// Phasal multiplier robust to nonnegative scaling tau of B. Errors:
// SpectrumOnNegativeRealAxis (value = offending eigenvalue of AB),
// DefectiveZeroEigenvalue (undecided when n = 2), DefectiveNonzeroEigenvalue.
SynthesisResult synth_phasal_scaling(const ComplexMatrix& a,
                                     const ComplexMatrix& b,
                                     bool real_mode = false,
                                     const Tolerances& tol = {});

// Rotation multiplier H = z I robust to congruences T* A T, S* B S. Errors:
// PhaseSumViolated (value = sum_max + j sum_min after the best offset),
// ClassViolated, ZeroMatrix.
SynthesisResult synth_phasal_congruence(const ComplexMatrix& a,
                                        const ComplexMatrix& b,
                                        bool real_mode = false,
                                        const Tolerances& tol = {});

// Gain multiplier robust to rotations e^{j theta} B. Errors:
// UnitCircleEigenvalue (value = offending eigenvalue of AB).
SynthesisResult synth_gain_rotation(const ComplexMatrix& a,
                                    const ComplexMatrix& b,
                                    const Tolerances& tol = {});

// Scaled-gain multiplier robust to unitary pairs U A V B. Errors:
// NoGainCertificate.
SynthesisResult synth_gain_unitary(const ComplexMatrix& a,
                                   const ComplexMatrix& b,
                                   const Tolerances& tol = {});

}  // namespace robustmult
