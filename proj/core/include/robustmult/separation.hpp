#pragma once

#include <optional>
#include <string_view>

#include "robustmult/types.hpp"

// Multipliers P = [[P11, P12], [P21, P22]] (P11 is n x n, P22 is m x m) for
// a feedback pair A (m x n), B (n x m), and the four quadratic separation
// systems they can satisfy:
//
//   lhs_A = [I, -A*] P [I; -A],   lhs_B = [B*, I] P [B; I]
//
//   Eq3:  -lhs_A > 0,             lhs_B >= 0
//   Eq4:  -lhs_A >= eps A*A,      lhs_B >= 0
//   Eq5:  -lhs_A >= 0,            lhs_B > 0
//   Eq6:  -lhs_A >= 0,            lhs_B >= eps B*B

namespace robustmult {

enum class Structure { General, Phasal, Rotation, Gain, ScaledGain };
enum class Form { Eq3, Eq4, Eq5, Eq6 };

std::string_view to_string(Structure s);
std::string_view to_string(Form f);
// Accepts "Eq3".."Eq6" or "3".."6"; throws UnknownForm otherwise.
Form form_from_string(std::string_view s);

struct Multiplier {
  ComplexMatrix P;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Structure structure = Structure::General;
  ComplexMatrix H;  // Phasal and Rotation: P = [[0, H], [H*, 0]]
  Complex z{1.0, 0.0};  // Rotation: H = z I
  ComplexMatrix N;  // Gain: P = [[-N, 0], [0, M]]
  ComplexMatrix M;
  double gamma_sq = 0.0;  // ScaledGain: P = [[-xi gamma^2 I, 0], [0, xi I]]
  int xi = 1;

  static Multiplier general(const ComplexMatrix& p, Eigen::Index n,
                            Eigen::Index m);
  static Multiplier phasal(const ComplexMatrix& h);
  static Multiplier rotation(Complex z, Eigen::Index n);
  static Multiplier gain(const ComplexMatrix& n_blk, const ComplexMatrix& m_blk);
  static Multiplier scaled_gain(double gamma_sq, int xi, Eigen::Index n,
                                Eigen::Index m);
};

struct GraphSepResult {
  bool separated = false;
  Complex det{0.0, 0.0};  // det(I_m + A B)
  double scale = 1.0;     // hadamard_scale(A B)
  int block_rank = 0;     // numerical rank of [[I_n, -B], [A, I_m]]
  bool methods_agree = true;
};

GraphSepResult graph_sep_check(const ComplexMatrix& a, const ComplexMatrix& b,
                               const Tolerances& tol = {});

struct SeparationReport {
  Form form = Form::Eq3;
  double margin_A = 0.0;  // smallest eigenvalue of the A-side slack
  double margin_B = 0.0;  // smallest eigenvalue of the B-side slack
  double scale_A = 0.0;
  double scale_B = 0.0;
  std::optional<double> epsilon;      // value used for Eq4 / Eq6
  std::optional<double> epsilon_max;  // largest feasible value, if computed
  bool strict_A = false;  // -lhs_A > 0 with margin
  bool strict_B = false;  // lhs_B > 0 with margin
  bool pass = false;
};

// For Eq4/Eq6 without `epsilon`, the largest feasible eps is computed and
// half of it (or 1 when unbounded) is used.
SeparationReport verify_multiplier(const ComplexMatrix& a,
                                   const ComplexMatrix& b,
                                   const Multiplier& p, Form form,
                                   std::optional<double> epsilon = std::nullopt,
                                   const Tolerances& tol = {});

struct Conversion {
  Multiplier multiplier;
  SeparationReport report;  // verification for the target form
  // Shift or slack parameter chosen by the last step, with its maximum.
  std::optional<double> epsilon;
  std::optional<double> epsilon_max;
};

// Walks the cycle Eq3 -> Eq4 -> Eq5 -> Eq6 -> Eq3 from `from` to `to`.
Conversion convert_form(const Multiplier& p, Form from, Form to,
                        const ComplexMatrix& a, const ComplexMatrix& b,
                        const Tolerances& tol = {});

// Evaluated quadratic forms, exposed for diagnostics and sweeps.
ComplexMatrix lhs_a(const ComplexMatrix& a, const ComplexMatrix& p);
ComplexMatrix lhs_b(const ComplexMatrix& b, const ComplexMatrix& p);

}  // namespace robustmult
