#include "robustmult/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robustmult/matcore.hpp"

namespace robustmult {
namespace {

constexpr int kGridSize = 360;
constexpr int kRefineIters = 80;

// Smallest eigenvalue of Re(e^{-j alpha} A): the margin of the rotated
// accretivity test. Concave on the arc where it is nonnegative.
double rotated_margin(const ComplexMatrix& a, double alpha) {
  return min_hermitian_eigenvalue(std::polar(1.0, -alpha) * a);
}

double wrap_angle(double x) {
  return x - 2.0 * kPi * std::ceil((x - kPi) / (2.0 * kPi));
}

struct Peak {
  double alpha;
  double value;
};

Peak find_peak(const ComplexMatrix& a) {
  Peak best{0.0, -std::numeric_limits<double>::infinity()};
  for (int k = 0; k < kGridSize; ++k) {
    const double alpha = 2.0 * kPi * k / kGridSize;
    const double v = rotated_margin(a, alpha);
    if (v > best.value) best = {alpha, v};
  }
  const double h = 2.0 * kPi / kGridSize;
  double lo = best.alpha - h;
  double hi = best.alpha + h;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = rotated_margin(a, x1);
  double f2 = rotated_margin(a, x2);
  for (int it = 0; it < kRefineIters; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = rotated_margin(a, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = rotated_margin(a, x1);
    }
  }
  const double mid = 0.5 * (lo + hi);
  const double fm = rotated_margin(a, mid);
  if (fm > best.value) best = {mid, fm};
  return best;
}

// Endpoint of the arc {alpha : margin(alpha) >= level} containing `inside`,
// searched toward `outside`.
double arc_end(const ComplexMatrix& a, double inside, double outside,
               double level) {
  for (int it = 0; it < kRefineIters; ++it) {
    const double mid = 0.5 * (inside + outside);
    if (rotated_margin(a, mid) >= level) {
      inside = mid;
    } else {
      outside = mid;
    }
  }
  return inside;
}

struct Factorized {
  ComplexMatrix t;
  ComplexMatrix d;
  std::vector<double> phases;
};

// Sectorial factorization of A given a rotation theta with e^{-j theta} A
// strictly accretive. Rows of T and entries of D are sorted by decreasing
// phase.
Factorized factorize_at(const ComplexMatrix& a, double theta) {
  const Eigen::Index n = a.rows();
  const ComplexMatrix b = std::polar(1.0, -theta) * a;
  const ComplexMatrix h = hermitian_part(b);
  const ComplexMatrix k = (b - b.adjoint()) / (2.0 * kJ);
  Eigen::LLT<ComplexMatrix> llt(h);
  const ComplexMatrix l = llt.matrixL();
  const ComplexMatrix li_k =
      l.triangularView<Eigen::Lower>().solve(k);
  const ComplexMatrix kt = hermitian_part(
      l.triangularView<Eigen::Lower>().solve(li_k.adjoint()).adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(kt);
  const RealVector& lam = es.eigenvalues();
  const ComplexMatrix t0 = es.eigenvectors().adjoint() * l.adjoint();

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return lam(i) > lam(j); });
  Factorized out;
  out.t.resize(n, n);
  out.d = ComplexMatrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double li = lam(order[r]);
    const double angle = std::atan(li);
    out.t.row(r) = std::sqrt(std::hypot(1.0, li)) * t0.row(order[r]);
    out.d(r, r) = std::polar(1.0, theta + angle);
    out.phases.push_back(theta + angle);
  }
  return out;
}

void sort_descending(PhaseProfile& p) {
  std::sort(p.phases.begin(), p.phases.end(), std::greater<double>());
}

// Sets the extreme phases of a sorted profile and keeps the rest between.
void pin_ends(PhaseProfile& p, double hi, double lo) {
  for (double& x : p.phases) x = std::clamp(x, lo, hi);
  p.phases.front() = hi;
  p.phases.back() = lo;
}

void shift_profile(PhaseProfile& p, double shift) {
  for (double& x : p.phases) x += shift;
  p.phi_max += shift;
  p.phi_min += shift;
  p.center += shift;
}

double midpoint(const PhaseProfile& p) { return 0.5 * (p.phi_max + p.phi_min); }

// Shift by 2 pi k so the phase midpoint lies in (-pi, pi].
void wrap_midpoint(PhaseProfile& p) {
  const double mid = midpoint(p);
  shift_profile(p, wrap_angle(mid) - mid);
}

void canonicalize(PhaseProfile& p) {
  wrap_midpoint(p);
  const double mid = midpoint(p);
  if (p.has_alternate && !(mid > -kPi / 2 && mid <= kPi / 2)) {
    p = alternate_representative(p);
  }
}

PhaseProfile profile_impl(const ComplexMatrix& a, const Tolerances& tol) {
  const double norm = spectral_norm(a);
  if (norm == 0.0) {
    throw Error(ErrorCode::ZeroMatrix, "phases are undefined for A = 0");
  }
  const Eigen::Index n = a.rows();
  const double thr = tol.psd_margin * norm;
  const Peak peak = find_peak(a);
  PhaseProfile p;

  if (peak.value > thr) {
    const double lo = arc_end(a, peak.alpha, peak.alpha - kPi, 0.0);
    const double hi = arc_end(a, peak.alpha, peak.alpha + kPi, 0.0);
    const double center = 0.5 * (lo + hi);
    const Factorized f = factorize_at(a, center);
    p.cls = {SectorialTag::Sectorial, std::max(0.0, kPi - (hi - lo))};
    p.phases = f.phases;
    p.center = center;
    p.rank = static_cast<int>(n);
  } else if (peak.value < -thr) {
    p.cls = {SectorialTag::None, 2.0 * kPi};
    p.rank = numerical_rank(a, tol.rank_rel);
    return p;
  } else {
    const int r = numerical_rank(a, tol.rank_rel);
    if (r < n) {
      Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullV);
      const ComplexMatrix v = svd.matrixV().leftCols(r);
      const ComplexMatrix reduced = v.adjoint() * a * v;
      const double leak = (a - v * reduced * v.adjoint()).norm();
      if (leak <= tol.rank_rel * a.norm() * 10.0) {
        const PhaseProfile sub = profile_impl(reduced, tol);
        if (sub.cls.tag == SectorialTag::Sectorial) {
          p = sub;
          p.cls.tag = SectorialTag::QuasiSectorial;
          p.rank = r;
          canonicalize(p);
          return p;
        }
      }
    }
    const double lo = arc_end(a, peak.alpha, peak.alpha - kPi, -thr);
    const double hi = arc_end(a, peak.alpha, peak.alpha + kPi, -thr);
    const double center = 0.5 * (lo + hi);
    p.cls = {SectorialTag::SemiSectorial, kPi};
    p.center = center;
    p.rank = r;
    p.has_alternate = rotated_margin(a, center + kPi) >= -thr;
    const ComplexMatrix shifted =
        std::polar(1.0, -center) * a +
        1e-6 * norm * ComplexMatrix::Identity(n, n);
    const Factorized f = factorize_at(shifted, 0.0);
    for (double x : f.phases) {
      p.phases.push_back(
          std::clamp(center + x, center - kPi / 2, center + kPi / 2));
    }
    sort_descending(p);
    pin_ends(p, center + kPi / 2, center - kPi / 2);
    p.phases_exact = n <= 2;
  }
  sort_descending(p);
  p.phi_max = p.phases.front();
  p.phi_min = p.phases.back();
  canonicalize(p);
  return p;
}

struct Candidate {
  PhaseSumVerdict v;
  double violation;
};

}  // namespace

std::string_view to_string(SectorialTag tag) {
  switch (tag) {
    case SectorialTag::Sectorial: return "Sectorial";
    case SectorialTag::QuasiSectorial: return "QuasiSectorial";
    case SectorialTag::SemiSectorial: return "SemiSectorial";
    case SectorialTag::None: return "None";
  }
  return "None";
}

bool is_quasi_sectorial(const PhaseProfile& p) {
  return p.cls.tag == SectorialTag::Sectorial ||
         p.cls.tag == SectorialTag::QuasiSectorial;
}

bool is_semi_sectorial(const PhaseProfile& p) {
  return p.cls.tag != SectorialTag::None;
}

PhaseProfile classify_and_phases(const ComplexMatrix& a,
                                 const Tolerances& tol) {
  require_square(a, "A");
  require_finite(a, "A");
  return profile_impl(a, tol);
}

PhaseProfile alternate_representative(const PhaseProfile& p) {
  if (!p.has_alternate) return p;
  PhaseProfile q = p;
  for (double& x : q.phases) {
    if (x < p.center) x += 2.0 * kPi;
  }
  q.center = p.center + kPi;
  sort_descending(q);
  q.phi_max = q.center + kPi / 2;
  q.phi_min = q.center - kPi / 2;
  pin_ends(q, q.phi_max, q.phi_min);
  wrap_midpoint(q);
  return q;
}

SectorialFactorization sectorial_factorize(const ComplexMatrix& a,
                                           const Tolerances& tol) {
  require_square(a, "A");
  require_finite(a, "A");
  if (spectral_norm(a) == 0.0) {
    throw Error(ErrorCode::NotSectorial, "A = 0 is not sectorial");
  }
  const PhaseProfile p = profile_impl(a, tol);
  if (p.cls.tag != SectorialTag::Sectorial) {
    throw Error(ErrorCode::NotSectorial,
                "origin is not outside the numerical range (class " +
                    std::string(to_string(p.cls.tag)) + ")");
  }
  const Factorized f = factorize_at(a, p.center);
  SectorialFactorization out;
  out.T = f.t;
  out.D = f.d;
  out.residual = (f.t.adjoint() * f.d * f.t - a).norm() / a.norm();
  return out;
}

PhaseSumVerdict phase_sum_condition(const ComplexMatrix& a,
                                    const ComplexMatrix& b,
                                    const Tolerances& tol) {
  require_square(a, "A");
  require_square(b, "B");
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A and B must have equal size");
  }
  const PhaseProfile pa = classify_and_phases(a, tol);
  const PhaseProfile pb = classify_and_phases(b, tol);

  PhaseSumVerdict base;
  base.a = pa;
  base.b = pb;
  const bool a_quasi = is_quasi_sectorial(pa) && is_semi_sectorial(pb);
  const bool b_quasi = is_quasi_sectorial(pb) && is_semi_sectorial(pa);
  base.roles_ok = a_quasi || b_quasi;
  base.quasi_side = a_quasi ? QuasiSide::A : QuasiSide::B;
  if (!base.roles_ok) return base;

  std::vector<PhaseProfile> reps_a{pa}, reps_b{pb};
  if (pa.has_alternate) reps_a.push_back(alternate_representative(pa));
  if (pb.has_alternate) reps_b.push_back(alternate_representative(pb));

  const double ang_tol = tol.psd_margin;
  std::optional<Candidate> best;
  for (const PhaseProfile& ra : reps_a) {
    for (const PhaseProfile& rb : reps_b) {
      const double smax = ra.phi_max + rb.phi_max;
      const double smin = ra.phi_min + rb.phi_min;
      const int m =
          static_cast<int>(std::lround(-0.5 * (smax + smin) / (2.0 * kPi)));
      Candidate c{base, 0.0};
      c.v.a = ra;
      c.v.b = rb;
      c.v.offset = m;
      c.v.sum_max = smax + 2.0 * kPi * m;
      c.v.sum_min = smin + 2.0 * kPi * m;
      c.violation = std::max(c.v.sum_max - kPi, -kPi - c.v.sum_min);
      c.v.feasible = c.violation < -ang_tol;
      if (!best || c.violation < best->violation) best = c;
    }
  }
  return best->v;
}

}  // namespace robustmult
