#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "robustmult/matcore.hpp"

namespace robustmult {
namespace {

struct TopPair {
  double value;
  ComplexVector vector;
};

TopPair top_eigenpair(const ComplexMatrix& a, double theta) {
  const ComplexMatrix rotated = std::polar(1.0, -theta) * a;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(rotated));
  const Eigen::Index n = a.rows();
  return {es.eigenvalues()(n - 1), es.eigenvectors().col(n - 1)};
}

Complex quadratic_value(const ComplexMatrix& a, const ComplexVector& x) {
  return x.dot(a * x);
}

double cross(Complex u, Complex v) {
  return u.real() * v.imag() - u.imag() * v.real();
}

double dot2(Complex u, Complex v) {
  return u.real() * v.real() + u.imag() * v.imag();
}

// Unit x with x*Ax = t for t on the segment [pa, pb], pa = xa*A xa and
// pb = xb*A xb. Rotating so the segment is real reduces the problem to a
// quadratic in the mixing weight, solved in closed form.
ComplexVector realize_on_segment(const ComplexMatrix& a,
                                 const ComplexVector& xa,
                                 const ComplexVector& xb, Complex t,
                                 double eps) {
  const Complex pa = quadratic_value(a, xa);
  const Complex pb = quadratic_value(a, xb);
  if (std::abs(t - pa) <= eps) return xa;
  if (std::abs(t - pb) <= eps) return xb;
  const Complex chord = pb - pa;
  if (std::abs(chord) <= eps) return xa;
  const Complex rot = std::polar(1.0, -std::arg(chord));
  const Eigen::Index n = a.rows();
  const ComplexMatrix b =
      rot * (a - t * ComplexMatrix::Identity(n, n));
  const double qa = quadratic_value(b, xa).real();
  const double qb = quadratic_value(b, xb).real();
  if (qa >= 0.0) return xa;
  if (qb <= 0.0) return xb;
  const Complex u = xa.dot(b * xb);
  const Complex v = xb.dot(b * xa);
  const Complex w = u - std::conj(v);
  const double phi = std::abs(w) > 0.0 ? -std::arg(w) : 0.0;
  const Complex e = std::polar(1.0, phi);
  const double c = (e * u + std::conj(e) * v).real();
  const double disc = std::max(0.0, c * c - 4.0 * qa * qb);
  // Numerically stable positive root of qb s^2 + c s + qa = 0.
  double s;
  if (c >= 0.0) {
    s = (-2.0 * qa) / (c + std::sqrt(disc));
  } else {
    s = (-c + std::sqrt(disc)) / (2.0 * qb);
  }
  ComplexVector x = xa + s * e * xb;
  return x.normalized();
}

struct RayHit {
  double s;
  std::size_t edge;
  double w;
};

// Farthest intersection of the ray p + s d (s >= 0) with the closed polygon.
std::optional<RayHit> ray_exit(const std::vector<Complex>& poly, Complex p,
                               Complex d, double scale) {
  std::optional<RayHit> best;
  const std::size_t k = poly.size();
  const double tiny = 1e-14 * scale;
  auto consider = [&](double s, std::size_t edge, double w) {
    if (s < -tiny) return;
    if (!best || s > best->s) best = RayHit{s, edge, w};
  };
  for (std::size_t i = 0; i < k; ++i) {
    const Complex u = poly[i];
    const Complex v = poly[(i + 1) % k];
    const Complex e = v - u;
    const Complex r = u - p;
    const double det = cross(e, d);
    if (std::abs(det) > 1e-14 * std::abs(e) + std::numeric_limits<double>::min()) {
      const double s = cross(e, r) / det;
      const double w = cross(d, r) / det;
      if (w >= -1e-12 && w <= 1.0 + 1e-12) {
        consider(s, i, std::clamp(w, 0.0, 1.0));
      }
    } else if (std::abs(cross(r, d)) <= tiny + 1e-12 * std::abs(r)) {
      consider(dot2(u - p, d), i, 0.0);
      consider(dot2(v - p, d), i, 1.0);
    }
  }
  return best;
}

// Target t inside W(A) but beyond the chord between the support points at
// angles ti < tj. Bisects the boundary arc until t falls in a triangle
// spanned by the chord and an arc point, then realizes t on two segments.
std::optional<ComplexVector> realize_in_arc(const ComplexMatrix& a, double ti,
                                            ComplexVector xi, double tj,
                                            ComplexVector xj, Complex t,
                                            double eps) {
  for (int depth = 0; depth < 60; ++depth) {
    const Complex pi = quadratic_value(a, xi);
    const Complex pj = quadratic_value(a, xj);
    const double tm = 0.5 * (ti + tj);
    ComplexVector xm = top_eigenpair(a, tm).vector;
    const Complex pm = quadratic_value(a, xm);
    if (std::abs(pm - t) <= eps) return xm;
    const Complex d = t - pm;
    const Complex e = pj - pi;
    const double det = cross(e, d);
    if (std::abs(det) > 0.0) {
      const Complex r = pi - pm;
      const double s = cross(e, r) / det;
      const double w = cross(d, r) / det;
      if (s >= 1.0 - 1e-12 && w >= -1e-12 && w <= 1.0 + 1e-12) {
        const Complex q = pi + std::clamp(w, 0.0, 1.0) * e;
        const ComplexVector xq = realize_on_segment(a, xi, xj, q, eps);
        return realize_on_segment(a, xm, xq, t, eps);
      }
    }
    if (cross(pm - pi, t - pi) < 0.0) {
      tj = tm;
      xj = std::move(xm);
    } else {
      ti = tm;
      xi = std::move(xm);
    }
  }
  return std::nullopt;
}

}  // namespace

double support_value(const ComplexMatrix& a, double theta) {
  require_square(a, "A");
  return top_eigenpair(a, theta).value;
}

NumericalRangeBoundary numerical_range_boundary(const ComplexMatrix& a,
                                                int num_angles,
                                                const Tolerances& tol) {
  require_square(a, "A");
  require_finite(a, "A");
  if (num_angles < 8) {
    throw Error(ErrorCode::InvalidArgument, "num_angles must be at least 8");
  }
  NumericalRangeBoundary out;
  out.angles.reserve(num_angles);
  out.points.reserve(num_angles);
  out.witnesses.reserve(num_angles);
  out.support.reserve(num_angles);
  const double thr = tol.psd_margin * spectral_norm(a);
  bool any_negative = false;
  bool all_positive = true;
  for (int k = 0; k < num_angles; ++k) {
    const double theta = 2.0 * kPi * k / num_angles;
    TopPair top = top_eigenpair(a, theta);
    out.angles.push_back(theta);
    out.points.push_back(quadratic_value(a, top.vector));
    out.support.push_back(top.value);
    out.witnesses.push_back(std::move(top.vector));
    if (top.value < -thr) any_negative = true;
    if (!(top.value > thr)) all_positive = false;
  }
  // W(A) is a segment or a point exactly when B = A - (tr A / n) I is a
  // rotated Hermitian matrix e^{j phi} K, and then tr(B^2) = e^{2 j phi}
  // |K|_F^2 fixes phi. A flat range has no interior, whatever the sampled
  // support values say.
  const Eigen::Index n = a.rows();
  const ComplexMatrix b =
      a - (a.trace() / static_cast<double>(n)) * ComplexMatrix::Identity(n, n);
  const Complex tr2 = (b * b).trace();
  bool flat = true;
  if (b.norm() > 0.0) {
    const ComplexMatrix k =
        std::polar(1.0, -0.5 * std::arg(tr2)) * b;
    flat = 0.5 * (k - k.adjoint()).norm() <= tol.psd_margin * b.norm();
  }
  if (any_negative) {
    out.origin = OriginLocation::Outside;
  } else if (all_positive && !flat) {
    out.origin = OriginLocation::Interior;
  } else {
    out.origin = OriginLocation::Boundary;
  }
  return out;
}

ComplexVector nr_witness(const ComplexMatrix& a, Complex target,
                         const Tolerances& tol) {
  require_square(a, "A");
  require_finite(a, "A");
  const double scale = spectral_norm(a) + std::abs(target);
  const double accept = 1e-8 * (1.0 + std::abs(target));
  const double snap = 1e-13 * (1.0 + scale);
  auto residual = [&](const ComplexVector& x) {
    return std::abs(quadratic_value(a, x) - target);
  };

  if (a.rows() == 1) {
    if (std::abs(a(0, 0) - target) <= accept) return ComplexVector::Ones(1);
    throw Error(ErrorCode::TargetOutsideRange,
                "target differs from the single entry of A", target);
  }

  for (int num_angles : {64, 256, 1024}) {
    const NumericalRangeBoundary nr = numerical_range_boundary(a, num_angles, tol);
    for (int k = 0; k < num_angles; ++k) {
      const double proj = (std::polar(1.0, -nr.angles[k]) * target).real();
      if (proj > nr.support[k] + 1e-10 * (1.0 + scale)) {
        throw Error(ErrorCode::TargetOutsideRange,
                    "target lies outside the numerical range", target);
      }
    }
    std::size_t far = 0;
    double far_dist = -1.0;
    for (std::size_t k = 0; k < nr.points.size(); ++k) {
      const double dist = std::abs(nr.points[k] - target);
      if (dist <= snap) return nr.witnesses[k];
      if (dist > far_dist) {
        far_dist = dist;
        far = k;
      }
    }
    const Complex p1 = nr.points[far];
    const Complex dir = (target - p1) / far_dist;
    const auto hit = ray_exit(nr.points, p1, dir, scale);
    if (!hit) continue;
    const std::size_t i = hit->edge;
    const std::size_t j = (i + 1) % nr.points.size();
    if (hit->s < far_dist * (1.0 - 1e-12)) {
      // The target sits in the sliver between the polygon edge and W(A).
      const double ti = nr.angles[i];
      const double tj = ti + 2.0 * kPi / num_angles;
      const auto x = realize_in_arc(a, ti, nr.witnesses[i], tj,
                                    nr.witnesses[j], target, snap);
      if (x && residual(*x) <= accept) return *x;
      continue;
    }
    const Complex q = nr.points[i] + hit->w * (nr.points[j] - nr.points[i]);
    const ComplexVector xq =
        realize_on_segment(a, nr.witnesses[i], nr.witnesses[j], q, snap);
    const ComplexVector x =
        realize_on_segment(a, nr.witnesses[far], xq, target, snap);
    if (residual(x) <= accept) return x;
  }
  throw Error(ErrorCode::TargetOutsideRange,
              "could not realize target inside the sampled numerical range",
              target);
}

}  // namespace robustmult
