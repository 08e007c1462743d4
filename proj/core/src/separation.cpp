#include "robustmult/separation.hpp"

#include <cmath>
#include <limits>

#include "robustmult/matcore.hpp"

namespace robustmult {
namespace {

void check_pair(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() < 1 || a.cols() < 1 || a.rows() != b.cols() ||
      a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "A must be m x n and B n x m, got A " +
                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " and B " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

struct Slack {
  double margin;
  double scale;
};

Slack slack(const ComplexMatrix& x, double extra_scale) {
  return {min_hermitian_eigenvalue(x),
          std::max(spectral_norm(x), extra_scale)};
}

Form next_form(Form f) {
  switch (f) {
    case Form::Eq3: return Form::Eq4;
    case Form::Eq4: return Form::Eq5;
    case Form::Eq5: return Form::Eq6;
    case Form::Eq6: return Form::Eq3;
  }
  return Form::Eq3;
}

Multiplier shifted(const Multiplier& p, double d11, double d22) {
  ComplexMatrix q = p.P;
  q.topLeftCorner(p.n, p.n) += d11 * ComplexMatrix::Identity(p.n, p.n);
  q.bottomRightCorner(p.m, p.m) += d22 * ComplexMatrix::Identity(p.m, p.m);
  if (p.structure == Structure::Gain || p.structure == Structure::ScaledGain) {
    return Multiplier::gain(-q.topLeftCorner(p.n, p.n),
                            q.bottomRightCorner(p.m, p.m));
  }
  return Multiplier::general(q, p.n, p.m);
}

}  // namespace

std::string_view to_string(Structure s) {
  switch (s) {
    case Structure::General: return "General";
    case Structure::Phasal: return "Phasal";
    case Structure::Rotation: return "Rotation";
    case Structure::Gain: return "Gain";
    case Structure::ScaledGain: return "ScaledGain";
  }
  return "General";
}

std::string_view to_string(Form f) {
  switch (f) {
    case Form::Eq3: return "Eq3";
    case Form::Eq4: return "Eq4";
    case Form::Eq5: return "Eq5";
    case Form::Eq6: return "Eq6";
  }
  return "Eq3";
}

Form form_from_string(std::string_view s) {
  if (s == "Eq3" || s == "3") return Form::Eq3;
  if (s == "Eq4" || s == "4") return Form::Eq4;
  if (s == "Eq5" || s == "5") return Form::Eq5;
  if (s == "Eq6" || s == "6") return Form::Eq6;
  throw Error(ErrorCode::UnknownForm,
              "unknown separation form '" + std::string(s) + "'");
}

Multiplier Multiplier::general(const ComplexMatrix& p, Eigen::Index n,
                               Eigen::Index m) {
  if (p.rows() != n + m || p.cols() != n + m || n < 1 || m < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "multiplier must be (n+m) x (n+m)");
  }
  require_finite(p, "P");
  if ((p - p.adjoint()).norm() > 1e-12 * std::max(1.0, p.norm())) {
    throw Error(ErrorCode::InvalidArgument, "multiplier must be Hermitian");
  }
  Multiplier out;
  out.P = hermitian_part(p);
  out.n = n;
  out.m = m;
  return out;
}

Multiplier Multiplier::phasal(const ComplexMatrix& h) {
  const Eigen::Index n = h.rows();
  const Eigen::Index m = h.cols();
  ComplexMatrix p = ComplexMatrix::Zero(n + m, n + m);
  p.topRightCorner(n, m) = h;
  p.bottomLeftCorner(m, n) = h.adjoint();
  Multiplier out = general(p, n, m);
  out.structure = Structure::Phasal;
  out.H = h;
  return out;
}

Multiplier Multiplier::rotation(Complex z, Eigen::Index n) {
  Multiplier out = phasal(z * ComplexMatrix::Identity(n, n));
  out.structure = Structure::Rotation;
  out.z = z;
  return out;
}

Multiplier Multiplier::gain(const ComplexMatrix& n_blk,
                            const ComplexMatrix& m_blk) {
  const Eigen::Index n = n_blk.rows();
  const Eigen::Index m = m_blk.rows();
  ComplexMatrix p = ComplexMatrix::Zero(n + m, n + m);
  p.topLeftCorner(n, n) = -n_blk;
  p.bottomRightCorner(m, m) = m_blk;
  Multiplier out = general(p, n, m);
  out.structure = Structure::Gain;
  out.N = hermitian_part(n_blk);
  out.M = hermitian_part(m_blk);
  return out;
}

Multiplier Multiplier::scaled_gain(double gamma_sq, int xi, Eigen::Index n,
                                   Eigen::Index m) {
  if (!(gamma_sq > 0.0) || (xi != 1 && xi != -1)) {
    throw Error(ErrorCode::NonPositiveParameter,
                "scaled gain needs gamma^2 > 0 and xi in {-1, 1}");
  }
  Multiplier out = gain(xi * gamma_sq * ComplexMatrix::Identity(n, n),
                        xi * ComplexMatrix::Identity(m, m));
  out.structure = Structure::ScaledGain;
  out.gamma_sq = gamma_sq;
  out.xi = xi;
  return out;
}

ComplexMatrix lhs_a(const ComplexMatrix& a, const ComplexMatrix& p) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  ComplexMatrix g(n + m, n);
  g.topRows(n) = ComplexMatrix::Identity(n, n);
  g.bottomRows(m) = -a;
  return hermitian_part(g.adjoint() * p * g);
}

ComplexMatrix lhs_b(const ComplexMatrix& b, const ComplexMatrix& p) {
  const Eigen::Index n = b.rows();
  const Eigen::Index m = b.cols();
  ComplexMatrix g(n + m, m);
  g.topRows(n) = b;
  g.bottomRows(m) = ComplexMatrix::Identity(m, m);
  return hermitian_part(g.adjoint() * p * g);
}

GraphSepResult graph_sep_check(const ComplexMatrix& a, const ComplexMatrix& b,
                               const Tolerances& tol) {
  check_pair(a, b);
  require_finite(a, "A");
  require_finite(b, "B");
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const ComplexMatrix ret = ComplexMatrix::Identity(m, m) + a * b;
  GraphSepResult out;
  out.det = ret.determinant();
  out.scale = hadamard_scale(a * b);
  out.separated = std::abs(out.det) > tol.det_zero_rel * out.scale;

  ComplexMatrix blk(n + m, n + m);
  blk.topLeftCorner(n, n) = ComplexMatrix::Identity(n, n);
  blk.topRightCorner(n, m) = -b;
  blk.bottomLeftCorner(m, n) = a;
  blk.bottomRightCorner(m, m) = ComplexMatrix::Identity(m, m);
  out.block_rank = numerical_rank(blk, tol.det_zero_rel);
  out.methods_agree = (out.block_rank == n + m) == out.separated;
  return out;
}

SeparationReport verify_multiplier(const ComplexMatrix& a,
                                   const ComplexMatrix& b, const Multiplier& p,
                                   Form form, std::optional<double> epsilon,
                                   const Tolerances& tol) {
  check_pair(a, b);
  if (p.n != a.cols() || p.m != a.rows() || p.P.rows() != p.n + p.m) {
    throw Error(ErrorCode::DimensionMismatch,
                "multiplier block sizes do not match (n, m) of A");
  }
  if (epsilon && !(*epsilon > 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter, "epsilon must be positive");
  }
  const ComplexMatrix neg_la = -lhs_a(a, p.P);
  const ComplexMatrix lb = lhs_b(b, p.P);
  const double eps_psd = tol.psd_margin;

  // Scales are the magnitudes of the quadratic forms themselves, so that a
  // slack that cancels to rounding level is judged against the inputs.
  const double p_norm = spectral_norm(p.P);
  const double na = spectral_norm(a);
  const double nb = spectral_norm(b);
  SeparationReport r;
  r.form = form;
  const Slack sa = slack(neg_la, p_norm * (1.0 + na * na));
  const Slack sb = slack(lb, p_norm * (1.0 + nb * nb));
  r.strict_A = sa.margin > eps_psd * sa.scale;
  r.strict_B = sb.margin > eps_psd * sb.scale;

  auto choose_eps = [&](const ComplexMatrix& x, const ComplexMatrix& y) {
    if (epsilon) return *epsilon;
    const double emax = max_feasible_ratio(x, y, eps_psd);
    r.epsilon_max = emax;
    if (std::isinf(emax)) return 1.0;
    return 0.5 * emax;
  };

  switch (form) {
    case Form::Eq3:
      r.margin_A = sa.margin;
      r.scale_A = sa.scale;
      r.margin_B = sb.margin;
      r.scale_B = sb.scale;
      r.pass = r.strict_A && sb.margin >= -eps_psd * sb.scale;
      break;
    case Form::Eq5:
      r.margin_A = sa.margin;
      r.scale_A = sa.scale;
      r.margin_B = sb.margin;
      r.scale_B = sb.scale;
      r.pass = sa.margin >= -eps_psd * sa.scale && r.strict_B;
      break;
    case Form::Eq4: {
      const ComplexMatrix aa = a.adjoint() * a;
      const double eps = choose_eps(neg_la, aa);
      r.epsilon = eps;
      const ComplexMatrix x = neg_la - eps * aa;
      const Slack s = slack(x, std::max(sa.scale, eps * spectral_norm(aa)));
      r.margin_A = s.margin;
      r.scale_A = s.scale;
      r.margin_B = sb.margin;
      r.scale_B = sb.scale;
      r.pass = eps > 0.0 && s.margin >= -eps_psd * s.scale &&
               sb.margin >= -eps_psd * sb.scale;
      break;
    }
    case Form::Eq6: {
      const ComplexMatrix bb = b.adjoint() * b;
      const double eps = choose_eps(lb, bb);
      r.epsilon = eps;
      const ComplexMatrix y = lb - eps * bb;
      const Slack s = slack(y, std::max(sb.scale, eps * spectral_norm(bb)));
      r.margin_A = sa.margin;
      r.scale_A = sa.scale;
      r.margin_B = s.margin;
      r.scale_B = s.scale;
      r.pass = eps > 0.0 && sa.margin >= -eps_psd * sa.scale &&
               s.margin >= -eps_psd * s.scale;
      break;
    }
  }
  if (r.epsilon_max && *r.epsilon_max == 0.0) r.pass = false;
  return r;
}

Conversion convert_form(const Multiplier& p, Form from, Form to,
                        const ComplexMatrix& a, const ComplexMatrix& b,
                        const Tolerances& tol) {
  SeparationReport src = verify_multiplier(a, b, p, from, std::nullopt, tol);
  if (!src.pass) {
    throw Error(ErrorCode::NotVerifiedForSource,
                "multiplier does not satisfy " + std::string(to_string(from)));
  }
  Conversion out{p, src, src.epsilon, src.epsilon_max};
  Form cur = from;
  while (cur != to) {
    const Form nxt = next_form(cur);
    const SeparationReport& cur_rep = out.report;
    Multiplier q = out.multiplier;
    switch (cur) {
      case Form::Eq3:
      case Form::Eq5:
        break;  // same P; the target form picks its own eps
      case Form::Eq4:
        q = shifted(out.multiplier, 0.0, *cur_rep.epsilon);
        out.epsilon = cur_rep.epsilon;
        out.epsilon_max = cur_rep.epsilon_max;
        break;
      case Form::Eq6:
        q = shifted(out.multiplier, -*cur_rep.epsilon, 0.0);
        out.epsilon = cur_rep.epsilon;
        out.epsilon_max = cur_rep.epsilon_max;
        break;
    }
    SeparationReport rep = verify_multiplier(a, b, q, nxt, std::nullopt, tol);
    if (!rep.pass) {
      throw Error(ErrorCode::ConversionFailsVerification,
                  "converted multiplier fails " + std::string(to_string(nxt)));
    }
    if (nxt == Form::Eq4 || nxt == Form::Eq6) {
      out.epsilon = rep.epsilon;
      out.epsilon_max = rep.epsilon_max;
    }
    out.multiplier = std::move(q);
    out.report = rep;
    cur = nxt;
  }
  return out;
}

}  // namespace robustmult
