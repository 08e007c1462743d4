#include "robustmult/lti.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "robustmult/matcore.hpp"
#include "robustmult/synthesis.hpp"

namespace robustmult {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string omega_label(double omega) {
  if (std::isinf(omega)) return "inf";
  std::ostringstream os;
  os.precision(6);
  os << omega;
  return os.str();
}

void require_loop_dims(const StateSpace& g, const StateSpace& k) {
  g.validate();
  k.validate();
  if (k.inputs() != g.outputs() || k.outputs() != g.inputs()) {
    throw Error(ErrorCode::DimensionMismatch,
                "K must map the outputs of G back to its inputs");
  }
}

bool is_hermitian(const ComplexMatrix& p) {
  return (p - p.adjoint()).norm() <= 1e-12 * std::max(1.0, p.norm());
}

// omega / (1 + omega), mapping [0, inf] onto [0, 1].
double compactify(double omega) {
  return std::isinf(omega) ? 1.0 : omega / (1.0 + omega);
}

void finalize(FrequencyCertificate& cert) {
  std::vector<double> jumps;
  for (std::size_t k = 1; k < cert.samples.size(); ++k) {
    FrequencySample& cur = cert.samples[k];
    const FrequencySample& prev = cert.samples[k - 1];
    const ComplexMatrix& p1 = cur.pi.P;
    const ComplexMatrix& p0 = prev.pi.P;
    const double denom = std::max({p1.norm(), p0.norm(), 1e-300});
    const double dt = compactify(cur.omega) - compactify(prev.omega);
    cur.jump = dt > 0.0 ? (p1 - p0).norm() / denom / dt : 0.0;
    jumps.push_back(cur.jump);
  }
  cert.max_jump = 0.0;
  cert.median_jump = 0.0;
  if (!jumps.empty()) {
    cert.max_jump = *std::max_element(jumps.begin(), jumps.end());
    std::vector<double> sorted = jumps;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    cert.median_jump = sorted[sorted.size() / 2];
  }
  cert.discontinuity_suspect =
      cert.max_jump > 10.0 * cert.median_jump && cert.max_jump > 1e-9;
  cert.pass = std::all_of(cert.samples.begin(), cert.samples.end(),
                          [](const FrequencySample& s) { return s.report.pass; });
  if (!cert.note.empty()) cert.note += "; ";
  cert.note += "verified on " + std::to_string(cert.samples.size()) +
               " sampled frequencies including 0 and infinity";
}

struct Responses {
  std::vector<ComplexMatrix> g, k;
};

Responses evaluate(const StateSpace& g, const StateSpace& k,
                   const FrequencyGrid& grid, const Tolerances& tol) {
  Responses r;
  r.g.reserve(grid.size());
  r.k.reserve(grid.size());
  for (double w : grid.omegas) {
    r.g.push_back(freq_response(g, w, tol));
    r.k.push_back(freq_response(k, w, tol));
  }
  return r;
}

Error at_omega(ErrorCode code, double omega, const std::string& what) {
  Error e(code, "omega = " + omega_label(omega) + ": " + what);
  e.with_omega(omega);
  return e;
}

double wrap_angle(double x) {
  x = std::remainder(x, 2.0 * kPi);
  return x <= -kPi ? x + 2.0 * kPi : x;
}

// An eigenvalue of G K crossing the negative real axis between two samples
// shifts the sum of principal eigenvalue arguments by 2 pi while arg det(G K)
// moves continuously. Returns the later frequency of the first such pair.
// Pairs with a (near) zero eigenvalue are skipped.
std::optional<double> negative_axis_crossing(const Responses& r,
                                             const FrequencyGrid& grid,
                                             const Tolerances& tol) {
  std::optional<double> prev_sum, prev_det;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ComplexMatrix p = r.g[i] * r.k[i];
    const ComplexVector ev =
        Eigen::ComplexEigenSolver<ComplexMatrix>(p, false).eigenvalues();
    const double floor = tol.rank_rel * std::max(1.0, spectral_norm(p));
    double sum = 0.0, det = 0.0;
    bool usable = true;
    for (Eigen::Index j = 0; j < ev.size(); ++j) {
      if (std::abs(ev(j)) <= floor) usable = false;
      sum += std::arg(ev(j));
    }
    if (!usable) {
      prev_sum.reset();
      prev_det.reset();
      continue;
    }
    det = wrap_angle(sum);
    if (prev_sum) {
      const double drift = (sum - *prev_sum) - wrap_angle(det - *prev_det);
      if (std::abs(drift) > kPi) return grid.omegas[i];
    }
    prev_sum = sum;
    prev_det = det;
  }
  return std::nullopt;
}

// First passing form among Eq3, Eq6, Eq4, Eq5; the Eq3 report otherwise.
SeparationReport best_form(const ComplexMatrix& g, const ComplexMatrix& k,
                           const Multiplier& p, const Tolerances& tol) {
  SeparationReport first;
  bool have_first = false;
  for (Form f : {Form::Eq3, Form::Eq6, Form::Eq4, Form::Eq5}) {
    SeparationReport r = verify_multiplier(g, k, p, f, std::nullopt, tol);
    if (r.pass) return r;
    if (!have_first) {
      first = r;
      have_first = true;
    }
  }
  return first;
}

FrequencySample from_synthesis(double omega, const SynthesisResult& r) {
  FrequencySample s;
  s.omega = omega;
  s.pi = r.multiplier;
  s.report = r.report;
  s.epsilon = r.epsilon;
  if (r.multiplier.structure == Structure::ScaledGain) {
    s.gamma_sq = r.multiplier.gamma_sq;
    s.xi = r.multiplier.xi;
  }
  return s;
}

// Rotation multiplier at one frequency; zero blocks admit z = 1 directly.
SynthesisResult rotation_at(const ComplexMatrix& g, const ComplexMatrix& k,
                            bool real_mode, const Tolerances& tol) {
  try {
    return synth_phasal_congruence(g, k, real_mode, tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroMatrix) throw;
  }
  SynthesisResult r;
  r.multiplier = Multiplier::rotation(1.0, g.cols());
  r.form = Form::Eq4;
  r.report = verify_multiplier(g, k, r.multiplier, Form::Eq4, std::nullopt, tol);
  r.epsilon = r.report.epsilon;
  return r;
}

double top_singular_value(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : spectral_norm(a);
}

}  // namespace

void StateSpace::validate() const {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n ||
      C.rows() != D.rows() || B.cols() != D.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "state-space blocks have inconsistent dimensions");
  }
  if (D.rows() < 1 || D.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "system needs at least one input and one output");
  }
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
    throw Error(ErrorCode::NonFinite, "state-space data contains NaN or Inf");
  }
}

StateSpace StateSpace::make(const RealMatrix& a, const RealMatrix& b,
                            const RealMatrix& c, const RealMatrix& d) {
  StateSpace s{a, b, c, d};
  s.validate();
  return s;
}

StateSpace StateSpace::gain(const RealMatrix& d) {
  return make(RealMatrix(0, 0), RealMatrix(0, d.cols()),
              RealMatrix(d.rows(), 0), d);
}

double spectral_abscissa(const RealMatrix& a) {
  if (a.rows() == 0) return -kInf;
  Eigen::EigenSolver<RealMatrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_rhinf(const StateSpace& sys, const Tolerances& tol) {
  sys.validate();
  if (sys.states() == 0) return true;
  const double scale = std::max(1.0, sys.A.norm());
  return spectral_abscissa(sys.A) < -tol.psd_margin * scale;
}

StateSpace series(const StateSpace& lhs, const StateSpace& rhs) {
  lhs.validate();
  rhs.validate();
  if (lhs.inputs() != rhs.outputs()) {
    throw Error(ErrorCode::DimensionMismatch,
                "series connection needs matching inner dimensions");
  }
  const Eigen::Index n1 = rhs.states();
  const Eigen::Index n2 = lhs.states();
  RealMatrix a = RealMatrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = rhs.A;
  a.bottomLeftCorner(n2, n1) = lhs.B * rhs.C;
  a.bottomRightCorner(n2, n2) = lhs.A;
  RealMatrix b(n1 + n2, rhs.inputs());
  b.topRows(n1) = rhs.B;
  b.bottomRows(n2) = lhs.B * rhs.D;
  RealMatrix c(lhs.outputs(), n1 + n2);
  c.leftCols(n1) = lhs.D * rhs.C;
  c.rightCols(n2) = lhs.C;
  return StateSpace::make(a, b, c, lhs.D * rhs.D);
}

StateSpace scaled(const StateSpace& sys, double tau) {
  return StateSpace::make(sys.A, sys.B, tau * sys.C, tau * sys.D);
}

StateSpace inverse_system(const StateSpace& sys, const Tolerances& tol) {
  sys.validate();
  if (sys.inputs() != sys.outputs()) {
    throw Error(ErrorCode::IllPosed, "only square systems can be inverted");
  }
  Eigen::FullPivLU<RealMatrix> lu(sys.D);
  lu.setThreshold(tol.rank_rel);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::IllPosed, "feedthrough matrix D is singular");
  }
  const RealMatrix dinv = lu.inverse();
  return StateSpace::make(sys.A - sys.B * dinv * sys.C, sys.B * dinv,
                          -dinv * sys.C, dinv);
}

StateSpace allpass_first_order(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw Error(ErrorCode::NonPositiveParameter,
                "all-pass parameter must be positive and finite");
  }
  // (a - s) / (a + s) = -1 + 2a / (s + a)
  return StateSpace::make(RealMatrix::Constant(1, 1, -a),
                          RealMatrix::Ones(1, 1),
                          RealMatrix::Constant(1, 1, 2.0 * a),
                          RealMatrix::Constant(1, 1, -1.0));
}

FrequencyGrid FrequencyGrid::log_spaced(int points, double lo, double hi) {
  if (points < 1 || !(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidArgument,
                "grid needs points >= 1 and 0 < lo < hi < inf");
  }
  FrequencyGrid g;
  g.omegas.reserve(points + 2);
  g.omegas.push_back(0.0);
  const double l0 = std::log10(lo);
  const double l1 = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    g.omegas.push_back(std::pow(10.0, l0 + t * (l1 - l0)));
  }
  g.omegas.push_back(kInf);
  return g;
}

void FrequencyGrid::validate() const {
  if (omegas.size() < 2 || omegas.front() != 0.0 || !std::isinf(omegas.back())) {
    throw Error(ErrorCode::InvalidArgument,
                "frequency grid must start at 0 and end at infinity");
  }
  for (std::size_t i = 1; i < omegas.size(); ++i) {
    if (!(omegas[i] > omegas[i - 1]) || std::isnan(omegas[i])) {
      throw Error(ErrorCode::InvalidArgument,
                  "frequency grid must be strictly increasing");
    }
  }
}

ComplexMatrix freq_response(const StateSpace& sys, double omega,
                            const Tolerances& tol) {
  sys.validate();
  const ComplexMatrix d = sys.D.cast<Complex>();
  if (std::isinf(omega) || sys.states() == 0) return d;
  ComplexMatrix res = -sys.A.cast<Complex>();
  res.diagonal().array() += Complex(0.0, omega);
  Eigen::PartialPivLU<ComplexMatrix> lu(res);
  if (!(lu.rcond() > tol.rank_rel * 1e-6)) {
    throw Error(ErrorCode::ResolventSingular,
                "j omega is (numerically) an eigenvalue of the state matrix",
                Complex(0.0, omega));
  }
  return sys.C.cast<Complex>() * lu.solve(sys.B.cast<Complex>()) + d;
}

FeedbackVerdict feedback_stable(const StateSpace& g, const StateSpace& k,
                                const Tolerances& tol) {
  require_loop_dims(g, k);
  if (!is_rhinf(g, tol)) {
    throw Error(ErrorCode::OpenLoopUnstable, "G is not in RH-infinity");
  }
  if (!is_rhinf(k, tol)) {
    throw Error(ErrorCode::OpenLoopUnstable, "K is not in RH-infinity");
  }
  // e = r - y_G, u_K = e, u_G = y_K; E = (I + D_G D_K)^{-1}.
  const Eigen::Index m = g.outputs();
  const RealMatrix id = RealMatrix::Identity(m, m);
  Eigen::FullPivLU<RealMatrix> lu(id + g.D * k.D);
  lu.setThreshold(tol.rank_rel);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::IllPosed, "I + D_G D_K is singular");
  }
  const RealMatrix e = lu.inverse();
  const Eigen::Index ng = g.states();
  const Eigen::Index nk = k.states();
  RealMatrix open = RealMatrix::Zero(ng + nk, ng + nk);
  open.topLeftCorner(ng, ng) = g.A;
  open.topRightCorner(ng, nk) = g.B * k.C;
  open.bottomRightCorner(nk, nk) = k.A;
  RealMatrix inject(ng + nk, m);
  inject.topRows(ng) = g.B * k.D;
  inject.bottomRows(nk) = k.B;
  RealMatrix measure(m, ng + nk);
  measure.leftCols(ng) = -g.C;
  measure.rightCols(nk) = -g.D * k.C;

  FeedbackVerdict v;
  v.closed_loop_A = open + inject * e * measure;
  if (v.closed_loop_A.rows() == 0) {
    v.stable = true;
    v.spectral_abscissa = -kInf;
    return v;
  }
  Eigen::EigenSolver<RealMatrix> es(v.closed_loop_A, false);
  const Eigen::VectorXcd ev = es.eigenvalues();
  v.poles.assign(ev.data(), ev.data() + ev.size());
  v.spectral_abscissa = ev.real().maxCoeff();
  const double scale = std::max(1.0, v.closed_loop_A.norm());
  v.stable = v.spectral_abscissa < -tol.psd_margin * scale;
  return v;
}

std::string_view to_string(LtiFamily f) {
  switch (f) {
    case LtiFamily::PhasalScaling: return "phasal-scaling";
    case LtiFamily::RotationCongruenceEndpoints:
      return "rotation-congruence-endpoints";
    case LtiFamily::GainRotation: return "gain-rotation";
    case LtiFamily::ScaledGainUnitary: return "scaled-gain-unitary";
    case LtiFamily::Passivity: return "passivity";
    case LtiFamily::SmallGain: return "small-gain";
    case LtiFamily::Necessity: return "necessity";
    case LtiFamily::Custom: return "custom";
  }
  return "custom";
}

LtiFamily lti_family_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (LtiFamily f :
       {LtiFamily::PhasalScaling, LtiFamily::RotationCongruenceEndpoints,
        LtiFamily::GainRotation, LtiFamily::ScaledGainUnitary,
        LtiFamily::Passivity, LtiFamily::SmallGain, LtiFamily::Necessity,
        LtiFamily::Custom}) {
    if (lower == to_string(f)) return f;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown LTI family '" + std::string(s) + "'");
}

FrequencyCertificate check_iqc_sufficient(const StateSpace& g,
                                          const StateSpace& k,
                                          const MultiplierProvider& pi,
                                          SignMode mode,
                                          const FrequencyGrid& grid,
                                          const Tolerances& tol) {
  require_loop_dims(g, k);
  grid.validate();
  if (mode == SignMode::Flipped) {
    if (g.inputs() != g.outputs()) {
      throw Error(ErrorCode::InverseNotInRHinf,
                  "flipped signs need square G and K");
    }
    for (const StateSpace* s : {&g, &k}) {
      const char* name = s == &g ? "G" : "K";
      try {
        if (!is_rhinf(inverse_system(*s, tol), tol)) {
          throw Error(ErrorCode::InverseNotInRHinf,
                      std::string(name) + "^{-1} is not in RH-infinity");
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::InverseNotInRHinf) throw;
        throw Error(ErrorCode::InverseNotInRHinf,
                    std::string(name) + "^{-1} is not proper: " + e.what());
      }
    }
  }
  const Eigen::Index n = g.inputs();
  const Eigen::Index m = g.outputs();
  FrequencyCertificate cert;
  cert.family = LtiFamily::Custom;
  for (double w : grid.omegas) {
    const Multiplier p = pi(w);
    if (p.P.rows() != n + m || p.P.cols() != n + m) {
      throw at_omega(ErrorCode::DimensionMismatch, w,
                     "multiplier has the wrong size");
    }
    if (!is_hermitian(p.P)) {
      throw at_omega(ErrorCode::InvalidArgument, w,
                     "multiplier is not Hermitian");
    }
    const double thr = tol.psd_margin * std::max(1.0, spectral_norm(p.P));
    const ComplexMatrix p11 = p.P.topLeftCorner(n, n);
    const ComplexMatrix p22 = p.P.bottomRightCorner(m, m);
    const double sgn = mode == SignMode::Standard ? 1.0 : -1.0;
    if (max_hermitian_eigenvalue(sgn * p11) > thr) {
      throw at_omega(ErrorCode::SignConditionViolated, w,
                     mode == SignMode::Standard ? "Pi_11 is not <= 0"
                                                : "Pi_11 is not >= 0");
    }
    if (min_hermitian_eigenvalue(sgn * p22) < -thr) {
      throw at_omega(ErrorCode::SignConditionViolated, w,
                     mode == SignMode::Standard ? "Pi_22 is not >= 0"
                                                : "Pi_22 is not <= 0");
    }
    FrequencySample s;
    s.omega = w;
    s.pi = p;
    s.report = best_form(freq_response(g, w, tol), freq_response(k, w, tol),
                         p, tol);
    s.epsilon = s.report.epsilon;
    cert.samples.push_back(std::move(s));
  }
  cert.note = mode == SignMode::Standard ? "standard sign conditions"
                                         : "flipped sign conditions";
  finalize(cert);
  return cert;
}

FrequencyCertificate necessity_multiplier(const StateSpace& g,
                                          const StateSpace& k,
                                          const FrequencyGrid& grid,
                                          const Tolerances& tol) {
  require_loop_dims(g, k);
  grid.validate();
  const FeedbackVerdict fb = feedback_stable(g, k, tol);
  if (!fb.stable) {
    throw Error(ErrorCode::FeedbackUnstable,
                "closed loop is unstable (spectral abscissa " +
                    std::to_string(fb.spectral_abscissa) + ")");
  }
  const Responses r = evaluate(g, k, grid, tol);
  const Eigen::Index n = g.inputs();
  const Eigen::Index m = g.outputs();
  const ComplexMatrix id = ComplexMatrix::Identity(n + m, n + m);

  for (double eps = 0.5; eps >= 1e-14; eps *= 0.5) {
    FrequencyCertificate cert;
    cert.family = LtiFamily::Necessity;
    cert.epsilon = eps;
    bool ok = true;
    for (std::size_t i = 0; i < grid.size() && ok; ++i) {
      ComplexMatrix stack(n + m, m);
      stack.topRows(n) = r.g[i].adjoint();
      stack.bottomRows(m) = ComplexMatrix::Identity(m, m);
      const ComplexMatrix p = stack * stack.adjoint() - eps * id;
      FrequencySample s;
      s.omega = grid.omegas[i];
      s.pi = Multiplier::general(p, n, m);
      s.report = verify_multiplier(r.g[i], r.k[i], s.pi, Form::Eq3,
                                   std::nullopt, tol);
      s.epsilon = eps;
      ok = s.report.pass;
      cert.samples.push_back(std::move(s));
    }
    if (ok) {
      cert.note = "Pi = [G*; I][G, I] - eps I";
      finalize(cert);
      return cert;
    }
  }
  throw Error(ErrorCode::EpsilonUnderflow,
              "no eps >= 1e-14 satisfies both inequalities on the grid");
}

FrequencyCertificate sweep_certificate(const StateSpace& g,
                                       const StateSpace& k, LtiFamily family,
                                       const FrequencyGrid& grid,
                                       const Tolerances& tol) {
  require_loop_dims(g, k);
  grid.validate();
  if (family == LtiFamily::Necessity) {
    return necessity_multiplier(g, k, grid, tol);
  }
  if (family == LtiFamily::Custom) {
    throw Error(ErrorCode::InvalidArgument,
                "custom multipliers go through check_iqc_sufficient");
  }
  if (!is_rhinf(g, tol) || !is_rhinf(k, tol)) {
    throw Error(ErrorCode::OpenLoopUnstable, "G and K must be in RH-infinity");
  }
  const bool square = g.inputs() == g.outputs();
  if (!square && family != LtiFamily::GainRotation &&
      family != LtiFamily::ScaledGainUnitary &&
      family != LtiFamily::SmallGain) {
    throw Error(ErrorCode::PreconditionViolatedAtOmega,
                std::string(to_string(family)) + " needs square G and K");
  }
  const Responses r = evaluate(g, k, grid, tol);
  const Eigen::Index n = g.inputs();
  const Eigen::Index m = g.outputs();
  FrequencyCertificate cert;
  cert.family = family;

  if (family == LtiFamily::SmallGain) {
    double gg = 0.0, gk = 0.0, worst = -1.0, worst_w = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double a = top_singular_value(r.g[i]);
      const double b = top_singular_value(r.k[i]);
      gg = std::max(gg, a);
      gk = std::max(gk, b);
      if (a * b > worst) {
        worst = a * b;
        worst_w = grid.omegas[i];
      }
    }
    if (!(gg * gk < 1.0 - tol.psd_margin)) {
      throw at_omega(ErrorCode::PerFrequencyFailure, worst_w,
                     "sampled sup gains multiply to " +
                         std::to_string(gg * gk) + " >= 1");
    }
    double gamma;
    if (gg > 0.0 && gk > 0.0) {
      gamma = std::sqrt(gg / gk);
    } else if (gk > 0.0) {
      gamma = 0.5 / gk;
    } else {
      gamma = gg > 0.0 ? 2.0 * gg : 1.0;
    }
    const Multiplier p = Multiplier::scaled_gain(gamma * gamma, 1, n, m);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      FrequencySample s;
      s.omega = grid.omegas[i];
      s.pi = p;
      s.report = verify_multiplier(r.g[i], r.k[i], p, Form::Eq3,
                                   std::nullopt, tol);
      s.gamma_sq = gamma * gamma;
      s.xi = 1;
      cert.samples.push_back(std::move(s));
    }
    cert.xi = 1;
    cert.note = "sup sigma_1(G) = " + std::to_string(gg) +
                ", sup sigma_1(K) = " + std::to_string(gk);
    finalize(cert);
    return cert;
  }

  if (family == LtiFamily::Passivity) {
    const Multiplier p = Multiplier::rotation(1.0, n);
    double eps_min = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      FrequencySample s;
      s.omega = grid.omegas[i];
      s.pi = p;
      s.report = verify_multiplier(r.g[i], r.k[i], p, Form::Eq4,
                                   std::nullopt, tol);
      if (!s.report.pass) {
        throw at_omega(ErrorCode::PerFrequencyFailure, s.omega,
                       "G is not output strictly passive or K is not passive");
      }
      s.epsilon = s.report.epsilon_max;
      if (s.report.epsilon_max) eps_min = std::min(eps_min, *s.report.epsilon_max);
      cert.samples.push_back(std::move(s));
    }
    if (std::isfinite(eps_min)) cert.epsilon = eps_min;
    cert.note = "G + G* >= eps G*G with eps = min over the grid";
    finalize(cert);
    return cert;
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid.omegas[i];
    const bool endpoint = w == 0.0 || std::isinf(w);
    try {
      SynthesisResult res;
      switch (family) {
        case LtiFamily::PhasalScaling:
          res = synth_phasal_scaling(r.g[i], r.k[i], false, tol);
          break;
        case LtiFamily::RotationCongruenceEndpoints:
          res = rotation_at(r.g[i], r.k[i], endpoint, tol);
          break;
        case LtiFamily::GainRotation:
          res = synth_gain_rotation(r.g[i], r.k[i], tol);
          break;
        case LtiFamily::ScaledGainUnitary:
          res = synth_gain_unitary(r.g[i], r.k[i], tol);
          break;
        default:
          break;
      }
      cert.samples.push_back(from_synthesis(w, res));
    } catch (const Error& e) {
      throw at_omega(ErrorCode::PerFrequencyFailure, w, e.what());
    }
  }

  if (family == LtiFamily::PhasalScaling) {
    if (const auto w = negative_axis_crossing(r, grid, tol)) {
      throw at_omega(ErrorCode::PerFrequencyFailure, *w,
                     "an eigenvalue of G K crosses the negative real axis "
                     "between this and the previous sample");
    }
  }

  if (family == LtiFamily::ScaledGainUnitary) {
    const int xi0 = *cert.samples.front().xi;
    for (const FrequencySample& s : cert.samples) {
      if (*s.xi != xi0) {
        throw at_omega(ErrorCode::XiInconsistent, s.omega,
                       "xi changes sign across the grid");
      }
    }
    cert.xi = xi0;
  }
  finalize(cert);
  return cert;
}

std::vector<EndpointChoice> endpoint_congruence_check(const StateSpace& g,
                                                      const StateSpace& k,
                                                      const Tolerances& tol) {
  require_loop_dims(g, k);
  if (g.inputs() != g.outputs()) {
    throw Error(ErrorCode::NonSquare, "congruence needs square G and K");
  }
  const Eigen::Index n = g.inputs();
  std::vector<EndpointChoice> out;
  for (double w : {0.0, kInf}) {
    const ComplexMatrix gw = freq_response(g, w, tol).real().cast<Complex>();
    const ComplexMatrix kw = freq_response(k, w, tol).real().cast<Complex>();
    bool found = false;
    for (int sign : {1, -1}) {
      const Multiplier p = Multiplier::rotation(static_cast<double>(sign), n);
      for (Form f : {Form::Eq4, Form::Eq6}) {
        SeparationReport rep = verify_multiplier(gw, kw, p, f, std::nullopt, tol);
        if (rep.pass) {
          out.push_back({w, sign, f, rep});
          found = true;
          break;
        }
      }
      if (found) break;
    }
    if (!found) {
      throw at_omega(ErrorCode::EndpointInfeasible, w,
                     "neither +[[0, I], [I, 0]] nor -[[0, I], [I, 0]] separates "
                     "G and K");
    }
  }
  return out;
}

}  // namespace robustmult
