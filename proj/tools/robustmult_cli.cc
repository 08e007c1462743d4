#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "robustmult/adversary.hpp"
#include "robustmult/io.hpp"
#include "robustmult/lti.hpp"
#include "robustmult/matcore.hpp"
#include "robustmult/phase.hpp"
#include "robustmult/separation.hpp"
#include "robustmult/synthesis.hpp"

namespace rm = robustmult;

namespace {

constexpr int kCertified = 0;
constexpr int kWitness = 1;
constexpr int kUndecided = 2;

struct Outcome {
  int exit_code = kUndecided;
  rm::Json body;
  std::optional<std::string> csv;
};

struct Settings {
  std::string problem_path;
  std::string output_path;
  std::string format = "json";
  std::string grid;
  std::string form;
  std::optional<double> epsilon;
  rm::ProblemOverrides overrides;
};

rm::Json error_json(const rm::Error& e) {
  rm::Json j{{"code", std::string(rm::to_string(e.code()))},
             {"message", e.what()}};
  if (e.value()) {
    j["value"] = rm::Json::array({rm::number_to_json(e.value()->real()),
                                  rm::number_to_json(e.value()->imag())});
  }
  if (e.omega()) j["omega"] = rm::number_to_json(*e.omega());
  if (e.undecided()) j["note"] = "Unknown: no verdict is known for this regime";
  return j;
}

Outcome undecided(const rm::Error& e) {
  return {kUndecided, rm::Json{{"verdict", "undecided"}, {"error", error_json(e)}},
          std::nullopt};
}

void parse_grid(const std::string& spec, rm::ProblemOverrides& ov) {
  if (spec.empty()) return;
  int points = 0;
  double lo = 0.0, hi = 0.0;
  if (std::sscanf(spec.c_str(), "%d:%lf:%lf", &points, &lo, &hi) == 3) {
    ov.grid_points = points;
    ov.grid_lo = lo;
    ov.grid_hi = hi;
  } else if (std::sscanf(spec.c_str(), "%d", &points) == 1) {
    ov.grid_points = points;
  } else {
    throw rm::Error(rm::ErrorCode::InvalidArgument,
                    "--grid expects POINTS or POINTS:LO:HI");
  }
}

void require_kind(const rm::ProblemFile& p, rm::ProblemKind kind) {
  if (p.kind != kind) {
    throw rm::Error(rm::ErrorCode::SchemaError,
                    kind == rm::ProblemKind::MatrixPair
                        ? "/kind: this command needs a matrix-pair problem"
                        : "/kind: this command needs an lti-pair problem");
  }
}

std::string_view accretivity_name(rm::AccretivityTag t) {
  switch (t) {
    case rm::AccretivityTag::StrictlyAccretive: return "StrictlyAccretive";
    case rm::AccretivityTag::QuasiStrictlyAccretive: return "QuasiStrictlyAccretive";
    case rm::AccretivityTag::Accretive: return "Accretive";
    case rm::AccretivityTag::None: return "None";
  }
  return "None";
}

rm::Json describe_matrix(const rm::ComplexMatrix& m, const rm::Tolerances& tol) {
  if (m.rows() != m.cols()) return rm::Json{{"square", false}};
  const rm::AccretivityClass acc = rm::accretivity_classify(m, tol);
  rm::Json j{{"square", true},
             {"accretivity", std::string(accretivity_name(acc.tag))},
             {"accretivity_margin", rm::number_to_json(acc.margin)}};
  try {
    j["phases"] = rm::to_json(rm::classify_and_phases(m, tol));
  } catch (const rm::Error& e) {
    j["phases"] = rm::Json{{"error", error_json(e)}};
  }
  return j;
}

Outcome cmd_classify(const rm::ProblemFile& p) {
  require_kind(p, rm::ProblemKind::MatrixPair);
  const rm::Tolerances& tol = p.options.tol;
  rm::Json body{{"verdict", "info"},
                {"A", describe_matrix(p.A, tol)},
                {"B", describe_matrix(p.B, tol)}};
  if (p.A.rows() == p.A.cols()) {
    try {
      const rm::PhaseSumVerdict v = rm::phase_sum_condition(p.A, p.B, tol);
      body["phase_sum"] = rm::Json{{"feasible", v.feasible},
                                   {"offset", v.offset},
                                   {"sum_max", rm::number_to_json(v.sum_max)},
                                   {"sum_min", rm::number_to_json(v.sum_min)},
                                   {"roles_ok", v.roles_ok}};
    } catch (const rm::Error& e) {
      body["phase_sum"] = rm::Json{{"error", error_json(e)}};
    }
  }
  const rm::GraphSepResult g = rm::graph_sep_check(p.A, p.B, tol);
  body["graph_separation"] =
      rm::Json{{"separated", g.separated},
               {"det", rm::Json::array({rm::number_to_json(g.det.real()),
                                        rm::number_to_json(g.det.imag())})},
               {"scale", rm::number_to_json(g.scale)},
               {"block_rank", g.block_rank},
               {"methods_agree", g.methods_agree}};
  return {kCertified, body, std::nullopt};
}

rm::UncertaintyClass class_for_family(const std::string& family) {
  if (family == "scaling") return rm::UncertaintyClass::Scaling;
  if (family == "congruence") return rm::UncertaintyClass::Congruence;
  if (family == "rotation") return rm::UncertaintyClass::Rotation;
  return rm::UncertaintyClass::Unitary;
}

bool means_destabilizable(rm::ErrorCode c) {
  switch (c) {
    case rm::ErrorCode::SpectrumOnNegativeRealAxis:
    case rm::ErrorCode::PhaseSumViolated:
    case rm::ErrorCode::ClassViolated:
    case rm::ErrorCode::UnitCircleEigenvalue:
    case rm::ErrorCode::NoGainCertificate:
      return true;
    default:
      return false;
  }
}

Outcome witness_outcome(const rm::ProblemFile& p, rm::UncertaintyClass cls,
                        const rm::Json& cause) {
  rm::FallbackOptions fb{p.options.budget, p.options.seed};
  try {
    const rm::Witness w = rm::destabilize(p.A, p.B, cls, p.options.tol, fb);
    rm::Json body{{"verdict", "destabilizable"}, {"witness", rm::to_json(w)}};
    if (!cause.is_null()) body["reason"] = cause;
    return {kWitness, body, std::nullopt};
  } catch (const rm::Error& e) {
    if (e.code() == rm::ErrorCode::ConditionHolds) {
      return {kCertified,
              rm::Json{{"verdict", "robust"},
                       {"note", "the robustness condition for this class holds"}},
              std::nullopt};
    }
    Outcome o = undecided(e);
    if (!cause.is_null()) o.body["reason"] = cause;
    return o;
  }
}

Outcome cmd_synth(const rm::ProblemFile& p, const std::string& family) {
  require_kind(p, rm::ProblemKind::MatrixPair);
  const rm::Tolerances& tol = p.options.tol;
  const bool real_mode = p.options.real_mode;
  try {
    rm::SynthesisResult r;
    if (family == "scaling") {
      r = rm::synth_phasal_scaling(p.A, p.B, real_mode, tol);
    } else if (family == "congruence") {
      r = rm::synth_phasal_congruence(p.A, p.B, real_mode, tol);
    } else if (family == "rotation") {
      r = rm::synth_gain_rotation(p.A, p.B, tol);
    } else {
      r = rm::synth_gain_unitary(p.A, p.B, tol);
    }
    // Re-verify the serialized certificate as a reader would.
    const rm::Json cert = rm::to_json(r);
    const rm::Multiplier reloaded =
        rm::multiplier_from_json(cert["multiplier"], "/multiplier");
    const rm::SeparationReport check =
        rm::verify_multiplier(p.A, p.B, reloaded, r.form, r.epsilon, tol);
    return {check.pass ? kCertified : kUndecided,
            rm::Json{{"verdict", check.pass ? "certified" : "undecided"},
                     {"certificate", cert},
                     {"reverified", rm::to_json(check)}},
            std::nullopt};
  } catch (const rm::Error& e) {
    if (means_destabilizable(e.code())) {
      return witness_outcome(p, class_for_family(family), error_json(e));
    }
    return undecided(e);
  }
}

Outcome cmd_verify(const rm::ProblemFile& p, const Settings& s) {
  require_kind(p, rm::ProblemKind::MatrixPair);
  if (!p.multiplier) {
    throw rm::Error(rm::ErrorCode::SchemaError, "/multiplier: missing field");
  }
  rm::Form form = rm::Form::Eq3;
  if (!s.form.empty()) {
    form = rm::form_from_string(s.form);
  } else if (p.form) {
    form = *p.form;
  }
  const std::optional<double> eps = s.epsilon ? s.epsilon : p.epsilon;
  const rm::SeparationReport r =
      rm::verify_multiplier(p.A, p.B, *p.multiplier, form, eps, p.options.tol);
  return {r.pass ? kCertified : kUndecided,
          rm::Json{{"verdict", r.pass ? "certified" : "not-verified"},
                   {"multiplier", rm::to_json(*p.multiplier)},
                   {"report", rm::to_json(r)}},
          std::nullopt};
}

Outcome cmd_destabilize(const rm::ProblemFile& p, const std::string& cls) {
  require_kind(p, rm::ProblemKind::MatrixPair);
  return witness_outcome(p, rm::uncertainty_class_from_string(cls), nullptr);
}

Outcome cmd_falsify(const rm::ProblemFile& p, const std::string& cls) {
  require_kind(p, rm::ProblemKind::MatrixPair);
  const rm::Witness w =
      rm::falsify_random(p.A, p.B, rm::uncertainty_class_from_string(cls),
                         p.options.budget, p.options.seed, p.options.tol);
  const bool hit = w.relative_det < p.options.tol.det_zero_rel;
  return {hit ? kWitness : kUndecided,
          rm::Json{{"verdict", hit ? "destabilizable" : "undecided"},
                   {"budget", p.options.budget},
                   {"best", rm::to_json(w)}},
          std::nullopt};
}

rm::Json loop_json(const rm::ProblemFile& p) {
  try {
    const rm::FeedbackVerdict v = rm::feedback_stable(p.G, p.K, p.options.tol);
    rm::Json poles = rm::Json::array();
    for (const rm::Complex& z : v.poles) {
      poles.push_back(rm::Json::array(
          {rm::number_to_json(z.real()), rm::number_to_json(z.imag())}));
    }
    return rm::Json{{"stable", v.stable},
                    {"spectral_abscissa", rm::number_to_json(v.spectral_abscissa)},
                    {"poles", poles}};
  } catch (const rm::Error& e) {
    return rm::Json{{"error", error_json(e)}};
  }
}

Outcome cmd_lti_sweep(const rm::ProblemFile& p, const std::string& family,
                      bool csv) {
  require_kind(p, rm::ProblemKind::LtiPair);
  const rm::LtiFamily fam = rm::lti_family_from_string(family);
  const rm::FrequencyGrid grid = p.options.grid.build();
  rm::Json body{{"feedback", loop_json(p)}};
  try {
    const rm::FrequencyCertificate c =
        rm::sweep_certificate(p.G, p.K, fam, grid, p.options.tol);
    body["certificate"] = rm::to_json(c);
    if (fam == rm::LtiFamily::RotationCongruenceEndpoints) {
      rm::Json ends = rm::Json::array();
      for (const rm::EndpointChoice& e :
           rm::endpoint_congruence_check(p.G, p.K, p.options.tol)) {
        ends.push_back(rm::Json{{"omega", rm::number_to_json(e.omega)},
                                {"sign", e.sign},
                                {"form", std::string(rm::to_string(e.form))}});
      }
      body["endpoints"] = ends;
    }
    body["verdict"] = c.pass ? "certified" : "undecided";
    Outcome o{c.pass ? kCertified : kUndecided, body, std::nullopt};
    if (csv) o.csv = rm::certificate_csv(c);
    return o;
  } catch (const rm::Error& e) {
    body["verdict"] = "undecided";
    body["error"] = error_json(e);
    return {kUndecided, body, std::nullopt};
  }
}

Outcome cmd_lti_necessity(const rm::ProblemFile& p, bool csv) {
  require_kind(p, rm::ProblemKind::LtiPair);
  const rm::FrequencyGrid grid = p.options.grid.build();
  rm::Json body{{"feedback", loop_json(p)}};
  try {
    const rm::FrequencyCertificate c =
        rm::necessity_multiplier(p.G, p.K, grid, p.options.tol);
    body["verdict"] = c.pass ? "certified" : "undecided";
    body["certificate"] = rm::to_json(c);
    Outcome o{c.pass ? kCertified : kUndecided, body, std::nullopt};
    if (csv) o.csv = rm::certificate_csv(c);
    return o;
  } catch (const rm::Error& e) {
    const bool unstable = e.code() == rm::ErrorCode::FeedbackUnstable;
    body["verdict"] = unstable ? "unstable" : "undecided";
    body["error"] = error_json(e);
    return {unstable ? kWitness : kUndecided, body, std::nullopt};
  }
}

int emit(const Outcome& o, const Settings& s, const std::string& command,
         std::uint64_t seed) {
  std::string text;
  if (s.format == "csv") {
    if (!o.csv) {
      std::cerr << "robustmult: no CSV output for this result\n";
      std::cerr << o.body.dump(2) << "\n";
      return o.exit_code == kCertified ? kUndecided : o.exit_code;
    }
    text = *o.csv;
  } else {
    text = rm::make_report(command, seed, o.body).dump(2) + "\n";
  }
  if (s.output_path.empty()) {
    std::cout << text;
  } else {
    rm::write_text_file(s.output_path, text);
  }
  return o.exit_code;
}

void add_common(CLI::App* cmd, Settings& s) {
  cmd->add_option("problem", s.problem_path, "Problem file (JSON)")->required();
  cmd->add_option("-o,--output", s.output_path, "Write the report here");
  cmd->add_option("--format", s.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", s.overrides.seed, "Random seed");
  cmd->add_option("--budget", s.overrides.budget, "Random-search budget");
  cmd->add_option("--grid", s.grid, "POINTS or POINTS:LO:HI");
  cmd->add_option("--tol-psd-margin", s.overrides.psd_margin);
  cmd->add_option("--tol-rank-rel", s.overrides.rank_rel);
  cmd->add_option("--tol-det-zero-rel", s.overrides.det_zero_rel);
  cmd->add_option("--tol-eig-cond-max", s.overrides.eig_cond_max);
  cmd->add_flag("--real-mode", s.overrides.real_mode,
                "Restrict multipliers to real data");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured multipliers, robustness certificates and "
               "destabilizing witnesses"};
  app.require_subcommand(1);
  Settings s;
  std::string family;

  auto* classify = app.add_subcommand("classify", "Phases and accretivity of A and B");
  add_common(classify, s);
  auto* synth = app.add_subcommand("synth", "Synthesize a multiplier");
  synth->add_option("family", family, "scaling, congruence, rotation or unitary")
      ->required()
      ->check(CLI::IsMember({"scaling", "congruence", "rotation", "unitary"}));
  add_common(synth, s);
  auto* verify = app.add_subcommand("verify", "Verify the multiplier in the problem file");
  add_common(verify, s);
  verify->add_option("--form", s.form, "Eq3, Eq4, Eq5 or Eq6");
  verify->add_option("--epsilon", s.epsilon, "Slack for Eq4 and Eq6");
  auto* destab = app.add_subcommand("destabilize", "Construct a destabilizing perturbation");
  destab->add_option("class", family, "scaling, rotation, congruence or unitary")
      ->required();
  add_common(destab, s);
  auto* falsify = app.add_subcommand("falsify", "Seeded random search for a witness");
  falsify->add_option("class", family, "scaling, rotation, congruence or unitary")
      ->required();
  add_common(falsify, s);
  auto* sweep = app.add_subcommand("lti-sweep", "Frequency-wise certificate sweep");
  sweep->add_option("family", family,
                    "phasal-scaling, rotation-congruence-endpoints, gain-rotation, "
                    "scaled-gain-unitary, passivity, small-gain or necessity")
      ->required();
  add_common(sweep, s);
  auto* necessity = app.add_subcommand("lti-necessity", "Necessity multiplier for a stable loop");
  add_common(necessity, s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUndecided;
  }

  CLI::App* cmd = app.get_subcommands().front();
  std::string command = cmd->get_name();
  if (!family.empty()) command += " " + family;
  std::uint64_t seed = 1;
  try {
    parse_grid(s.grid, s.overrides);
    const rm::ProblemFile p = rm::load_problem(s.problem_path, s.overrides);
    seed = p.options.seed;
    const bool csv = s.format == "csv";
    Outcome o;
    if (cmd == classify) o = cmd_classify(p);
    else if (cmd == synth) o = cmd_synth(p, family);
    else if (cmd == verify) o = cmd_verify(p, s);
    else if (cmd == destab) o = cmd_destabilize(p, family);
    else if (cmd == falsify) o = cmd_falsify(p, family);
    else if (cmd == sweep) o = cmd_lti_sweep(p, family, csv);
    else o = cmd_lti_necessity(p, csv);
    return emit(o, s, command, seed);
  } catch (const rm::Error& e) {
    std::cerr << "robustmult: " << e.what() << "\n";
    if (s.format == "json") {
      try {
        const std::string text =
            rm::make_report(command, seed,
                            rm::Json{{"verdict", "error"}, {"error", error_json(e)}})
                .dump(2) + "\n";
        if (s.output_path.empty()) std::cout << text;
        else rm::write_text_file(s.output_path, text);
      } catch (const rm::Error&) {
      }
    }
    return kUndecided;
  }
}
