#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "robustmult/io.hpp"

namespace robustmult {
namespace {

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, (path.empty() ? "/" : path) + ": " + what);
}

std::string child(const std::string& path, const std::string& key) {
  return path + "/" + key;
}

const Json& require(const Json& j, const std::string& key,
                    const std::string& path) {
  if (!j.is_object()) schema(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema(child(path, key), "missing field");
  return *it;
}

Json optional_number(const std::optional<double>& x) {
  return x ? number_to_json(*x) : Json(nullptr);
}

std::optional<double> optional_from_json(const Json& j, const std::string& key,
                                         const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return number_from_json(*it, child(path, key));
}

bool bool_from_json(const Json& j, const std::string& key,
                    const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_boolean()) schema(child(path, key), "expected a boolean");
  return v.get<bool>();
}

std::string string_from_json(const Json& j, const std::string& key,
                             const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_string()) schema(child(path, key), "expected a string");
  return v.get<std::string>();
}

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Json to_json(const SeparationReport& r) {
  return Json{{"form", std::string(to_string(r.form))},
              {"margin_A", number_to_json(r.margin_A)},
              {"margin_B", number_to_json(r.margin_B)},
              {"scale_A", number_to_json(r.scale_A)},
              {"scale_B", number_to_json(r.scale_B)},
              {"epsilon", optional_number(r.epsilon)},
              {"epsilon_max", optional_number(r.epsilon_max)},
              {"strict_A", r.strict_A},
              {"strict_B", r.strict_B},
              {"pass", r.pass}};
}

SeparationReport separation_report_from_json(const Json& j,
                                             const std::string& path) {
  SeparationReport r;
  try {
    r.form = form_from_string(string_from_json(j, "form", path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema(child(path, "form"), e.what());
  }
  r.margin_A = number_from_json(require(j, "margin_A", path), child(path, "margin_A"));
  r.margin_B = number_from_json(require(j, "margin_B", path), child(path, "margin_B"));
  r.scale_A = number_from_json(require(j, "scale_A", path), child(path, "scale_A"));
  r.scale_B = number_from_json(require(j, "scale_B", path), child(path, "scale_B"));
  r.epsilon = optional_from_json(j, "epsilon", path);
  r.epsilon_max = optional_from_json(j, "epsilon_max", path);
  r.strict_A = bool_from_json(j, "strict_A", path);
  r.strict_B = bool_from_json(j, "strict_B", path);
  r.pass = bool_from_json(j, "pass", path);
  return r;
}

Json to_json(const SynthesisResult& r) {
  Json log = Json::array();
  for (const LogItem& item : r.log) {
    log.push_back(Json{{"name", item.name},
                       {"value", complex_matrix_to_json(item.value)}});
  }
  return Json{{"multiplier", to_json(r.multiplier)},
              {"form", std::string(to_string(r.form))},
              {"epsilon", optional_number(r.epsilon)},
              {"report", to_json(r.report)},
              {"strict_report",
               r.strict_report ? to_json(*r.strict_report) : Json(nullptr)},
              {"construction_log", log}};
}

Json to_json(const Witness& w) {
  Json j{{"class", std::string(to_string(w.cls))}};
  switch (w.cls) {
    case UncertaintyClass::Scaling:
      j["tau"] = number_to_json(w.tau);
      break;
    case UncertaintyClass::Rotation:
      j["theta"] = number_to_json(w.theta);
      break;
    case UncertaintyClass::Congruence:
      j["T"] = complex_matrix_to_json(w.T);
      j["S"] = complex_matrix_to_json(w.S);
      break;
    case UncertaintyClass::Unitary:
      j["U"] = complex_matrix_to_json(w.U);
      j["V"] = complex_matrix_to_json(w.V);
      break;
  }
  j["closed_loop_det"] = number_to_json(w.closed_loop_det);
  j["relative_det"] = number_to_json(w.relative_det);
  j["from_fallback"] = w.from_fallback;
  j["method"] = w.method;
  return j;
}

Witness witness_from_json(const Json& j, const std::string& path) {
  Witness w;
  try {
    w.cls = uncertainty_class_from_string(string_from_json(j, "class", path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema(child(path, "class"), e.what());
  }
  switch (w.cls) {
    case UncertaintyClass::Scaling:
      w.tau = number_from_json(require(j, "tau", path), child(path, "tau"));
      break;
    case UncertaintyClass::Rotation:
      w.theta = number_from_json(require(j, "theta", path), child(path, "theta"));
      break;
    case UncertaintyClass::Congruence:
      w.T = complex_matrix_from_json(require(j, "T", path), child(path, "T"));
      w.S = complex_matrix_from_json(require(j, "S", path), child(path, "S"));
      break;
    case UncertaintyClass::Unitary:
      w.U = complex_matrix_from_json(require(j, "U", path), child(path, "U"));
      w.V = complex_matrix_from_json(require(j, "V", path), child(path, "V"));
      break;
  }
  w.closed_loop_det = number_from_json(require(j, "closed_loop_det", path),
                                       child(path, "closed_loop_det"));
  w.relative_det = number_from_json(require(j, "relative_det", path),
                                    child(path, "relative_det"));
  w.from_fallback = bool_from_json(j, "from_fallback", path);
  w.method = string_from_json(j, "method", path);
  return w;
}

Json to_json(const PhaseProfile& p) {
  Json phases = Json::array();
  for (double x : p.phases) phases.push_back(number_to_json(x));
  return Json{{"class", std::string(to_string(p.cls.tag))},
              {"opening_angle", number_to_json(p.cls.opening_angle)},
              {"phases", phases},
              {"phi_max", number_to_json(p.phi_max)},
              {"phi_min", number_to_json(p.phi_min)},
              {"center", number_to_json(p.center)},
              {"rank", p.rank},
              {"phases_exact", p.phases_exact},
              {"has_alternate", p.has_alternate}};
}

Json to_json(const FrequencyCertificate& c) {
  Json samples = Json::array();
  for (const FrequencySample& s : c.samples) {
    samples.push_back(Json{{"omega", number_to_json(s.omega)},
                           {"multiplier", to_json(s.pi)},
                           {"report", to_json(s.report)},
                           {"epsilon", optional_number(s.epsilon)},
                           {"gamma_sq", optional_number(s.gamma_sq)},
                           {"xi", s.xi ? Json(*s.xi) : Json(nullptr)},
                           {"jump", number_to_json(s.jump)}});
  }
  return Json{{"family", std::string(to_string(c.family))},
              {"pass", c.pass},
              {"epsilon", optional_number(c.epsilon)},
              {"xi", c.xi ? Json(*c.xi) : Json(nullptr)},
              {"max_jump", number_to_json(c.max_jump)},
              {"median_jump", number_to_json(c.median_jump)},
              {"discontinuity_suspect", c.discontinuity_suspect},
              {"note", c.note},
              {"samples", samples}};
}

FrequencyCertificate frequency_certificate_from_json(const Json& j,
                                                     const std::string& path) {
  FrequencyCertificate c;
  try {
    c.family = lti_family_from_string(string_from_json(j, "family", path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema(child(path, "family"), e.what());
  }
  c.pass = bool_from_json(j, "pass", path);
  c.epsilon = optional_from_json(j, "epsilon", path);
  if (j.contains("xi") && !j["xi"].is_null()) c.xi = j["xi"].get<int>();
  c.max_jump = number_from_json(require(j, "max_jump", path), child(path, "max_jump"));
  c.median_jump =
      number_from_json(require(j, "median_jump", path), child(path, "median_jump"));
  c.discontinuity_suspect = bool_from_json(j, "discontinuity_suspect", path);
  c.note = string_from_json(j, "note", path);
  const Json& samples = require(j, "samples", path);
  if (!samples.is_array()) schema(child(path, "samples"), "expected an array");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string sp = child(path, "samples/" + std::to_string(i));
    const Json& sj = samples[i];
    FrequencySample s;
    s.omega = number_from_json(require(sj, "omega", sp), child(sp, "omega"));
    s.pi = multiplier_from_json(require(sj, "multiplier", sp), child(sp, "multiplier"));
    s.report = separation_report_from_json(require(sj, "report", sp), child(sp, "report"));
    s.epsilon = optional_from_json(sj, "epsilon", sp);
    s.gamma_sq = optional_from_json(sj, "gamma_sq", sp);
    if (sj.contains("xi") && !sj["xi"].is_null()) s.xi = sj["xi"].get<int>();
    s.jump = number_from_json(require(sj, "jump", sp), child(sp, "jump"));
    c.samples.push_back(std::move(s));
  }
  return c;
}

Json make_report(const std::string& command, std::uint64_t seed,
                 const Json& body) {
  return Json{{"tool", kToolName},
              {"version", kToolVersion},
              {"command", command},
              {"seed", seed},
              {"timestamp", utc_timestamp()},
              {"result", body}};
}

std::string certificate_csv(const FrequencyCertificate& c) {
  std::string out = "omega,margin_A,margin_B,epsilon,gamma_sq,xi,continuity_jump\n";
  auto opt = [](const std::optional<double>& x) {
    return x ? fmt17(*x) : std::string();
  };
  for (const FrequencySample& s : c.samples) {
    out += fmt17(s.omega) + "," + fmt17(s.report.margin_A) + "," +
           fmt17(s.report.margin_B) + "," + opt(s.epsilon) + "," +
           opt(s.gamma_sq) + "," + (s.xi ? std::to_string(*s.xi) : "") + "," +
           fmt17(s.jump) + "\n";
  }
  return out;
}

}  // namespace robustmult
