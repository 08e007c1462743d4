#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "robustmult/io.hpp"

namespace robustmult {
namespace {

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, (path.empty() ? "/" : path) + ": " + what);
}

std::string child(const std::string& path, const std::string& key) {
  return path + "/" + key;
}

std::string child(const std::string& path, std::size_t i) {
  return path + "/" + std::to_string(i);
}

const Json& require(const Json& j, const std::string& key,
                    const std::string& path) {
  if (!j.is_object()) schema(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema(child(path, key), "missing field");
  return *it;
}

// Row-major nested arrays; `entry` decodes one element.
template <typename Matrix, typename Decode>
Matrix matrix_from_rows(const Json& j, const std::string& path,
                        Decode entry) {
  if (!j.is_array()) schema(path, "expected an array of rows");
  const std::size_t rows = j.size();
  if (rows == 0) return Matrix(0, 0);
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = child(path, i);
    if (!j[i].is_array()) schema(rp, "expected a row array");
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) {
      throw Error(ErrorCode::DimensionError,
                  rp + ": row length " + std::to_string(j[i].size()) +
                      " differs from " + std::to_string(cols));
    }
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(i, c) = entry(j[i][c], child(child(path, i), c));
    }
  }
  return m;
}

Complex complex_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) {
    schema(path, "complex entries must be [re, im] arrays");
  }
  return {number_from_json(j[0], child(path, 0)),
          number_from_json(j[1], child(path, 1))};
}

Structure structure_from_string(const std::string& s, const std::string& path) {
  for (Structure st : {Structure::General, Structure::Phasal,
                       Structure::Rotation, Structure::Gain,
                       Structure::ScaledGain}) {
    if (s == to_string(st)) return st;
  }
  schema(path, "unknown multiplier structure '" + s + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  return ss.str();
}

void line_column(const std::string& text, std::size_t byte, std::size_t& line,
                 std::size_t& col) {
  line = 1;
  col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

void apply_tolerances(const Json& j, Tolerances& tol, const std::string& path) {
  if (!j.is_object()) schema(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = child(path, it.key());
    const double v = number_from_json(it.value(), p);
    if (it.key() == "psd_margin") tol.psd_margin = v;
    else if (it.key() == "rank_rel") tol.rank_rel = v;
    else if (it.key() == "det_zero_rel") tol.det_zero_rel = v;
    else if (it.key() == "eig_cond_max") tol.eig_cond_max = v;
    else schema(p, "unknown tolerance");
  }
}

void apply_grid(const Json& j, GridSpec& g, const std::string& path) {
  if (!j.is_object()) schema(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = child(path, it.key());
    if (it.key() == "points") {
      if (!it.value().is_number_integer()) schema(p, "expected an integer");
      g.points = it.value().get<int>();
    } else if (it.key() == "lo") {
      g.lo = number_from_json(it.value(), p);
    } else if (it.key() == "hi") {
      g.hi = number_from_json(it.value(), p);
    } else if (it.key() == "omegas") {
      if (!it.value().is_array()) schema(p, "expected an array");
      g.omegas.clear();
      for (std::size_t i = 0; i < it.value().size(); ++i) {
        g.omegas.push_back(number_from_json(it.value()[i], child(p, i)));
      }
    } else {
      schema(p, "unknown grid field");
    }
  }
}

void apply_options(const Json& j, ProblemOptions& o) {
  const std::string path = "/options";
  if (!j.is_object()) schema(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = child(path, it.key());
    if (it.key() == "tol") {
      apply_tolerances(it.value(), o.tol, p);
    } else if (it.key() == "grid") {
      apply_grid(it.value(), o.grid, p);
    } else if (it.key() == "seed") {
      if (!it.value().is_number_unsigned()) schema(p, "expected an unsigned integer");
      o.seed = it.value().get<std::uint64_t>();
    } else if (it.key() == "real_mode") {
      if (!it.value().is_boolean()) schema(p, "expected a boolean");
      o.real_mode = it.value().get<bool>();
    } else if (it.key() == "budget") {
      if (!it.value().is_number_integer()) schema(p, "expected an integer");
      o.budget = it.value().get<int>();
    } else {
      schema(p, "unknown option");
    }
  }
}

void apply_overrides(const ProblemOverrides& ov, ProblemOptions& o) {
  if (ov.psd_margin) o.tol.psd_margin = *ov.psd_margin;
  if (ov.rank_rel) o.tol.rank_rel = *ov.rank_rel;
  if (ov.det_zero_rel) o.tol.det_zero_rel = *ov.det_zero_rel;
  if (ov.eig_cond_max) o.tol.eig_cond_max = *ov.eig_cond_max;
  if (ov.seed) o.seed = *ov.seed;
  if (ov.grid_points || ov.grid_lo || ov.grid_hi) o.grid.omegas.clear();
  if (ov.grid_points) o.grid.points = *ov.grid_points;
  if (ov.grid_lo) o.grid.lo = *ov.grid_lo;
  if (ov.grid_hi) o.grid.hi = *ov.grid_hi;
  if (ov.real_mode) o.real_mode = *ov.real_mode;
  if (ov.budget) o.budget = *ov.budget;
}

}  // namespace

FrequencyGrid GridSpec::build() const {
  if (omegas.empty()) return FrequencyGrid::log_spaced(points, lo, hi);
  FrequencyGrid g;
  g.omegas = omegas;
  g.validate();
  return g;
}

Json number_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  schema(path, "expected a number");
}

Json complex_matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(Json::array(
          {number_to_json(m(i, c).real()), number_to_json(m(i, c).imag())}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix complex_matrix_from_json(const Json& j, const std::string& path) {
  return matrix_from_rows<ComplexMatrix>(j, path, complex_from_json);
}

Json real_matrix_to_json(const RealMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number_to_json(m(i, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

RealMatrix real_matrix_from_json(const Json& j, const std::string& path) {
  return matrix_from_rows<RealMatrix>(j, path, number_from_json);
}

Json state_space_to_json(const StateSpace& s) {
  return Json{{"A", real_matrix_to_json(s.A)},
              {"B", real_matrix_to_json(s.B)},
              {"C", real_matrix_to_json(s.C)},
              {"D", real_matrix_to_json(s.D)}};
}

StateSpace state_space_from_json(const Json& j, const std::string& path) {
  const RealMatrix d = real_matrix_from_json(require(j, "D", path), child(path, "D"));
  if (d.size() == 0) {
    throw Error(ErrorCode::DimensionError, child(path, "D") + ": D must be nonempty");
  }
  RealMatrix a, b, c;
  if (j.contains("A")) a = real_matrix_from_json(j["A"], child(path, "A"));
  if (a.size() == 0) {
    for (const char* key : {"B", "C"}) {
      if (j.contains(key) && !j[key].empty()) {
        throw Error(ErrorCode::DimensionError,
                    child(path, key) + ": must be empty when A has no states");
      }
    }
    return StateSpace::gain(d);
  }
  b = real_matrix_from_json(require(j, "B", path), child(path, "B"));
  c = real_matrix_from_json(require(j, "C", path), child(path, "C"));
  StateSpace s{a, b, c, d};
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::DimensionError, path + ": " + e.what());
  }
  return s;
}

Json to_json(const Multiplier& p) {
  Json j{{"structure", std::string(to_string(p.structure))},
         {"n", p.n},
         {"m", p.m},
         {"P", complex_matrix_to_json(p.P)}};
  switch (p.structure) {
    case Structure::General:
      break;
    case Structure::Phasal:
      j["H"] = complex_matrix_to_json(p.H);
      break;
    case Structure::Rotation:
      j["z"] = Json::array({number_to_json(p.z.real()), number_to_json(p.z.imag())});
      break;
    case Structure::Gain:
      j["N"] = complex_matrix_to_json(p.N);
      j["M"] = complex_matrix_to_json(p.M);
      break;
    case Structure::ScaledGain:
      j["gamma_sq"] = number_to_json(p.gamma_sq);
      j["xi"] = p.xi;
      break;
  }
  return j;
}

Multiplier multiplier_from_json(const Json& j, const std::string& path) {
  const Json& st = require(j, "structure", path);
  if (!st.is_string()) schema(child(path, "structure"), "expected a string");
  const Structure s = structure_from_string(st.get<std::string>(),
                                            child(path, "structure"));
  auto index = [&](const char* key) {
    const Json& v = require(j, key, path);
    if (!v.is_number_integer()) schema(child(path, key), "expected an integer");
    return static_cast<Eigen::Index>(v.get<long long>());
  };
  try {
    switch (s) {
      case Structure::General:
        return Multiplier::general(
            complex_matrix_from_json(require(j, "P", path), child(path, "P")),
            index("n"), index("m"));
      case Structure::Phasal:
        return Multiplier::phasal(
            complex_matrix_from_json(require(j, "H", path), child(path, "H")));
      case Structure::Rotation:
        return Multiplier::rotation(
            complex_from_json(require(j, "z", path), child(path, "z")),
            index("n"));
      case Structure::Gain:
        return Multiplier::gain(
            complex_matrix_from_json(require(j, "N", path), child(path, "N")),
            complex_matrix_from_json(require(j, "M", path), child(path, "M")));
      case Structure::ScaledGain: {
        const Json& xi = require(j, "xi", path);
        if (!xi.is_number_integer()) schema(child(path, "xi"), "expected an integer");
        return Multiplier::scaled_gain(
            number_from_json(require(j, "gamma_sq", path), child(path, "gamma_sq")),
            xi.get<int>(), index("n"), index("m"));
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    throw Error(ErrorCode::DimensionError, path + ": " + e.what());
  }
  schema(path, "unreachable");
}

ProblemFile parse_problem(const std::string& text,
                          const ProblemOverrides& overrides) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 0, col = 0;
    line_column(text, e.byte == 0 ? 0 : e.byte - 1, line, col);
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) +
                                           ", column " + std::to_string(col) +
                                           ": " + e.what());
  }
  if (!j.is_object()) schema("", "expected a JSON object");
  ProblemFile p;
  const Json& kind = require(j, "kind", "");
  if (!kind.is_string()) schema("/kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "matrix-pair") {
    p.kind = ProblemKind::MatrixPair;
    p.A = complex_matrix_from_json(require(j, "A", ""), "/A");
    p.B = complex_matrix_from_json(require(j, "B", ""), "/B");
    if (p.A.size() == 0 || p.B.size() == 0) {
      throw Error(ErrorCode::DimensionError, "A and B must be nonempty");
    }
    if (p.A.rows() != p.B.cols() || p.A.cols() != p.B.rows()) {
      throw Error(ErrorCode::DimensionError,
                  "A is " + std::to_string(p.A.rows()) + "x" +
                      std::to_string(p.A.cols()) + " but B is " +
                      std::to_string(p.B.rows()) + "x" +
                      std::to_string(p.B.cols()) + "; need m x n and n x m");
    }
  } else if (k == "lti-pair") {
    p.kind = ProblemKind::LtiPair;
    p.G = state_space_from_json(require(j, "G", ""), "/G");
    p.K = state_space_from_json(require(j, "K", ""), "/K");
    if (p.K.inputs() != p.G.outputs() || p.K.outputs() != p.G.inputs()) {
      throw Error(ErrorCode::DimensionError,
                  "K must map the outputs of G back to its inputs");
    }
  } else {
    schema("/kind", "expected \"matrix-pair\" or \"lti-pair\"");
  }
  if (j.contains("multiplier")) {
    p.multiplier = multiplier_from_json(j["multiplier"], "/multiplier");
  }
  if (j.contains("form")) {
    if (!j["form"].is_string()) schema("/form", "expected a string");
    try {
      p.form = form_from_string(j["form"].get<std::string>());
    } catch (const Error& e) {
      schema("/form", e.what());
    }
  }
  if (j.contains("epsilon")) p.epsilon = number_from_json(j["epsilon"], "/epsilon");
  if (j.contains("options")) apply_options(j["options"], p.options);
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const char* known[] = {"kind", "A", "B", "G", "K", "multiplier",
                                  "form", "epsilon", "options"};
    bool ok = false;
    for (const char* key : known) ok = ok || it.key() == key;
    if (!ok) schema("/" + it.key(), "unknown field");
  }
  apply_overrides(overrides, p.options);
  try {
    p.options.tol.validate();
  } catch (const Error& e) {
    schema("/options/tol", e.what());
  }
  return p;
}

ProblemFile load_problem(const std::string& path,
                         const ProblemOverrides& overrides) {
  return parse_problem(read_file(path), overrides);
}

Json problem_to_json(const ProblemFile& p) {
  Json j;
  if (p.kind == ProblemKind::MatrixPair) {
    j["kind"] = "matrix-pair";
    j["A"] = complex_matrix_to_json(p.A);
    j["B"] = complex_matrix_to_json(p.B);
  } else {
    j["kind"] = "lti-pair";
    j["G"] = state_space_to_json(p.G);
    j["K"] = state_space_to_json(p.K);
  }
  if (p.multiplier) j["multiplier"] = to_json(*p.multiplier);
  if (p.form) j["form"] = std::string(to_string(*p.form));
  if (p.epsilon) j["epsilon"] = number_to_json(*p.epsilon);
  const ProblemOptions& o = p.options;
  Json grid;
  if (o.grid.omegas.empty()) {
    grid = Json{{"points", o.grid.points},
                {"lo", number_to_json(o.grid.lo)},
                {"hi", number_to_json(o.grid.hi)}};
  } else {
    Json w = Json::array();
    for (double x : o.grid.omegas) w.push_back(number_to_json(x));
    grid = Json{{"omegas", w}};
  }
  j["options"] = Json{{"tol", {{"psd_margin", o.tol.psd_margin},
                               {"rank_rel", o.tol.rank_rel},
                               {"det_zero_rel", o.tol.det_zero_rel},
                               {"eig_cond_max", o.tol.eig_cond_max}}},
                      {"grid", grid},
                      {"seed", o.seed},
                      {"real_mode", o.real_mode},
                      {"budget", o.budget}};
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
}

}  // namespace robustmult
