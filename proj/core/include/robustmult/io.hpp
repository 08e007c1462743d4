#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustmult/adversary.hpp"
#include "robustmult/lti.hpp"
#include "robustmult/phase.hpp"
#include "robustmult/separation.hpp"
#include "robustmult/synthesis.hpp"

// JSON problem files and reports. Complex entries are [re, im] pairs, real
// state-space entries plain numbers, and non-finite numbers the strings
// "inf", "-inf" and "nan".

namespace robustmult {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "robustmult";
inline constexpr const char* kToolVersion = "0.1.0";

enum class ProblemKind { MatrixPair, LtiPair };

struct GridSpec {
  int points = 200;
  double lo = 1e-3;
  double hi = 1e3;
  std::vector<double> omegas;  // explicit grid; overrides the fields above

  FrequencyGrid build() const;
};

struct ProblemOptions {
  Tolerances tol;
  GridSpec grid;
  std::uint64_t seed = 1;
  bool real_mode = false;
  int budget = 20000;
};

struct ProblemFile {
  ProblemKind kind = ProblemKind::MatrixPair;
  ComplexMatrix A, B;  // matrix-pair
  StateSpace G, K;     // lti-pair
  std::optional<Multiplier> multiplier;
  std::optional<Form> form;
  std::optional<double> epsilon;
  ProblemOptions options;
};

// Command-line values; set fields win over the file.
struct ProblemOverrides {
  std::optional<double> psd_margin, rank_rel, det_zero_rel, eig_cond_max;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_points;
  std::optional<double> grid_lo, grid_hi;
  std::optional<bool> real_mode;
  std::optional<int> budget;
};

// Throws ParseError (with line and column), SchemaError (with the JSON path)
// and DimensionError.
ProblemFile parse_problem(const std::string& text,
                          const ProblemOverrides& overrides = {});
// As parse_problem; throws IoError when the file cannot be read.
ProblemFile load_problem(const std::string& path,
                         const ProblemOverrides& overrides = {});
Json problem_to_json(const ProblemFile& p);

// Codecs shared by problems and reports. Decoders throw SchemaError naming
// `path`.
Json number_to_json(double x);
double number_from_json(const Json& j, const std::string& path);
Json complex_matrix_to_json(const ComplexMatrix& m);
ComplexMatrix complex_matrix_from_json(const Json& j, const std::string& path);
Json real_matrix_to_json(const RealMatrix& m);
RealMatrix real_matrix_from_json(const Json& j, const std::string& path);
Json state_space_to_json(const StateSpace& s);
StateSpace state_space_from_json(const Json& j, const std::string& path);

Json to_json(const Multiplier& p);
Multiplier multiplier_from_json(const Json& j, const std::string& path);
Json to_json(const SeparationReport& r);
SeparationReport separation_report_from_json(const Json& j,
                                             const std::string& path);
Json to_json(const SynthesisResult& r);
Json to_json(const Witness& w);
Witness witness_from_json(const Json& j, const std::string& path);
Json to_json(const PhaseProfile& p);
Json to_json(const FrequencyCertificate& c);
FrequencyCertificate frequency_certificate_from_json(const Json& j,
                                                     const std::string& path);

// Envelope with tool, version, command, seed and timestamp metadata.
Json make_report(const std::string& command, std::uint64_t seed,
                 const Json& body);

// omega, margin_A, margin_B, epsilon, gamma_sq, xi, continuity_jump; one row
// per sample, 17 significant digits, empty cells for absent values.
std::string certificate_csv(const FrequencyCertificate& c);

// Throws IoError.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace robustmult
