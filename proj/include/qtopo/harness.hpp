#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include "qtopo/registry.hpp"
#include "qtopo/seminorms.hpp"

namespace qtopo {

/// Thrown for malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Experiment description read from an INI-style file:
///
///   [experiment]                      [invariant]
///   kind = scaling | bmo              method = pipeline | oracle
///   family = circle-power:d={d}       level = 7
///   sweep = 1, 2, 3                   level_error = true
///   structure = s1:winding
///   betas = 9/10                      [seminorm]
///   seminorm = sobolev | holder       samples = 200000
///   allow_below_threshold = false     seed = 1
///                                     method = stratified | plain | tensor
///   [bmo]  (kind = bmo)
///   base = const:n=2,m=2              [output]
///   frequency = 3                     json = report.json
///   epsilons = 0, 0.02, 0.05, 0.1     csv = report.csv
///   reference = suspension:d=1        text = report.txt
///   min_radius, centers, points, poisson_level, probe_radii, degree_level
struct ExperimentConfig {
  std::string name = "experiment";
  std::string kind = "scaling";

  std::string family;
  std::vector<int> sweep;
  std::string structure;
  std::vector<Rational> betas;
  std::string seminorm = "sobolev";
  bool allow_below_threshold = false;

  std::string invariant_method = "pipeline";
  int level = -1;  // −1: default for the domain dimension
  bool level_error = true;

  long samples = 200000;
  std::uint64_t seed = 1;
  std::string sobolev_method = "stratified";

  std::string base;
  int frequency = 3;
  std::vector<double> epsilons;
  std::string reference;
  BmoOptions bmo;
  int poisson_level = 4;
  std::vector<double> probe_radii{0.3, 0.6, 0.85};
  int degree_level = 5;

  std::string json_path, csv_path, text_path;

  static ExperimentConfig from_tree(const boost::property_tree::ptree& tree);
  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig parse(const std::string& text);
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

/// Default mesh level per domain dimension (S¹: 7, S²: 5, S³: 3).
int default_level(int domain_dim);

struct ScalingRow {
  int parameter = 0;
  std::string map;
  std::string beta;  // exact rational
  double invariant = 0.0;
  double invariant_error = 0.0;
  long nearest = 0;
  double seminorm = 0.0;
  double seminorm_error = 0.0;
  std::string seminorm_method;
  double ratio = 0.0;
  double ratio_error = 0.0;
  bool informational = false;
  std::string error;
};

struct ScalingFit {
  std::string beta;
  std::string exponent;  // (N+L)/β exactly
  double exponent_value = 0.0;
  int points = 0;
  double slope = 0.0;
  double slope_error = 0.0;
  double ratio_median = 0.0;
  /// Largest |inv|/[f]^{(N+L)/β} on the family ("C observed on this family").
  double ratio_max = 0.0;
  double ratio_min = 0.0;
  bool bounded = false;
  bool slope_ok = false;
  bool informational = false;
  bool pass = false;
};

struct ScalingReport {
  ExperimentConfig config;
  std::string structure;
  int n = 0;
  int l = 0;
  std::string threshold;  // hypothesis guard value, "n/a" when none
  std::vector<ScalingRow> rows;
  std::vector<ScalingFit> fits;
  std::vector<std::string> warnings;
  std::string verdict;  // PASS | FAIL | INFORMATIONAL
  bool pass() const { return verdict == "PASS"; }
};

struct BmoRow {
  double epsilon = 0.0;
  std::string map;
  double bmo = 0.0;
  double bmo_error = 0.0;
  double max_distance = 0.0;
  double ratio = 0.0;  // max distance / BMO
  double degree = 0.0;
  long nearest = 0;
  bool small_bmo = false;
  bool degree_ok = false;
  std::string error;
};

struct BmoReport {
  ExperimentConfig config;
  std::string reference;
  double reference_bmo = 0.0;
  double reference_error = 0.0;
  long expected_degree = 0;
  std::vector<BmoRow> rows;
  double ratio_spread = 0.0;  // max/min ratio over rows with positive BMO
  bool degree_pass = false;
  bool ratio_pass = false;
  std::vector<std::string> warnings;
  std::string verdict;
  bool pass() const { return verdict == "PASS"; }
};

/// Invariant of f for a catalogue structure at a mesh level, with the
/// level-difference error when requested.
struct InvariantValue {
  double value = 0.0;
  double error = 0.0;
};
InvariantValue evaluate_invariant(const SmoothMap& f, const ThresholdReport& structure, const ExperimentConfig& config);

/// Substitutes {d} in the family template.
std::string instantiate_family(const std::string& family, int parameter);

ScalingReport run_scaling(const ExperimentConfig& config);
BmoReport run_bmo_probe(const ExperimentConfig& config);

/// Weighted least-squares slope of y on x with effective-variance weights.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_error = 0.0;
};
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& sx,
                   const std::vector<double>& sy);

nlohmann::json to_json(const ScalingReport& r);
nlohmann::json to_json(const BmoReport& r);
nlohmann::json to_json(const ThresholdReport& r);
nlohmann::json to_json(const SeminormEstimate& e);
ScalingReport scaling_report_from_json(const nlohmann::json& j);
BmoReport bmo_report_from_json(const nlohmann::json& j);

std::string to_csv(const ScalingReport& r);
std::string to_csv(const BmoReport& r);
std::string to_text(const ScalingReport& r);
std::string to_text(const BmoReport& r);

enum class ReportFormat { json, csv, text };
ReportFormat parse_format(const std::string& name);
/// Serializes the report; JSON output carries a timestamp field that is the
/// only run-dependent content.
std::string render(const ScalingReport& r, ReportFormat format);
std::string render(const BmoReport& r, ReportFormat format);
/// Writes text to path; throws Error on I/O failure.
void write_file(const std::string& path, const std::string& text);
/// Writes every output path named in the report's config.
void emit_outputs(const ScalingReport& r);
void emit_outputs(const BmoReport& r);

/// JSON dump without the timestamp field, for reproducibility comparisons.
std::string canonical_json(const nlohmann::json& j);

}  // namespace qtopo
