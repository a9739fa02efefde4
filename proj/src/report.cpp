#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/version.hpp>

#include "qtopo/harness.hpp"

#ifndef QTOPO_VERSION
#define QTOPO_VERSION "dev"
#endif

namespace qtopo {

using nlohmann::json;

namespace {

json tool_info() {
  return {{"name", "qtopo"},
          {"version", QTOPO_VERSION},
          {"boost", BOOST_LIB_VERSION},
          {"compiler", __VERSION__}};
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

// Left-aligned column that always keeps one separating space.
std::string col(const std::string& s, std::size_t w) {
  return s.size() + 1 >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

std::string rational_list(const std::vector<Rational>& v) {
  std::string out;
  for (const auto& r : v) out += (out.empty() ? "" : ", ") + to_string(r);
  return out;
}

}  // namespace

json ExperimentConfig::to_json() const {
  json betas_j = json::array();
  for (const auto& b : betas) betas_j.push_back(qtopo::to_string(b));
  return {{"name", name},
          {"kind", kind},
          {"family", family},
          {"sweep", sweep},
          {"structure", structure},
          {"betas", betas_j},
          {"seminorm", seminorm},
          {"allow_below_threshold", allow_below_threshold},
          {"invariant_method", invariant_method},
          {"level", level},
          {"level_error", level_error},
          {"samples", samples},
          {"seed", seed},
          {"sobolev_method", sobolev_method},
          {"base", base},
          {"frequency", frequency},
          {"epsilons", epsilons},
          {"reference", reference},
          {"bmo",
           {{"min_radius", bmo.min_radius},
            {"centers", bmo.centers},
            {"points_per_cap", bmo.points_per_cap},
            {"seed", bmo.seed}}},
          {"poisson_level", poisson_level},
          {"probe_radii", probe_radii},
          {"degree_level", degree_level},
          {"output", {{"json", json_path}, {"csv", csv_path}, {"text", text_path}}}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  j.at("name").get_to(c.name);
  j.at("kind").get_to(c.kind);
  j.at("family").get_to(c.family);
  j.at("sweep").get_to(c.sweep);
  j.at("structure").get_to(c.structure);
  for (const auto& b : j.at("betas")) c.betas.push_back(parse_rational(b.get<std::string>()));
  j.at("seminorm").get_to(c.seminorm);
  j.at("allow_below_threshold").get_to(c.allow_below_threshold);
  j.at("invariant_method").get_to(c.invariant_method);
  j.at("level").get_to(c.level);
  j.at("level_error").get_to(c.level_error);
  j.at("samples").get_to(c.samples);
  j.at("seed").get_to(c.seed);
  j.at("sobolev_method").get_to(c.sobolev_method);
  j.at("base").get_to(c.base);
  j.at("frequency").get_to(c.frequency);
  j.at("epsilons").get_to(c.epsilons);
  j.at("reference").get_to(c.reference);
  const json& b = j.at("bmo");
  b.at("min_radius").get_to(c.bmo.min_radius);
  b.at("centers").get_to(c.bmo.centers);
  b.at("points_per_cap").get_to(c.bmo.points_per_cap);
  b.at("seed").get_to(c.bmo.seed);
  j.at("poisson_level").get_to(c.poisson_level);
  j.at("probe_radii").get_to(c.probe_radii);
  j.at("degree_level").get_to(c.degree_level);
  const json& o = j.at("output");
  o.at("json").get_to(c.json_path);
  o.at("csv").get_to(c.csv_path);
  o.at("text").get_to(c.text_path);
  return c;
}

json to_json(const SeminormEstimate& e) {
  return {{"value", e.value},     {"error", e.error},   {"method", e.method},
          {"samples", e.samples}, {"seed", e.seed},     {"strata", e.strata},
          {"tail_fraction", e.tail_fraction}};
}

json to_json(const ThresholdReport& r) {
  auto opt = [](const std::optional<Rational>& v) -> json { return v ? json(to_string(*v)) : json(nullptr); };
  json terms = json::array();
  for (const auto& t : r.terms) {
    terms.push_back({{"degrees", t.degrees},
                     {"length", t.length},
                     {"beta0", opt(t.beta0)},
                     {"alpha_star", opt(t.alpha_star)},
                     {"degree_bound", t.degree_bound}});
  }
  return {{"name", r.name},
          {"target", r.target},
          {"description", r.description},
          {"n", r.n},
          {"l", r.l},
          {"terms", terms},
          {"beta0", opt(r.beta0)},
          {"theorem_beta0", opt(r.theorem_beta0)},
          {"stated_beta0", opt(r.stated_beta0)},
          {"guard", opt(r.guard())},
          {"theorem_consistent", r.theorem_consistent()},
          {"exponent", r.exponent_formula()},
          {"evaluable", r.evaluable},
          {"note", r.note}};
}

json to_json(const ScalingReport& r) {
  json rows = json::array();
  for (const auto& w : r.rows) {
    rows.push_back({{"parameter", w.parameter},
                    {"map", w.map},
                    {"beta", w.beta},
                    {"invariant", w.invariant},
                    {"invariant_error", w.invariant_error},
                    {"nearest", w.nearest},
                    {"seminorm", w.seminorm},
                    {"seminorm_error", w.seminorm_error},
                    {"seminorm_method", w.seminorm_method},
                    {"ratio", w.ratio},
                    {"ratio_error", w.ratio_error},
                    {"informational", w.informational},
                    {"error", w.error}});
  }
  json fits = json::array();
  for (const auto& f : r.fits) {
    fits.push_back({{"beta", f.beta},
                    {"exponent", f.exponent},
                    {"exponent_value", f.exponent_value},
                    {"points", f.points},
                    {"slope", f.slope},
                    {"slope_error", f.slope_error},
                    {"ratio_median", f.ratio_median},
                    {"ratio_max", f.ratio_max},
                    {"ratio_min", f.ratio_min},
                    {"bounded", f.bounded},
                    {"slope_ok", f.slope_ok},
                    {"informational", f.informational},
                    {"pass", f.pass}});
  }
  return {{"tool", tool_info()},
          {"timestamp", timestamp()},
          {"kind", "scaling"},
          {"seeds", {{"seminorm", r.config.seed}}},
          {"config", r.config.to_json()},
          {"structure", r.structure},
          {"n", r.n},
          {"l", r.l},
          {"threshold", r.threshold},
          {"rows", rows},
          {"fits", fits},
          {"warnings", r.warnings},
          {"verdict", r.verdict}};
}

ScalingReport scaling_report_from_json(const json& j) {
  if (j.value("kind", "") != "scaling") throw Error("not a scaling report");
  ScalingReport r;
  r.config = ExperimentConfig::from_json(j.at("config"));
  j.at("structure").get_to(r.structure);
  j.at("n").get_to(r.n);
  j.at("l").get_to(r.l);
  j.at("threshold").get_to(r.threshold);
  for (const auto& w : j.at("rows")) {
    ScalingRow row;
    w.at("parameter").get_to(row.parameter);
    w.at("map").get_to(row.map);
    w.at("beta").get_to(row.beta);
    w.at("invariant").get_to(row.invariant);
    w.at("invariant_error").get_to(row.invariant_error);
    w.at("nearest").get_to(row.nearest);
    w.at("seminorm").get_to(row.seminorm);
    w.at("seminorm_error").get_to(row.seminorm_error);
    w.at("seminorm_method").get_to(row.seminorm_method);
    w.at("ratio").get_to(row.ratio);
    w.at("ratio_error").get_to(row.ratio_error);
    w.at("informational").get_to(row.informational);
    w.at("error").get_to(row.error);
    r.rows.push_back(row);
  }
  for (const auto& f : j.at("fits")) {
    ScalingFit fit;
    f.at("beta").get_to(fit.beta);
    f.at("exponent").get_to(fit.exponent);
    f.at("exponent_value").get_to(fit.exponent_value);
    f.at("points").get_to(fit.points);
    f.at("slope").get_to(fit.slope);
    f.at("slope_error").get_to(fit.slope_error);
    f.at("ratio_median").get_to(fit.ratio_median);
    f.at("ratio_max").get_to(fit.ratio_max);
    f.at("ratio_min").get_to(fit.ratio_min);
    f.at("bounded").get_to(fit.bounded);
    f.at("slope_ok").get_to(fit.slope_ok);
    f.at("informational").get_to(fit.informational);
    f.at("pass").get_to(fit.pass);
    r.fits.push_back(fit);
  }
  j.at("warnings").get_to(r.warnings);
  j.at("verdict").get_to(r.verdict);
  return r;
}

json to_json(const BmoReport& r) {
  json rows = json::array();
  for (const auto& w : r.rows) {
    rows.push_back({{"epsilon", w.epsilon},
                    {"map", w.map},
                    {"bmo", w.bmo},
                    {"bmo_error", w.bmo_error},
                    {"max_distance", w.max_distance},
                    {"ratio", w.ratio},
                    {"degree", w.degree},
                    {"nearest", w.nearest},
                    {"small_bmo", w.small_bmo},
                    {"degree_ok", w.degree_ok},
                    {"error", w.error}});
  }
  return {{"tool", tool_info()},
          {"timestamp", timestamp()},
          {"kind", "bmo"},
          {"seeds", {{"bmo", r.config.bmo.seed}}},
          {"config", r.config.to_json()},
          {"reference", r.reference},
          {"reference_bmo", r.reference_bmo},
          {"reference_error", r.reference_error},
          {"expected_degree", r.expected_degree},
          {"rows", rows},
          {"ratio_spread", r.ratio_spread},
          {"degree_pass", r.degree_pass},
          {"ratio_pass", r.ratio_pass},
          {"warnings", r.warnings},
          {"verdict", r.verdict}};
}

BmoReport bmo_report_from_json(const json& j) {
  if (j.value("kind", "") != "bmo") throw Error("not a BMO report");
  BmoReport r;
  r.config = ExperimentConfig::from_json(j.at("config"));
  j.at("reference").get_to(r.reference);
  j.at("reference_bmo").get_to(r.reference_bmo);
  j.at("reference_error").get_to(r.reference_error);
  j.at("expected_degree").get_to(r.expected_degree);
  for (const auto& w : j.at("rows")) {
    BmoRow row;
    w.at("epsilon").get_to(row.epsilon);
    w.at("map").get_to(row.map);
    w.at("bmo").get_to(row.bmo);
    w.at("bmo_error").get_to(row.bmo_error);
    w.at("max_distance").get_to(row.max_distance);
    w.at("ratio").get_to(row.ratio);
    w.at("degree").get_to(row.degree);
    w.at("nearest").get_to(row.nearest);
    w.at("small_bmo").get_to(row.small_bmo);
    w.at("degree_ok").get_to(row.degree_ok);
    w.at("error").get_to(row.error);
    r.rows.push_back(row);
  }
  j.at("ratio_spread").get_to(r.ratio_spread);
  j.at("degree_pass").get_to(r.degree_pass);
  j.at("ratio_pass").get_to(r.ratio_pass);
  j.at("warnings").get_to(r.warnings);
  j.at("verdict").get_to(r.verdict);
  return r;
}

std::string to_csv(const ScalingReport& r) {
  std::ostringstream os;
  os << "parameter,map,beta,invariant,invariant_error,nearest,seminorm,seminorm_error,seminorm_method,ratio,"
        "ratio_error,informational,error\n";
  for (const auto& w : r.rows) {
    os << w.parameter << ',' << csv_field(w.map) << ',' << w.beta << ',' << num(w.invariant) << ','
       << num(w.invariant_error) << ',' << w.nearest << ',' << num(w.seminorm) << ',' << num(w.seminorm_error) << ','
       << w.seminorm_method << ',' << num(w.ratio) << ',' << num(w.ratio_error) << ','
       << (w.informational ? "true" : "false") << ',' << csv_field(w.error) << '\n';
  }
  return os.str();
}

std::string to_csv(const BmoReport& r) {
  std::ostringstream os;
  os << "epsilon,map,bmo,bmo_error,max_distance,ratio,degree,nearest,small_bmo,degree_ok,error\n";
  for (const auto& w : r.rows) {
    os << num(w.epsilon) << ',' << csv_field(w.map) << ',' << num(w.bmo) << ',' << num(w.bmo_error) << ','
       << num(w.max_distance) << ',' << num(w.ratio) << ',' << num(w.degree) << ',' << w.nearest << ','
       << (w.small_bmo ? "true" : "false") << ',' << (w.degree_ok ? "true" : "false") << ',' << csv_field(w.error)
       << '\n';
  }
  return os.str();
}

std::string to_text(const ScalingReport& r) {
  std::ostringstream os;
  os << "experiment " << r.config.name << " (scaling)\n"
     << "structure  " << r.structure << "  N=" << r.n << " L=" << r.l << "  threshold " << r.threshold << "\n"
     << "family     " << r.config.family << "  betas " << rational_list(r.config.betas) << "  seminorm "
     << r.config.seminorm << "\n\n";
  os << col("d", 6) << col("beta", 8) << col("invariant", 16) << col("inv_err", 16) << col("seminorm", 16)
     << col("semi_err", 16) << col("ratio", 16) << "note\n";
  for (const auto& w : r.rows) {
    os << col(std::to_string(w.parameter), 6) << col(w.beta, 8) << col(num(w.invariant), 16)
       << col(num(w.invariant_error), 16) << col(num(w.seminorm), 16) << col(num(w.seminorm_error), 16)
       << col(num(w.ratio), 16) << (w.error.empty() ? (w.informational ? "informational" : "") : w.error)
       << "\n";
  }
  os << "\n";
  for (const auto& f : r.fits) {
    os << "beta " << f.beta << ": exponent " << f.exponent << " = " << num(f.exponent_value) << ", points "
       << f.points;
    if (f.points >= 2)
      os << ", slope " << num(f.slope) << " +- " << num(1.96 * f.slope_error) << " (95%)";
    os << ", C observed " << num(f.ratio_max) << " (median " << num(f.ratio_median) << ", min " << num(f.ratio_min)
       << ")" << (f.informational ? " informational" : (f.pass ? " pass" : " fail")) << "\n";
  }
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  os << "verdict: " << r.verdict << "\n";
  return os.str();
}

std::string to_text(const BmoReport& r) {
  std::ostringstream os;
  os << "experiment " << r.config.name << " (bmo)\n"
     << "base " << r.config.base << "  frequency " << r.config.frequency << "  expected degree "
     << r.expected_degree << "\n"
     << "reference " << r.reference << "  BMO " << num(r.reference_bmo) << " +- " << num(r.reference_error)
     << "\n\n";
  os << col("epsilon", 10) << col("bmo", 16) << col("max_dist", 16)
     << col("dist/bmo", 16) << col("degree", 16)
     << "note\n";
  for (const auto& w : r.rows) {
    os << col(num(w.epsilon), 10) << col(num(w.bmo), 16) << col(num(w.max_distance), 16)
       << col(num(w.ratio), 16) << col(num(w.degree), 16)
       << (w.error.empty() ? (w.small_bmo ? (w.degree_ok ? "small, degree ok" : "small, degree off") : "") : w.error)
       << "\n";
  }
  os << "\nratio spread " << num(r.ratio_spread) << (r.ratio_pass ? " pass" : " fail") << ", degree "
     << (r.degree_pass ? "pass" : "fail") << "\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  os << "verdict: " << r.verdict << "\n";
  return os.str();
}

ReportFormat parse_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "text") return ReportFormat::text;
  throw ConfigError("unknown format '" + name + "'");
}

std::string render(const ScalingReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      return to_json(r).dump(2) + "\n";
    case ReportFormat::csv:
      return to_csv(r);
    default:
      return to_text(r);
  }
}

std::string render(const BmoReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      return to_json(r).dump(2) + "\n";
    case ReportFormat::csv:
      return to_csv(r);
    default:
      return to_text(r);
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

namespace {
template <class Report>
void emit(const Report& r) {
  if (!r.config.json_path.empty()) write_file(r.config.json_path, render(r, ReportFormat::json));
  if (!r.config.csv_path.empty()) write_file(r.config.csv_path, render(r, ReportFormat::csv));
  if (!r.config.text_path.empty()) write_file(r.config.text_path, render(r, ReportFormat::text));
}
}  // namespace

void emit_outputs(const ScalingReport& r) { emit(r); }
void emit_outputs(const BmoReport& r) { emit(r); }

std::string canonical_json(const json& j) {
  json copy = j;
  if (copy.is_object()) copy.erase("timestamp");
  return copy.dump();
}

}  // namespace qtopo
