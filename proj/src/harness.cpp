#include "qtopo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "qtopo/invariants.hpp"
#include "qtopo/parallel.hpp"

namespace qtopo {

namespace {

using boost::property_tree::ptree;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

int parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  }
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, std::string text) {
  boost::to_lower(text);
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'");
}

// "1, 2, 5" or "1..8"
std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const int a = parse_int(key, boost::trim_copy(item.substr(0, dots)));
      const int b = parse_int(key, boost::trim_copy(item.substr(dots + 2)));
      if (b < a) throw ConfigError("key '" + key + "': empty range '" + item + "'");
      for (int v = a; v <= b; ++v) out.push_back(v);
    } else {
      out.push_back(parse_int(key, item));
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(key, item));
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"name", "kind", "family", "sweep", "structure", "betas", "seminorm", "allow_below_threshold"}},
      {"invariant", {"method", "level", "level_error"}},
      {"seminorm", {"samples", "seed", "method"}},
      {"bmo",
       {"base", "frequency", "epsilons", "reference", "min_radius", "centers", "points", "poisson_level", "probe_radii",
        "degree_level", "seed"}},
      {"output", {"json", "csv", "text"}}};
  return keys;
}

std::mutex cache_mutex;

MeshPtr shared_mesh(int dim, int level) {
  static std::map<std::pair<int, int>, MeshPtr> cache;
  std::lock_guard lock(cache_mutex);
  auto& m = cache[{dim, level}];
  if (!m) m = make_sphere_mesh(dim, level);
  return m;
}

ComplexPtr shared_complex(int dim, int level) {
  static std::map<std::pair<int, int>, ComplexPtr> cache;
  MeshPtr mesh = shared_mesh(dim, level);
  std::lock_guard lock(cache_mutex);
  auto& c = cache[{dim, level}];
  if (!c) c = std::make_shared<const WhitneyComplex>(mesh);
  return c;
}

int min_level(int dim) { return dim == 3 ? 1 : 0; }

double invariant_at(const SmoothMap& f, const ThresholdReport& s, int level) {
  const int n = s.n;
  if (s.name == "s1:winding") return winding_number(f, shared_mesh(n, level)).value;
  if (s.name == "s2:degree" || s.name == "s3:degree") return mapping_degree(f, shared_mesh(n, level)).value;
  return hardt_riviere(f, s.structure, shared_mesh(n, level), {}, shared_complex(n, level)).value;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_tree(const ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError("unknown section [" + section + "]");
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside a section");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(ptree::path_type(path, '.'))) return boost::trim_copy(*v);
    return std::nullopt;
  };
  ExperimentConfig c;
  if (auto v = get("experiment.name")) c.name = *v;
  if (auto v = get("experiment.kind")) c.kind = *v;
  if (c.kind != "scaling" && c.kind != "bmo") throw ConfigError("experiment.kind must be scaling or bmo");
  if (auto v = get("experiment.family")) c.family = *v;
  if (auto v = get("experiment.sweep")) c.sweep = parse_int_list("sweep", *v);
  if (auto v = get("experiment.structure")) c.structure = *v;
  if (auto v = get("experiment.betas")) {
    for (const auto& b : split_list(*v)) {
      try {
        c.betas.push_back(parse_rational(b));
      } catch (const Error& e) {
        throw ConfigError(std::string("betas: ") + e.what());
      }
    }
  }
  if (auto v = get("experiment.seminorm")) c.seminorm = *v;
  if (c.seminorm != "sobolev" && c.seminorm != "holder")
    throw ConfigError("experiment.seminorm must be sobolev or holder");
  if (auto v = get("experiment.allow_below_threshold"))
    c.allow_below_threshold = parse_bool("allow_below_threshold", *v);

  if (auto v = get("invariant.method")) c.invariant_method = *v;
  if (c.invariant_method != "pipeline" && c.invariant_method != "oracle")
    throw ConfigError("invariant.method must be pipeline or oracle");
  if (auto v = get("invariant.level")) c.level = parse_int("level", *v);
  if (auto v = get("invariant.level_error")) c.level_error = parse_bool("level_error", *v);

  if (auto v = get("seminorm.samples")) c.samples = parse_int("samples", *v);
  if (c.samples < 1) throw ConfigError("seminorm.samples must be positive");
  if (auto v = get("seminorm.seed")) c.seed = static_cast<std::uint64_t>(parse_int("seed", *v));
  if (auto v = get("seminorm.method")) c.sobolev_method = *v;
  if (c.sobolev_method != "stratified" && c.sobolev_method != "plain" && c.sobolev_method != "tensor")
    throw ConfigError("seminorm.method must be stratified, plain or tensor");

  if (auto v = get("bmo.base")) c.base = *v;
  if (auto v = get("bmo.frequency")) c.frequency = parse_int("frequency", *v);
  if (auto v = get("bmo.epsilons")) c.epsilons = parse_double_list("epsilons", *v);
  if (auto v = get("bmo.reference")) c.reference = *v;
  if (auto v = get("bmo.min_radius")) c.bmo.min_radius = parse_double("min_radius", *v);
  if (auto v = get("bmo.centers")) c.bmo.centers = parse_int("centers", *v);
  if (auto v = get("bmo.points")) c.bmo.points_per_cap = parse_int("points", *v);
  if (auto v = get("bmo.seed")) c.bmo.seed = static_cast<std::uint64_t>(parse_int("seed", *v));
  if (auto v = get("bmo.poisson_level")) c.poisson_level = parse_int("poisson_level", *v);
  if (auto v = get("bmo.probe_radii")) c.probe_radii = parse_double_list("probe_radii", *v);
  if (auto v = get("bmo.degree_level")) c.degree_level = parse_int("degree_level", *v);

  if (auto v = get("output.json")) c.json_path = *v;
  if (auto v = get("output.csv")) c.csv_path = *v;
  if (auto v = get("output.text")) c.text_path = *v;

  if (c.kind == "scaling") {
    if (c.family.empty()) throw ConfigError("experiment.family is required");
    if (c.structure.empty()) throw ConfigError("experiment.structure is required");
    if (c.betas.empty()) throw ConfigError("experiment.betas is required");
  } else {
    if (c.base.empty()) throw ConfigError("bmo.base is required");
    if (c.reference.empty()) throw ConfigError("bmo.reference is required");
    if (c.epsilons.empty()) throw ConfigError("bmo.epsilons is required");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return from_tree(tree);
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return from_tree(tree);
}

int default_level(int domain_dim) {
  switch (domain_dim) {
    case 1:
      return 7;
    case 2:
      return 5;
    default:
      return 3;
  }
}

std::string instantiate_family(const std::string& family, int parameter) {
  std::string out = family;
  const std::string value = std::to_string(parameter);
  for (std::size_t pos = out.find("{d}"); pos != std::string::npos; pos = out.find("{d}", pos + value.size()))
    out.replace(pos, 3, value);
  return out;
}

InvariantValue evaluate_invariant(const SmoothMap& f, const ThresholdReport& s, const ExperimentConfig& config) {
  if (!s.evaluable) throw Error("structure '" + s.name + "' is symbolic only");
  if (f.domain_dim() != s.n)
    throw Error("map domain S" + std::to_string(f.domain_dim()) + " does not match structure '" + s.name + "'");
  InvariantValue out;
  if (config.invariant_method == "oracle") {
    if (s.name != "hopf:n=1") throw Error("the linking oracle applies to the Hopf structure only");
    const LinkingResult r =
        gauss_linking_oracle(f, Vec{0.0, 1.0, 0.0}, normalized(Vec{0.3, -0.5, 0.8}, 3));
    out.value = r.value;
    out.error = std::abs(r.value - static_cast<double>(r.nearest));
    return out;
  }
  const int level = config.level < 0 ? default_level(s.n) : config.level;
  out.value = invariant_at(f, s, level);
  if (config.level_error && level - 1 >= min_level(s.n))
    out.error = std::abs(out.value - invariant_at(f, s, level - 1));
  return out;
}

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& sx,
                   const std::vector<double>& sy) {
  const std::size_t n = x.size();
  SlopeFit fit;
  if (n < 2) return fit;
  auto solve = [&](const std::vector<double>& w) {
    double sw = 0, swx = 0, swy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sw += w[i];
      swx += w[i] * x[i];
      swy += w[i] * y[i];
    }
    const double mx = swx / sw, my = swy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += w[i] * (x[i] - mx) * (x[i] - mx);
      sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    SlopeFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double chi2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      chi2 += w[i] * r * r;
    }
    const double scale = n > 2 ? std::max(1.0, chi2 / static_cast<double>(n - 2)) : 1.0;
    f.slope_error = sxx > 0 ? std::sqrt(scale / sxx) : 0.0;
    return f;
  };
  std::vector<double> w(n, 1.0);
  fit = solve(w);
  // Effective variance: σ² = σ_y² + b²σ_x², floored to keep weights finite.
  for (int pass = 0; pass < 3; ++pass) {
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (sy[i] * sy[i] + fit.slope * fit.slope * sx[i] * sx[i] + 1e-8);
    fit = solve(w);
  }
  return fit;
}

ScalingReport run_scaling(const ExperimentConfig& config) {
  ScalingReport report;
  report.config = config;
  const ThresholdReport* st = nullptr;
  try {
    st = &lookup(config.structure);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!st->evaluable) throw ConfigError("structure '" + st->name + "' is symbolic only");
  report.structure = st->name;
  report.n = st->n;
  report.l = st->l;
  const auto guard = st->guard();
  report.threshold = guard ? to_string(*guard) : "n/a";

  std::vector<bool> informational;
  for (const auto& beta : config.betas) {
    if (beta <= 0 || beta > 1) throw ConfigError("beta " + to_string(beta) + " outside (0,1]");
    if (config.seminorm == "sobolev" && beta == 1) throw ConfigError("the Sobolev seminorm needs beta < 1");
    const bool below = guard && beta <= *guard;
    if (below && !config.allow_below_threshold)
      throw ConfigError("beta " + to_string(beta) + " does not exceed the threshold " + to_string(*guard) +
                        " of structure '" + st->name + "'");
    if (below)
      report.warnings.push_back("beta " + to_string(beta) + " <= threshold " + to_string(*guard) +
                                ": outside theorem hypothesis, rows are informational");
    informational.push_back(below);
  }

  std::vector<int> sweep = config.sweep;
  std::sort(sweep.begin(), sweep.end());
  const std::size_t nb = config.betas.size(), np = sweep.size();
  std::vector<ScalingRow> rows(nb * np);
  parallel_chunks(np, [&](std::size_t i) {
    const int d = sweep[i];
    const std::string spec = instantiate_family(config.family, d);
    InvariantValue inv;
    MapPtr f;
    std::string failure;
    try {
      f = parse_map(spec, st->n);
      inv = evaluate_invariant(*f, *st, config);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    for (std::size_t b = 0; b < nb; ++b) {
      ScalingRow& row = rows[b * np + i];
      row.parameter = d;
      row.map = f ? f->spec() : spec;
      row.beta = to_string(config.betas[b]);
      row.informational = informational[b];
      row.error = failure;
      if (!failure.empty()) continue;
      row.invariant = inv.value;
      row.invariant_error = inv.error;
      row.nearest = std::lround(inv.value);
      const double beta = to_double(config.betas[b]);
      try {
        SeminormEstimate e;
        if (config.seminorm == "sobolev") {
          SobolevOptions o;
          o.beta = beta;
          o.p = st->n / beta;
          o.samples = config.samples;
          o.seed = config.seed;
          o.method = config.sobolev_method == "plain"    ? SobolevMethod::plain
                     : config.sobolev_method == "tensor" ? SobolevMethod::tensor
                                                         : SobolevMethod::stratified;
          e = sobolev_seminorm(*f, o);
        } else {
          HolderOptions o;
          o.beta = beta;
          o.samples = config.samples;
          o.seed = config.seed;
          e = holder_seminorm(*f, o);
        }
        row.seminorm = e.value;
        row.seminorm_error = e.error;
        row.seminorm_method = e.method;
        const double ex = to_double(st->exponent_at(config.betas[b]));
        if (e.value > 0.0) {
          const double a = std::abs(inv.value);
          row.ratio = a / std::pow(e.value, ex);
          const double rel_s = ex * e.error / e.value;
          row.ratio_error = a > 0.0 ? row.ratio * std::hypot(inv.error / a, rel_s) : inv.error / std::pow(e.value, ex);
        }
      } catch (const std::exception& ex) {
        row.error = ex.what();
      }
    }
  });
  report.rows = std::move(rows);

  bool any_decisive = false, all_pass = true;
  for (std::size_t b = 0; b < nb; ++b) {
    ScalingFit fit;
    fit.beta = to_string(config.betas[b]);
    const Rational ex = st->exponent_at(config.betas[b]);
    fit.exponent = to_string(ex);
    fit.exponent_value = to_double(ex);
    fit.informational = informational[b];
    std::vector<double> x, y, sx, sy, ratios;
    bool errors = false;
    for (std::size_t i = 0; i < np; ++i) {
      const ScalingRow& r = report.rows[b * np + i];
      if (!r.error.empty()) {
        errors = true;
        continue;
      }
      // Rows in the trivial class satisfy the inequality and carry no scaling information.
      if (r.nearest == 0 || r.seminorm <= 0.0) continue;
      x.push_back(std::log(r.seminorm));
      y.push_back(std::log(std::abs(r.invariant)));
      sx.push_back(r.seminorm_error / r.seminorm);
      sy.push_back(r.invariant_error / std::abs(r.invariant));
      ratios.push_back(r.ratio);
    }
    fit.points = static_cast<int>(x.size());
    if (!ratios.empty()) {
      fit.ratio_median = median(ratios);
      fit.ratio_max = *std::max_element(ratios.begin(), ratios.end());
      fit.ratio_min = *std::min_element(ratios.begin(), ratios.end());
      fit.bounded = fit.ratio_max <= 3.0 * fit.ratio_median && fit.ratio_min >= fit.ratio_median / 3.0;
    }
    if (fit.points >= 2) {
      const SlopeFit s = fit_slope(x, y, sx, sy);
      fit.slope = s.slope;
      fit.slope_error = s.slope_error;
      fit.slope_ok = s.slope <= fit.exponent_value * 1.15;
    }
    fit.pass = !fit.informational && !errors && fit.bounded && fit.slope_ok;
    if (!fit.informational) {
      any_decisive = true;
      all_pass = all_pass && fit.pass;
    }
    report.fits.push_back(fit);
  }
  report.verdict = !any_decisive ? "INFORMATIONAL" : (all_pass ? "PASS" : "FAIL");
  return report;
}

BmoReport run_bmo_probe(const ExperimentConfig& config) {
  BmoReport report;
  report.config = config;
  MapPtr base, reference;
  try {
    base = parse_map(config.base, 2);
    reference = parse_map(config.reference, base->domain_dim());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const int n = base->domain_dim();
  if (base->target().is_product() || base->target().dimension() != n)
    throw ConfigError("the BMO probe needs maps S^N -> S^N");
  if (reference->domain_dim() != n) throw ConfigError("reference map has a different domain");
  for (double e : config.epsilons)
    if (e < 0.0) throw ConfigError("epsilons must be non-negative");

  const SeminormEstimate ref = bmo_seminorm(*reference, config.bmo);
  report.reference = reference->spec();
  report.reference_bmo = ref.value;
  report.reference_error = ref.error;
  report.expected_degree = mapping_degree(*base, shared_mesh(n, config.degree_level)).nearest;
  const MeshPtr poisson_mesh = shared_mesh(n, config.poisson_level);
  const std::vector<Vec> probes = default_poisson_probes(n, config.probe_radii);

  std::vector<BmoRow> rows(config.epsilons.size());
  parallel_chunks(rows.size(), [&](std::size_t i) {
    BmoRow& row = rows[i];
    row.epsilon = config.epsilons[i];
    try {
      const MapPtr f = make_oscillation_perturbation(base, row.epsilon, config.frequency);
      row.map = f->spec();
      const SeminormEstimate b = bmo_seminorm(*f, config.bmo);
      row.bmo = b.value;
      row.bmo_error = b.error;
      for (const auto& p : poisson_extension_distance(*f, probes, poisson_mesh))
        row.max_distance = std::max(row.max_distance, p.distance);
      row.ratio = row.bmo > 0.0 ? row.max_distance / row.bmo : 0.0;
      const InvariantResult d = mapping_degree(*f, shared_mesh(n, config.degree_level));
      row.degree = d.value;
      row.nearest = d.nearest;
      row.small_bmo = row.bmo < report.reference_bmo;
      row.degree_ok = std::abs(row.degree - static_cast<double>(report.expected_degree)) <= 1e-3;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  report.rows = std::move(rows);

  bool errors = false, any_small = false;
  report.degree_pass = true;
  double lo = 0.0, hi = 0.0;
  for (const auto& r : report.rows) {
    if (!r.error.empty()) {
      errors = true;
      continue;
    }
    if (r.small_bmo) {
      any_small = true;
      report.degree_pass = report.degree_pass && r.degree_ok;
    }
    if (r.bmo > 0.0) {
      lo = lo == 0.0 ? r.ratio : std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
  }
  report.degree_pass = report.degree_pass && any_small;
  report.ratio_spread = lo > 0.0 ? hi / lo : 0.0;
  report.ratio_pass = lo > 0.0 && report.ratio_spread <= 3.0;
  if (!any_small) report.warnings.push_back("no row has BMO below the reference");
  report.verdict = !errors && report.degree_pass && report.ratio_pass ? "PASS" : "FAIL";
  return report;
}

}  // namespace qtopo
