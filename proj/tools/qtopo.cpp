#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qtopo/harness.hpp"
#include "qtopo/invariants.hpp"
#include "qtopo/mesh.hpp"
#include "qtopo/registry.hpp"
#include "qtopo/seminorms.hpp"

using nlohmann::json;
using namespace qtopo;

namespace {

struct MeshArgs {
  int dim = 2;
  int level = 3;
  std::string out;
};

struct ThresholdArgs {
  bool all = false;
  std::string structure;
  int m0 = 0;
  std::vector<int> mi;
  std::string format = "text";
};

struct InvariantArgs {
  std::string map;
  int level = -1;
  std::string structure;
  std::string method = "pipeline";
};

struct SeminormArgs {
  std::string map;
  std::string kind = "sobolev";
  std::string beta = "1/2";
  double p = 0.0;
  long samples = 100000;
  std::uint64_t seed = 1;
  std::string method = "stratified";
};

struct VerifyArgs {
  std::string config;
  std::string format = "text";
};

MapPtr parse_map_arg(const std::string& spec) {
  try {
    return parse_map(spec);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

int run_mesh(const MeshArgs& a) {
  const SimplicialSphere mesh = build_sphere_mesh(a.dim, a.level);
  if (a.out.empty() || a.out == "-") {
    write_mesh(mesh, std::cout);
  } else {
    std::ostringstream os;
    write_mesh(mesh, os);
    write_file(a.out, os.str());
  }
  return 0;
}

int run_thresholds(const ThresholdArgs& a) {
  std::vector<ThresholdReport> reports;
  if (!a.structure.empty()) {
    reports.push_back(lookup(a.structure));
  } else if (a.m0 > 0) {
    reports.push_back(thresholds(a.m0, a.mi));
  } else {
    reports = catalogue();
  }
  const ReportFormat f = parse_format(a.format);
  if (f == ReportFormat::json) {
    json out = json::array();
    for (const auto& r : reports) out.push_back(to_json(r));
    std::cout << out.dump(2) << "\n";
  } else if (f == ReportFormat::text) {
    std::cout << format_table(reports);
  } else {
    throw ConfigError("thresholds supports json and text output");
  }
  return 0;
}

// Structure implied by the map's domain and target when none is named.
std::string default_structure(const SmoothMap& f) {
  const Target& t = f.target();
  if (t.is_product()) throw ConfigError("maps into S2xS2 need --structure");
  if (f.domain_dim() == 1 && t.dimension() == 1) return "s1:winding";
  if (f.domain_dim() == 2 && t.dimension() == 2) return "s2:degree";
  if (f.domain_dim() == 3 && t.dimension() == 3) return "s3:degree";
  if (f.domain_dim() == 3 && t.dimension() == 2) return "hopf:n=1";
  throw ConfigError("no invariant for this domain and target");
}

int run_invariant(const InvariantArgs& a) {
  const MapPtr f = parse_map_arg(a.map);
  const ThresholdReport& s = lookup(a.structure.empty() ? default_structure(*f) : a.structure);
  ExperimentConfig c;
  c.level = a.level;
  c.invariant_method = a.method;
  const InvariantValue v = evaluate_invariant(*f, s, c);
  json out{{"map", f->spec()},
           {"structure", s.name},
           {"method", a.method},
           {"level", a.method == "oracle" ? -1 : (a.level < 0 ? default_level(s.n) : a.level)},
           {"value", v.value},
           {"error", v.error},
           {"nearest", std::lround(v.value)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_seminorm(const SeminormArgs& a) {
  const MapPtr f = parse_map_arg(a.map);
  const double beta = to_double(parse_rational(a.beta));
  SeminormEstimate e;
  if (a.kind == "sobolev") {
    SobolevOptions o;
    o.beta = beta;
    o.p = a.p > 0.0 ? a.p : f->domain_dim() / beta;
    o.samples = a.samples;
    o.seed = a.seed;
    o.method = a.method == "plain"    ? SobolevMethod::plain
               : a.method == "tensor" ? SobolevMethod::tensor
                                      : SobolevMethod::stratified;
    e = sobolev_seminorm(*f, o);
  } else if (a.kind == "holder") {
    HolderOptions o;
    o.beta = beta;
    o.samples = a.samples;
    o.seed = a.seed;
    e = holder_seminorm(*f, o);
  } else {
    BmoOptions o;
    o.seed = a.seed;
    e = bmo_seminorm(*f, o);
  }
  json out = to_json(e);
  out["map"] = f->spec();
  out["kind"] = a.kind;
  std::cout << out.dump(2) << "\n";
  return 0;
}

template <class Report>
int finish(const Report& r, const std::string& format) {
  emit_outputs(r);
  std::cout << render(r, parse_format(format));
  return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological invariants and seminorm bounds for sphere maps"};
  app.require_subcommand(1);

  MeshArgs mesh_args;
  auto* mesh = app.add_subcommand("mesh", "Mesh utilities");
  mesh->require_subcommand(1);
  auto* gen = mesh->add_subcommand("gen", "Write a sphere mesh in the ASCII exchange format");
  gen->add_option("--dim", mesh_args.dim, "Sphere dimension")->check(CLI::Range(1, 3));
  gen->add_option("--level", mesh_args.level, "Refinement level")->check(CLI::Range(0, 12));
  gen->add_option("--out", mesh_args.out, "Output file (default stdout)");

  ThresholdArgs th;
  auto* thr = app.add_subcommand("thresholds", "Exponent thresholds of representation formulas");
  auto* all = thr->add_flag("--all", th.all, "Every catalogue entry (default)");
  auto* by_name = thr->add_option("--structure", th.structure, "Catalogue entry name");
  auto* m0 = thr->add_option("--M0", th.m0, "Degree of the first factor")->check(CLI::PositiveNumber);
  auto* mi = thr->add_option("--Mi", th.mi, "Degrees of the remaining factors")->delimiter(',');
  m0->needs(mi);
  mi->needs(m0);
  all->excludes(by_name)->excludes(m0);
  by_name->excludes(m0);
  thr->add_option("--format", th.format, "json or text")->check(CLI::IsMember({"json", "text"}));

  InvariantArgs inv;
  auto* invc = app.add_subcommand("invariant", "Evaluate the invariant of a map");
  invc->add_option("--map", inv.map, "Map spec")->required();
  invc->add_option("--level", inv.level, "Mesh level (default by dimension)");
  invc->add_option("--structure", inv.structure, "Catalogue structure (default from domain and target)");
  invc->add_option("--method", inv.method, "pipeline or oracle")->check(CLI::IsMember({"pipeline", "oracle"}));

  SeminormArgs sem;
  auto* semc = app.add_subcommand("seminorm", "Estimate a seminorm of a map");
  semc->add_option("--map", sem.map, "Map spec")->required();
  semc->add_option("--kind", sem.kind, "sobolev, holder or bmo")
      ->check(CLI::IsMember({"sobolev", "holder", "bmo"}));
  semc->add_option("--beta", sem.beta, "Smoothness exponent (rational or decimal)");
  semc->add_option("--p", sem.p, "Integrability exponent (default N/beta)");
  semc->add_option("--samples", sem.samples, "Sample budget")->check(CLI::PositiveNumber);
  semc->add_option("--seed", sem.seed, "Random seed");
  semc->add_option("--method", sem.method, "stratified, plain or tensor")
      ->check(CLI::IsMember({"stratified", "plain", "tensor"}));

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run an experiment from a config file");
  verify->require_subcommand(1);
  auto* scaling = verify->add_subcommand("scaling", "Scaling study");
  auto* bmo = verify->add_subcommand("bmo", "BMO probe");
  for (auto* sub : {scaling, bmo}) {
    sub->add_option("--config", ver.config, "Config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--format", ver.format, "Console format: json, csv or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return run_mesh(mesh_args);
    if (*thr) return run_thresholds(th);
    if (*invc) return run_invariant(inv);
    if (*semc) return run_seminorm(sem);
    if (*scaling) {
      const ExperimentConfig c = ExperimentConfig::load(ver.config);
      if (c.kind != "scaling") throw ConfigError("config kind is not scaling");
      return finish(run_scaling(c), ver.format);
    }
    if (*bmo) {
      const ExperimentConfig c = ExperimentConfig::load(ver.config);
      if (c.kind != "bmo") throw ConfigError("config kind is not bmo");
      return finish(run_bmo_probe(c), ver.format);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
