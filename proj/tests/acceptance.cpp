// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance <source-dir> <cli-binary>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qtopo/cochain.hpp"
#include "qtopo/harness.hpp"
#include "qtopo/hodge.hpp"
#include "qtopo/invariants.hpp"
#include "qtopo/registry.hpp"
#include "qtopo/seminorms.hpp"

using namespace qtopo;

namespace {

std::string source_dir, cli;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

// --- oracles ---------------------------------------------------------------

double sigma_oracle(double a, int m0, int mmax) {
  const double first = m0 / (m0 + 1.0) + std::max(0.0, 1.0 / (m0 + 1.0) - a / m0);
  const double second = mmax / (mmax + 1.0) + std::max(0.0, a / mmax - 1.0 / (mmax * (mmax + 1.0)));
  return std::max(first, second);
}

// Grid scan followed by golden-section refinement of the bracketing cell.
double minimize_sigma_oracle(int m0, int mmax) {
  const int n = 4000;
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (sigma_oracle(double(i) / n, m0, mmax) < sigma_oracle(double(best) / n, m0, mmax)) best = i;
  double lo = std::max(0.0, (best - 1.0) / n), hi = std::min(1.0, (best + 1.0) / n);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (sigma_oracle(a, m0, mmax) <= sigma_oracle(b, m0, mmax))
      hi = b;
    else
      lo = a;
  }
  return sigma_oracle(0.5 * (lo + hi), m0, mmax);
}

double tracked_winding(const SmoothMap& f, int samples) {
  double total = 0.0;
  Vec prev = f.value({1.0, 0.0});
  for (int i = 1; i <= samples; ++i) {
    const double t = 2.0 * kPi * i / samples;
    const Vec y = f.value({std::cos(t), std::sin(t)});
    total += std::atan2(prev[0] * y[1] - prev[1] * y[0], prev[0] * y[0] + prev[1] * y[1]);
    prev = y;
  }
  return total / (2.0 * kPi);
}

// The identity's Gagliardo integral depends only on the angle t between the
// points: W^p = 2π ∫₀^{2π} (2 sin(t/2))^{p−1−βp} dt.
double identity_circle_oracle(double beta, double p) {
  const double a = p - 1.0 - beta * p;
  auto g = [&](double t) { return std::pow(2.0 * std::sin(0.5 * t), a); };
  const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 2.0 * kPi, 30, 1e-13);
  return std::pow(2.0 * kPi * body, 1.0 / p);
}

LambdaForm smooth_zero_form(int dim) {
  return LambdaForm(dim, 0, [dim](const Vec& x, std::span<const Vec>) {
    return std::exp(x[0]) * x[1] + x[2] * x[dim] + 0.3 * std::sin(3.0 * x[2]);
  });
}

LambdaForm smooth_one_form(int dim) {
  return LambdaForm(dim, 1, [dim](const Vec& x, std::span<const Vec> v) {
    const Vec a{x[1] * x[2] + x[dim], std::sin(2.0 * x[0]), x[0] * x[0] - x[1], std::cos(x[1] + x[2]) * x[0], 0.0, 0.0};
    return dot(a, v[0], dim + 1);
  });
}

std::string run_capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw Error("cannot run " + command);
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), pipe)) > 0;) out.append(buf.data(), n);
  pclose(pipe);
  return out;
}

// --- criteria ----------------------------------------------------------------

void thresholds_table(Outcome& o) {
  struct Quoted {
    const char* name;
    Rational beta0;
    const char* exponent;
  };
  const std::vector<Quoted> quoted{
      {"cp2:alpha", Rational(2, 3), "2/beta"},    {"cp2:beta", Rational(5, 6), "6/beta"},
      {"s2xs2:alpha1", Rational(2, 3), "2/beta"}, {"s2xs2:alpha2", Rational(2, 3), "2/beta"},
      {"s2xs2:beta1", Rational(3, 4), "4/beta"},  {"s2xs2:beta2", Rational(3, 4), "4/beta"},
      {"cs:gamma", Rational(3, 4), "6/beta"},     {"cs:delta", Rational(3, 4), "6/beta"},
      {"hopf:n=1", Rational(3, 4), "4/beta"},     {"hopf:n=2", Rational(7, 8), "8/beta"}};
  const std::string table = run_capture("\"" + cli + "\" thresholds --all");
  for (const auto& q : quoted) {
    const ThresholdReport& r = lookup(q.name);
    // The quoted connected-sum value is the theorem threshold; one mixed term of
    // cs:delta has a larger per-term value, which the table reports alongside.
    const Rational& got = std::string(q.name) == "cs:delta" ? *r.theorem_beta0 : *r.beta0;
    o.check(got == q.beta0, std::string(q.name) + " threshold " + to_string(got));
    o.check(r.exponent_formula() == q.exponent, std::string(q.name) + " exponent " + r.exponent_formula());
    std::istringstream in(table);
    bool found = false;
    for (std::string line; std::getline(in, line);) {
      if (line.rfind(std::string(q.name) + " ", 0) != 0) continue;
      found = line.find(" " + to_string(q.beta0) + " ") != std::string::npos &&
              line.find(" " + std::string(q.exponent) + " ") != std::string::npos;
    }
    o.check(found, std::string(q.name) + " missing from CLI table");
  }
  o.detail << "10 quoted entries exact in registry and CLI table; cs:delta per-term "
           << to_string(*lookup("cs:delta").beta0) << " reported beside the quoted 3/4";
}

void beta0_closed_form(Outcome& o) {
  double worst = 0.0;
  int cases = 0;
  for (int m0 = 2; m0 <= 10; ++m0) {
    for (int mm = 2; mm <= 10; ++mm) {
      const double closed = to_double(beta0(m0, {mm}).beta0);
      worst = std::max(worst, std::abs(closed - minimize_sigma_oracle(m0, mm)));
      o.check(sigma(Rational(0), m0, {mm}) == 1 && sigma(Rational(1), m0, {mm}) == 1,
              "sigma endpoints for " + std::to_string(m0) + "," + std::to_string(mm));
      ++cases;
    }
  }
  o.check(cases == 81, "case count");
  o.check(worst < 1e-9, "max deviation " + fmt(worst));
  o.detail << cases << " cases, max |closed - numeric| = " << fmt(worst, 3) << ", sigma(0) = sigma(1) = 1 exactly";
}

void winding(Outcome& o) {
  const MeshPtr mesh = make_sphere_mesh(1, 7);
  double worst = 0.0;
  for (int d = -10; d <= 10; ++d)
    worst = std::max(worst, std::abs(winding_number(*make_circle_power(d), mesh).value - d));
  o.check(worst < 1e-12, "circle powers off by " + fmt(worst));
  int matched = 0;
  const std::vector<std::string> perturbed{"perturb:eps=0.1,m=7|circle-power:d=2",
                                           "perturb:eps=0.15,m=5|circle-power:d=-3",
                                           "perturb:eps=0.19,m=11|circle-power:d=1",
                                           "perturb:eps=0.12,m=9|circle-power:d=6"};
  for (const auto& spec : perturbed) {
    const MapPtr f = parse_map(spec);
    const bool ok = winding_number(*f, mesh).nearest == std::lround(tracked_winding(*f, 1 << 16));
    o.check(ok, spec);
    matched += ok;
  }
  o.detail << "max |w - d| = " << fmt(worst, 3) << " for d in -10..10; " << matched << "/" << perturbed.size()
           << " perturbed maps match argument tracking";
}

void degree(Outcome& o) {
  const MeshPtr mesh = make_sphere_mesh(2, 5);
  double worst = 0.0;
  for (int d = 1; d <= 5; ++d)
    worst = std::max(worst, std::abs(mapping_degree(*make_sphere_suspension(d), mesh).value - d));
  const double anti = mapping_degree(*make_antipodal(2), mesh).value;
  o.check(worst < 1e-3, "suspension off by " + fmt(worst));
  o.check(std::abs(anti + 1.0) < 1e-4, "antipodal " + fmt(anti, 10));
  o.detail << "max |deg - d| = " << fmt(worst, 3) << " for d = 1..5, antipodal " << fmt(anti, 10);
}

void hodge(Outcome& o) {
  struct Case {
    int dim, level, degree;
  };
  double worst_res = 0.0, worst_coex = 0.0;
  for (const Case c : {Case{2, 5, 1}, Case{3, 2, 1}, Case{3, 2, 2}}) {
    const MeshPtr mesh = make_sphere_mesh(c.dim, c.level);
    const auto cx = std::make_shared<const WhitneyComplex>(mesh);
    const Cochain alpha = c.degree == 1 ? de_rham_project(smooth_zero_form(c.dim), mesh)
                                        : de_rham_project(smooth_one_form(c.dim), mesh);
    const Cochain eta = exterior_derivative(alpha);
    const Cochain xi = d_inverse(cx, eta);
    const double n = cx->norm(eta);
    worst_res = std::max(worst_res, cx->norm(exterior_derivative(xi) - eta) / n);
    worst_coex = std::max(worst_coex, coexactness_defect(*cx, xi) / n);
  }
  o.check(worst_res < 1e-6, "round trip " + fmt(worst_res));
  o.check(worst_coex < 1e-6, "co-exactness " + fmt(worst_coex));

  InvariantOptions opts;
  opts.hodge.tolerance = 1e-11;
  PullbackForm hopf_form(make_hopf(), TargetForm::get("s2:vol"));
  std::vector<double> res;
  for (int level = 1; level <= 3; ++level) {
    const MeshPtr mesh = make_sphere_mesh(3, level);
    const auto cx = std::make_shared<const WhitneyComplex>(mesh);
    const Cochain eta = project_closed_pullback(hopf_form, mesh, *cx, opts);
    const Cochain xi = d_inverse(cx, eta, opts.hodge);
    res.push_back(cx->norm(exterior_derivative(xi) - eta) / cx->norm(eta));
  }
  o.check(res[0] > res[1] && res[1] > res[2], "Hopf residual not monotone");
  o.detail << "test forms: residual " << fmt(worst_res, 3) << ", co-exactness " << fmt(worst_coex, 3)
           << "; Hopf pullback residual L1..L3 " << fmt(res[0], 3) << " > " << fmt(res[1], 3) << " > "
           << fmt(res[2], 3) << " (solver tolerance 1e-11)";
}

void hopf(Outcome& o) {
  const MapPtr h = make_hopf();
  std::array<double, 4> value{};
  std::array<ComplexPtr, 4> cx;
  for (int level = 2; level <= 3; ++level) {
    cx[level] = std::make_shared<const WhitneyComplex>(make_sphere_mesh(3, level));
    value[level] = hopf_invariant(*h, cx[level]->mesh_ptr(), {}, cx[level]).value;
  }
  const LinkingResult link = gauss_linking_oracle(*h, {0.0, 1.0, 0.0}, normalized(Vec{0.3, -0.5, 0.8}, 3));
  const double err3 = std::abs(value[3] - value[2]);
  const double link_err = 1e-3;
  const double comp = hopf_invariant(*parse_map("compose:suspension:d=2|hopf"), cx[3]->mesh_ptr(), {}, cx[3]).value;
  o.check(value[2] >= 0.9 && value[2] <= 1.1, "level 2 value " + fmt(value[2]));
  o.check(std::abs(value[3] - link.value) < std::abs(value[2] - link.value), "no improvement at level 3");
  o.check(std::abs(link.value - 1.0) < 1e-3, "linking oracle " + fmt(link.value));
  o.check(std::abs(value[3] - link.value) <= err3 + link_err, "pipeline and oracle disagree");
  o.check(std::abs(comp - 4.0) <= 0.15 * 4.0, "composition " + fmt(comp));
  o.detail << "L2 " << fmt(value[2]) << ", L3 " << fmt(value[3]) << " +- " << fmt(err3, 3) << ", oracle "
           << fmt(link.value, 8) << ", suspension(2) o hopf " << fmt(comp);
}

void product_structures(Outcome& o) {
  const MeshPtr mesh = make_sphere_mesh(3, 2);
  const auto cx = std::make_shared<const WhitneyComplex>(mesh);
  const MapPtr hc = parse_map("product:hopf,const");
  const double h = hopf_invariant(*make_hopf(), mesh, {}, cx).value;
  const double b1 = hardt_riviere(*hc, DegreeStructure::s2xs2_beta(1), mesh, {}, cx).value;
  const double b2 = hardt_riviere(*hc, DegreeStructure::s2xs2_beta(2), mesh, {}, cx).value;
  o.check(std::abs(b1 - h) < 1e-9, "beta1 vs hopf " + fmt(b1 - h, 3));
  o.check(std::abs(b2) < 1e-9, "beta2 " + fmt(b2, 3));
  o.detail << "|d_beta1 - d_H| = " << fmt(std::abs(b1 - h), 3) << ", |d_beta2| = " << fmt(std::abs(b2), 3);
}

void seminorm_oracle(Outcome& o) {
  SobolevOptions s;
  s.beta = 0.5;
  s.p = 2.0;
  s.samples = 1000000;
  s.seed = 11;
  const SeminormEstimate e = sobolev_seminorm(*make_identity(1), s);
  const double oracle = identity_circle_oracle(0.5, 2.0);
  const double rel = std::abs(e.value - oracle) / oracle;
  o.check(rel < 0.01, "identity off by " + fmt(rel));

  bool zero = true;
  for (int n = 1; n <= 3; ++n) {
    SobolevOptions c = s;
    c.samples = 20000;
    c.p = n / 0.5;
    zero = zero && sobolev_seminorm(*make_constant(n, Target::sphere(2)), c).value == 0.0;
  }
  o.check(zero, "constant map not exactly zero");

  const MapPtr f = parse_map("suspension:d=2");
  SobolevOptions r;
  r.beta = 0.7;
  r.p = 2.0 / 0.7;
  r.samples = 200000;
  r.seed = 5;
  const SeminormEstimate base = sobolev_seminorm(*f, r);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SeminormEstimate rot = sobolev_seminorm(*make_rotated(f, seed), r);
    worst = std::max(worst, std::abs(rot.value - base.value) / std::hypot(rot.error, base.error));
  }
  o.check(worst <= 2.0, "rotation deviation " + fmt(worst) + " SE");
  o.detail << "identity " << fmt(e.value, 9) << " vs oracle " << fmt(oracle, 9) << " (" << fmt(100 * rel, 3)
           << "%), constants exactly 0, rotations within " << fmt(worst, 3) << " SE";
}

ScalingReport circle_report, hopf_report;
BmoReport bmo_report;

void scaling(Outcome& o) {
  circle_report = run_scaling(ExperimentConfig::load(source_dir + "/configs/circle_power.ini"));
  hopf_report = run_scaling(ExperimentConfig::load(source_dir + "/configs/hopf_composition.ini"));
  for (const ScalingReport* r : {&circle_report, &hopf_report}) {
    const ScalingFit& f = r->fits.at(0);
    o.check(r->pass(), r->config.name + " verdict " + r->verdict);
    o.detail << r->config.name << ": slope " << fmt(f.slope, 4) << " <= " << fmt(1.15 * f.exponent_value, 4)
             << ", ratio max/min over median " << fmt(f.ratio_max / f.ratio_median, 3) << "/"
             << fmt(f.ratio_min / f.ratio_median, 3) << ", " << r->verdict << "; ";
  }
  std::vector<long> nearest;
  for (const auto& row : hopf_report.rows) nearest.push_back(row.nearest);
  o.check(nearest == std::vector<long>{1, 4, 9}, "Hopf composition invariants");
}

void bmo_probe(Outcome& o) {
  bmo_report = run_bmo_probe(ExperimentConfig::load(source_dir + "/configs/bmo_constant.ini"));
  o.check(bmo_report.degree_pass, "degree");
  o.check(bmo_report.ratio_pass, "distance/BMO spread " + fmt(bmo_report.ratio_spread, 3) + " > 3");
  double worst = 0.0;
  for (const auto& r : bmo_report.rows) worst = std::max(worst, std::abs(r.degree));
  o.detail << "reference BMO " << fmt(bmo_report.reference_bmo, 4) << "; max |degree| " << fmt(worst, 3)
           << "; distance/BMO";
  for (const auto& r : bmo_report.rows) o.detail << " " << fmt(r.ratio, 3);
  o.detail << " (spread " << fmt(bmo_report.ratio_spread, 3) << ")";
}

void reproducibility(Outcome& o) {
  int compared = 0;
  auto same = [&](const std::string& what, const std::string& a, const std::string& b) {
    o.check(a == b && !a.empty(), what);
    ++compared;
  };
  same("circle scaling", canonical_json(to_json(circle_report)),
       canonical_json(to_json(run_scaling(circle_report.config))));
  same("hopf scaling", canonical_json(to_json(hopf_report)), canonical_json(to_json(run_scaling(hopf_report.config))));
  same("bmo probe", canonical_json(to_json(bmo_report)), canonical_json(to_json(run_bmo_probe(bmo_report.config))));

  const std::string q = "\"" + cli + "\" ";
  const std::vector<std::string> commands{
      "thresholds --all --format json",
      "invariant --map 'perturb:eps=0.1,m=7|circle-power:d=2'",
      "seminorm --map identity:n=1 --kind sobolev --beta 1/2 --p 2 --samples 200000 --seed 4",
      "seminorm --map suspension:d=2 --kind bmo --seed 4",
      "verify scaling --config " + source_dir + "/configs/circle_power.ini --format json",
      "verify bmo --config " + source_dir + "/configs/bmo_constant.ini --format json"};
  for (const auto& c : commands) {
    auto once = [&] {
      const std::string out = run_capture(q + c + " 2>/dev/null");
      return canonical_json(nlohmann::json::parse(out));
    };
    std::string a, b;
    try {
      a = once();
      b = once();
    } catch (const std::exception& e) {
      o.check(false, c + ": " + e.what());
      continue;
    }
    same(c, a, b);
  }
  o.detail << compared << " reruns byte-identical after dropping the timestamp";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <source-dir> <cli-binary>\n";
    return 2;
  }
  source_dir = argv[1];
  cli = argv[2];
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
    double budget;  // seconds; 0 when unbounded
  };
  const std::vector<Criterion> criteria{{"threshold table", thresholds_table, 1.0},
                                        {"beta0 closed form", beta0_closed_form, 5.0},
                                        {"winding number", winding, 5.0},
                                        {"degree on S2", degree, 30.0},
                                        {"Hodge contract", hodge, 0.0},
                                        {"Hopf invariant", hopf, 600.0},
                                        {"S2xS2 structures", product_structures, 0.0},
                                        {"seminorm oracle", seminorm_oracle, 0.0},
                                        {"scaling sweeps", scaling, 1200.0},
                                        {"BMO probe", bmo_probe, 0.0},
                                        {"reproducibility", reproducibility, 0.0}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (criteria[i].budget > 0.0) o.check(secs < criteria[i].budget, "over the " + fmt(criteria[i].budget) + " s budget");
    failed += !o.pass;
    std::cout << "criterion " << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].name << ": "
              << o.detail.str() << " [" << fmt(secs, 3) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass" << std::endl;
  return failed == 0 ? 0 : 1;
}
