#include "qtopo/registry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "qtopo/core.hpp"

namespace qtopo {

namespace {

Rational positive_part(const Rational& r) { return r > 0 ? r : Rational(0); }

void check_degrees(int m0, const std::vector<int>& mi, int min_m0) {
  if (m0 < min_m0) throw Error("invalid degrees: M0 = " + std::to_string(m0));
  for (int m : mi)
    if (m < 2) throw Error("invalid degrees: Mi = " + std::to_string(m));
}

}  // namespace

std::string to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  return den == 1 ? num.str() : num.str() + "/" + den.str();
}

Rational parse_rational(const std::string& text) {
  using boost::multiprecision::cpp_int;
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw Error("empty rational");
  auto integer = [&](const std::string& t) {
    if (t.empty() || t.find_first_not_of("+-0123456789") != std::string::npos || t.find_first_of("+-", 1) != std::string::npos)
      throw Error("malformed rational '" + text + "'");
    return cpp_int(t);
  };
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const cpp_int den = integer(s.substr(slash + 1));
    if (den == 0) throw Error("zero denominator in '" + text + "'");
    return Rational(integer(s.substr(0, slash)), den);
  }
  if (const auto dot = s.find('.'); dot != std::string::npos) {
    const std::string frac = s.substr(dot + 1);
    if (frac.find_first_not_of("0123456789") != std::string::npos) throw Error("malformed rational '" + text + "'");
    std::string whole = s.substr(0, dot);
    const bool negative = !whole.empty() && whole[0] == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    cpp_int scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const cpp_int f = frac.empty() ? cpp_int(0) : cpp_int(frac);
    const cpp_int w = integer(whole);
    return Rational(w * scale + (negative ? -f : f), scale);
  }
  return Rational(integer(s));
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational sigma(const Rational& alpha, int m0, const std::vector<int>& mi) {
  if (alpha < 0 || alpha > 1) throw Error("alpha outside [0,1]");
  check_degrees(m0, mi, 1);
  Rational s = Rational(m0, m0 + 1) + positive_part(Rational(1, m0 + 1) - alpha / m0);
  for (int m : mi) s = std::max(s, Rational(m, m + 1) + positive_part(alpha / m - Rational(1, m * (m + 1))));
  return s;
}

double sigma(double alpha, int m0, const std::vector<int>& mi) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha outside [0,1]");
  check_degrees(m0, mi, 1);
  const double a = m0;
  double s = a / (a + 1.0) + std::max(0.0, 1.0 / (a + 1.0) - alpha / a);
  for (int m : mi) {
    const double b = m;
    s = std::max(s, b / (b + 1.0) + std::max(0.0, alpha / b - 1.0 / (b * (b + 1.0))));
  }
  return s;
}

Beta0 beta0(int m0, const std::vector<int>& mi) {
  check_degrees(m0, mi, 2);
  if (mi.empty()) return {Rational(m0, m0 + 1), Rational(m0, m0 + 1)};
  const int mmax = *std::max_element(mi.begin(), mi.end());
  return {Rational(m0 + mmax - 1, m0 + mmax), Rational(m0, m0 + mmax)};
}

NumericMinimum beta0_numeric(int m0, const std::vector<int>& mi, double tolerance) {
  check_degrees(m0, mi, 1);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = sigma(c, m0, mi), fd = sigma(d, m0, mi);
  NumericMinimum out;
  while (b - a > tolerance) {
    // Ties keep the left bracket, so a flat minimum converges to its left end.
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = sigma(c, m0, mi);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = sigma(d, m0, mi);
    }
    ++out.iterations;
  }
  out.alpha = 0.5 * (a + b);
  out.beta0 = sigma(out.alpha, m0, mi);
  return out;
}

Rational exponent(int n, int l, const Rational& beta) {
  if (beta <= 0) throw Error("beta must be positive");
  return Rational(n + l) / beta;
}

Rational theorem_threshold(int n, int l) { return 1 - Rational(1, std::min(n + 1, n + 2 - l)); }

std::optional<Rational> ThresholdReport::guard() const {
  if (beta0 && theorem_beta0) return std::max(*beta0, *theorem_beta0);
  if (beta0) return beta0;
  return theorem_beta0;
}

std::string ThresholdReport::exponent_formula() const { return std::to_string(n + l) + "/beta"; }

bool ThresholdReport::theorem_consistent() const {
  if (!theorem_beta0) return true;
  for (const auto& t : terms)
    if (t.beta0 && *t.beta0 > *theorem_beta0) return false;
  return true;
}

ThresholdReport thresholds(const DegreeStructure& s) {
  s.validate();
  ThresholdReport r;
  r.name = s.name;
  r.structure = s;
  r.n = s.domain_dim;
  r.l = s.length();
  r.evaluable = s.evaluable();
  bool complete = true;
  for (const auto& term : s.terms) {
    TermThreshold t;
    t.degrees = term.degrees;
    t.length = term.length();
    const std::vector<int> mi(term.degrees.begin() + 1, term.degrees.end());
    if (term.degrees[0] >= 2) {
      const Beta0 b = beta0(term.degrees[0], mi);
      t.beta0 = b.beta0;
      t.alpha_star = b.alpha_star;
    } else {
      complete = false;
    }
    if (!mi.empty()) t.degree_bound = term.degrees[0] + *std::max_element(mi.begin(), mi.end()) <= r.n + 2 - t.length;
    r.terms.push_back(std::move(t));
  }
  if (complete) {
    Rational m = 0;
    for (const auto& t : r.terms) m = std::max(m, *t.beta0);
    r.beta0 = m;
  }
  if (r.n >= 2 && r.l <= r.n - 2) r.theorem_beta0 = theorem_threshold(r.n, r.l);
  return r;
}

ThresholdReport thresholds(int m0, const std::vector<int>& mi) {
  DegreeStructure s;
  s.name = "custom";
  int sum = m0;
  for (int m : mi) sum += m;
  s.domain_dim = sum - static_cast<int>(mi.size());
  StructureTerm t;
  t.degrees.push_back(m0);
  t.degrees.insert(t.degrees.end(), mi.begin(), mi.end());
  s.terms.push_back(t);
  return thresholds(s);
}

namespace {

DegreeStructure renamed(DegreeStructure s, std::string name) {
  s.name = std::move(name);
  return s;
}

DegreeStructure symbolic(std::string name, int n, std::vector<std::vector<int>> terms) {
  DegreeStructure s{std::move(name), n, {}};
  for (auto& d : terms) s.terms.push_back({1.0, std::move(d), {}});
  return s;
}

ThresholdReport entry(const DegreeStructure& s, std::string target, std::string description,
                      std::optional<Rational> stated) {
  ThresholdReport r = thresholds(s);
  r.target = std::move(target);
  r.description = std::move(description);
  r.stated_beta0 = std::move(stated);
  if (!r.beta0) r.note = "beta0 not provided by the sigma construction (M0 = 1)";
  if (r.stated_beta0 && r.beta0 && *r.beta0 != *r.stated_beta0)
    r.note = "per-term beta0 " + to_string(*r.beta0) + " exceeds the quoted " + to_string(*r.stated_beta0);
  if (!r.theorem_consistent()) {
    if (!r.note.empty()) r.note += "; ";
    r.note += "theorem threshold below a per-term threshold";
  }
  return r;
}

std::vector<ThresholdReport> build_catalogue() {
  std::vector<ThresholdReport> c;
  c.push_back(entry(renamed(DegreeStructure::winding(), "s1:winding"), "S1", "winding number, int f*dtheta/2pi", std::nullopt));
  c.push_back(entry(renamed(DegreeStructure::sphere_degree(2), "s2:degree"), "S2", "mapping degree, int f*vol", std::nullopt));
  c.push_back(entry(renamed(DegreeStructure::sphere_degree(3), "s3:degree"), "S3", "mapping degree, int f*vol", std::nullopt));
  c.push_back(entry(symbolic("cp2:alpha", 2, {{2}}), "CP2", "int_S2 f*w", Rational(2, 3)));
  c.push_back(entry(symbolic("cp2:beta", 5, {{4, 2}}), "CP2", "int_S5 f*w^2 ^ d^-1 f*w", Rational(5, 6)));
  for (int i = 1; i <= 2; ++i)
    c.push_back(entry(DegreeStructure::s2xs2_alpha(i), "S2xS2", "int_S2 f*w" + std::to_string(i), Rational(2, 3)));
  for (int i = 1; i <= 2; ++i) {
    const std::string w = "f*w" + std::to_string(i);
    c.push_back(entry(DegreeStructure::s2xs2_beta(i), "S2xS2", "int_S3 " + w + " ^ d^-1 " + w, Rational(3, 4)));
  }
  c.push_back(entry(symbolic("cs:gamma", 4, {{2, 2, 2}}), "(S2xS2)#CP2",
                    "int_S4 f*w1 ^ d^-1 f*w2 ^ d^-1 f*w3 (i = 1,2,3)", Rational(3, 4)));
  c.push_back(entry(symbolic("cs:delta", 4, {{3, 2}, {2, 2, 2}, {2, 2, 2}, {2, 2, 2}}), "(S2xS2)#CP2",
                    "int_S4 f*eta ^ d^-1 f*w0 + sum_i int_S4 f*w1 ^ d^-1 f*w2 ^ d^-1 f*w3 (k = 1,2)",
                    Rational(3, 4)));
  c.push_back(entry(renamed(DegreeStructure::hopf(), "hopf:n=1"), "S2", "int_S3 f*vol ^ d^-1 f*vol", Rational(3, 4)));
  c.push_back(entry(symbolic("hopf:n=2", 7, {{4, 4}}), "S4", "int_S7 f*vol ^ d^-1 f*vol", Rational(7, 8)));
  return c;
}

}  // namespace

const std::vector<ThresholdReport>& catalogue() {
  static const std::vector<ThresholdReport> c = build_catalogue();
  return c;
}

const ThresholdReport& lookup(const std::string& name) {
  std::string key = name;
  if (key == "s2xs2:beta") key = "s2xs2:beta1";
  if (key == "s2xs2:alpha") key = "s2xs2:alpha1";
  if (key == "hopf") key = "hopf:n=1";
  if (key == "winding") key = "s1:winding";
  for (const auto& r : catalogue())
    if (r.name == key) return r;
  throw Error("unknown structure '" + name + "'");
}

std::string format_table(const std::vector<ThresholdReport>& reports) {
  auto opt = [](const std::optional<Rational>& r) { return r ? to_string(*r) : std::string("n/a"); };
  std::vector<std::string> degrees(reports.size()), alphas(reports.size());
  std::size_t width = 10;
  for (std::size_t j = 0; j < reports.size(); ++j) {
    const auto& r = reports[j];
    for (std::size_t k = 0; k < r.terms.size(); ++k) {
      if (k) degrees[j] += " ";
      degrees[j] += "[";
      for (std::size_t i = 0; i < r.terms[k].degrees.size(); ++i)
        degrees[j] += (i ? "," : "") + std::to_string(r.terms[k].degrees[i]);
      degrees[j] += "]";
      const std::string a = opt(r.terms[k].alpha_star);
      if (alphas[j].find(a) == std::string::npos) alphas[j] += (alphas[j].empty() ? "" : ",") + a;
    }
    width = std::max(width, degrees[j].size() + 2);
  }
  const int w = static_cast<int>(width);
  std::ostringstream os;
  os << std::left << std::setw(14) << "structure" << std::setw(13) << "target" << std::setw(4) << "N" << std::setw(4)
     << "L" << std::setw(w) << "degrees" << std::setw(8) << "beta0" << std::setw(10) << "alpha*" << std::setw(11)
     << "beta0_thm" << std::setw(8) << "quoted" << std::setw(10) << "exponent"
     << "numeric\n";
  for (std::size_t j = 0; j < reports.size(); ++j) {
    const auto& r = reports[j];
    os << std::setw(14) << r.name << std::setw(13) << r.target << std::setw(4) << r.n << std::setw(4) << r.l
       << std::setw(w) << degrees[j] << std::setw(8) << opt(r.beta0) << std::setw(10) << alphas[j] << std::setw(11)
       << opt(r.theorem_beta0) << std::setw(8) << opt(r.stated_beta0) << std::setw(10) << r.exponent_formula()
       << (r.evaluable ? "yes" : "no") << "\n";
    if (!r.note.empty()) os << "  note: " << r.note << "\n";
  }
  return os.str();
}

}  // namespace qtopo
