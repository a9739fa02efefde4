#pragma once

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qtopo/invariants.hpp"

namespace qtopo {

using Rational = boost::multiprecision::cpp_rational;

/// Exact decimal-free rendering "p/q" (or "p" for integers).
std::string to_string(const Rational& r);
/// Parses "p/q", "p" or a finite decimal such as "0.75".
Rational parse_rational(const std::string& text);
double to_double(const Rational& r);

/// σ(α) for first degree M₀ and antiderivative degrees M₁..M_L.
Rational sigma(const Rational& alpha, int m0, const std::vector<int>& mi);
double sigma(double alpha, int m0, const std::vector<int>& mi);

struct Beta0 {
  Rational beta0;
  Rational alpha_star;  // smallest minimizer of σ
};

/// inf σ over (0,1) in closed form. Requires M₀ ≥ 2 and every M_i ≥ 2.
Beta0 beta0(int m0, const std::vector<int>& mi);

struct NumericMinimum {
  double beta0 = 0.0;
  double alpha = 0.0;
  int iterations = 0;
};
/// Golden-section minimization of the (convex) σ on [0,1].
NumericMinimum beta0_numeric(int m0, const std::vector<int>& mi, double tolerance = 1e-13);

/// (N+L)/β; throws for β ≤ 0.
Rational exponent(int n, int l, const Rational& beta);
/// 1 − 1/min{N+1, N+2−L}.
Rational theorem_threshold(int n, int l);

struct TermThreshold {
  std::vector<int> degrees;
  int length = 0;
  std::optional<Rational> beta0;
  std::optional<Rational> alpha_star;
  /// M₀ + M_max ≤ N + 2 − L_k (trivially true for L_k = 0).
  bool degree_bound = true;
};

struct ThresholdReport {
  std::string name;
  std::string target;
  std::string description;
  DegreeStructure structure;
  int n = 0;
  int l = 0;
  std::vector<TermThreshold> terms;
  /// max_k β₀ᵏ; empty when some term lies outside the σ construction.
  std::optional<Rational> beta0;
  std::optional<Rational> theorem_beta0;
  /// Published threshold for this structure, when one exists.
  std::optional<Rational> stated_beta0;
  bool evaluable = false;
  std::string note;

  /// The hypothesis guard: β must exceed this (max of the available thresholds).
  std::optional<Rational> guard() const;
  Rational exponent_at(const Rational& beta) const { return qtopo::exponent(n, l, beta); }
  /// "k/beta" with k = N+L.
  std::string exponent_formula() const;
  /// Theorem threshold at least every per-term threshold.
  bool theorem_consistent() const;
};

/// Thresholds of an arbitrary structure (validated first).
ThresholdReport thresholds(const DegreeStructure& s);
/// Single-term structure from its degrees; N = ΣM − L.
ThresholdReport thresholds(int m0, const std::vector<int>& mi);

/// All named entries, in table order.
const std::vector<ThresholdReport>& catalogue();
/// Lookup by name; aliases "s2xs2:beta" → beta1, "s2xs2:alpha" → alpha1, "hopf" → hopf:n=1.
const ThresholdReport& lookup(const std::string& name);

/// Fixed-width text table of the given reports.
std::string format_table(const std::vector<ThresholdReport>& reports);

}  // namespace qtopo
