#pragma once

#include <array>
#include <vector>

namespace qtopo {

/// Gauss–Legendre rule with n points on [0, 1].
struct LineRule {
  std::vector<double> node;
  std::vector<double> weight;
};
LineRule gauss_legendre(int n);

/// Quadrature rule on the reference d-simplex in barycentric coordinates,
/// exact for polynomials of total degree ≤ degree. Weights sum to 1, so
/// ∫_T g = |T| Σ_q w_q g(x_q).
struct SimplexRule {
  int dim = 0;
  int degree = 0;
  std::vector<std::array<double, 4>> bary;
  std::vector<double> weight;
  std::size_t size() const { return weight.size(); }
};

/// Collapsed-coordinate (conical product) rule; cached, thread-safe.
const SimplexRule& simplex_rule(int dim, int degree);

}  // namespace qtopo
