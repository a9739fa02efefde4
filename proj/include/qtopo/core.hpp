#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace qtopo {

/// Largest ambient dimension in use: S²×S² ⊂ ℝ⁶.
inline constexpr int kMaxAmbient = 6;
/// Largest domain ambient dimension: S³ ⊂ ℝ⁴.
inline constexpr int kMaxDomainAmbient = 4;

/// Fixed-capacity point/vector in ambient space. The active length is carried
/// by context (domain dimension N+1, or target ambient dimension).
using Vec = std::array<double, kMaxAmbient>;

/// Jacobian stored by columns: col[j] = ∂f/∂x_j of an ambient extension of f.
/// Only its action on tangent vectors is meaningful.
struct Jacobian {
  std::array<Vec, kMaxDomainAmbient> col{};

  Vec apply(const Vec& v, int domain_ambient) const {
    Vec out{};
    for (int j = 0; j < domain_ambient; ++j)
      for (int i = 0; i < kMaxAmbient; ++i) out[i] += col[j][i] * v[j];
    return out;
  }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double dot(const Vec& a, const Vec& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a, int n) { return std::sqrt(dot(a, a, n)); }

inline Vec sub(const Vec& a, const Vec& b, int n) {
  Vec out{};
  for (int i = 0; i < n; ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vec scaled(const Vec& a, double s, int n) {
  Vec out{};
  for (int i = 0; i < n; ++i) out[i] = a[i] * s;
  return out;
}

inline Vec normalized(const Vec& a, int n) { return scaled(a, 1.0 / norm(a, n), n); }

/// Determinant of an n×n matrix (n ≤ 6) given row-major in a flat array.
/// Partial pivoting; the input is copied.
double determinant(std::span<const double> a, int n);

/// Solves the n×n system A x = b in place (b becomes x). Returns false when
/// A is numerically singular.
bool solve_dense(std::span<double> a, std::span<double> b, int n);

/// Determinant of the square matrix whose columns are the given vectors.
double column_determinant(std::span<const Vec> columns, int n);

/// Surface measure of the unit sphere Sⁿ.
double sphere_volume(int n);

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace qtopo
