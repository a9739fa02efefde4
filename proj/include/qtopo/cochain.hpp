#pragma once

#include <span>
#include <variant>
#include <vector>

#include "qtopo/forms.hpp"
#include "qtopo/mesh.hpp"
#include "qtopo/sparse.hpp"

namespace qtopo {

inline constexpr int kDefaultQuadratureDegree = 4;

/// Discrete k-form: one real value per k-simplex of a mesh, referring to the
/// stored orientation of that simplex.
class Cochain {
 public:
  Cochain(MeshPtr mesh, int degree);
  Cochain(MeshPtr mesh, int degree, std::vector<double> values);

  int degree() const { return degree_; }
  const SimplicialSphere& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  Cochain& operator+=(const Cochain& other);
  Cochain& operator-=(const Cochain& other);
  Cochain& operator*=(double a);

 private:
  MeshPtr mesh_;
  int degree_;
  std::vector<double> values_;
};

Cochain operator+(Cochain a, const Cochain& b);
Cochain operator-(Cochain a, const Cochain& b);
Cochain operator*(double a, Cochain c);

/// Signed incidence matrix of d on k-cochains: (#(k+1)-simplices) × (#k-simplices).
CsrMatrix derivative_matrix(const SimplicialSphere& mesh, int k);

/// Throws "top degree" when k = N.
Cochain exterior_derivative(const Cochain& c);

/// Integrals of a smooth form over every k-simplex, with the form evaluated at
/// radially projected quadrature points on radially projected tangent vectors.
Cochain de_rham_project(const FormField& form, const MeshPtr& mesh, int quad_degree = kDefaultQuadratureDegree);

/// Whitney form of a cochain evaluated inside one top simplex, returned on
/// that simplex's edge frame (v_1 − v_0, …, v_N − v_0).
FrameForm whitney_on_simplex(const Cochain& c, std::size_t top, const std::array<double, 4>& bary);

/// Whitney interpolant at a point located by ray projection. evaluate()
/// accepts any vectors of ℝ^{N+1}; they are first projected onto the
/// simplex's affine plane.
struct WhitneyValue {
  std::size_t simplex = 0;
  std::array<double, 4> bary{};
  std::array<Vec, 3> frame{};
  int ambient = 0;
  FrameForm form;

  double evaluate(std::span<const Vec> vectors) const;
};

/// Throws "point off mesh" when the ray through x misses every simplex.
WhitneyValue whitney_interpolate(const Cochain& c, const Vec& x);

/// Local Whitney k-form mass matrix of a flat N-simplex given by its vertices
/// in increasing order; row-major C×C with C = #k-faces, faces ordered like
/// local_subsets(N+1, k+1).
std::vector<double> local_whitney_mass(std::span<const Vec> vertices, int ambient, int k);

/// Galerkin mass matrix of Whitney k-forms. Top-degree rows/columns refer to
/// positively oriented simplices, like top-degree cochain values.
CsrMatrix whitney_mass_matrix(const SimplicialSphere& mesh, int k);

/// One factor of a wedge integral: an analytic form or a cochain (Whitney
/// interpolated).
using WedgeFactor = std::variant<const FormField*, const Cochain*>;

/// ∫_{Sᴺ} φ_1 ∧ … ∧ φ_m over the mesh. Throws "wedge degree ≠ N".
double integrate_wedge(std::span<const WedgeFactor> factors, const SimplicialSphere& mesh,
                       int quad_degree = kDefaultQuadratureDegree);

/// Radial projection x ↦ x/|x| and its differential on vectors.
struct RadialProjection {
  Vec point;
  double inv_norm;
  int n;

  RadialProjection(const Vec& x, int ambient);
  Vec push(const Vec& v) const;
};

}  // namespace qtopo
