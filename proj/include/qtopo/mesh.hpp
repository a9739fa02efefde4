#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "qtopo/core.hpp"

namespace qtopo {

/// Increasing subsets of {0, …, n−1} with the given size, in lexicographic
/// order. Used for the local faces of a simplex.
const std::vector<std::array<int, 4>>& local_subsets(int n, int size);

/// Oriented simplicial approximation of Sᴺ (N = 1, 2, 3) with vertices on the
/// unit sphere and flat simplices.
///
/// Every k-simplex is stored with its vertex indices in increasing order; the
/// cochain value on a k-simplex (k < N) refers to that orientation. Top
/// simplices additionally carry an orientation sign s = ±1 such that s times
/// the increasing order is positively oriented (outward normal first), and
/// top-degree cochain values refer to the positively oriented simplex.
class SimplicialSphere {
 public:
  /// Builds all lower-dimensional simplices, incidences and orientations from
  /// the vertex set and the top simplices (vertex order irrelevant).
  static SimplicialSphere from_top_simplices(int dim, int level, std::vector<Vec> vertices,
                                             std::vector<std::array<int, 4>> tops);

  int dimension() const { return dim_; }
  int ambient() const { return dim_ + 1; }
  int level() const { return level_; }

  const std::vector<Vec>& vertices() const { return vertices_; }
  const Vec& vertex(std::size_t i) const { return vertices_[i]; }
  std::size_t count(int k) const { return simplices_[k].size(); }
  const std::array<int, 4>& simplex(int k, std::size_t i) const { return simplices_[k][i]; }
  int orientation(std::size_t top) const { return orientation_[top]; }

  /// Global indices of the k-faces of top simplex t, ordered like local_subsets(N+1, k+1).
  std::span<const int> top_faces(int k, std::size_t t) const;
  /// Faces of the k-simplex i (k ≥ 1) and their incidence signs; top simplices
  /// include their orientation sign.
  std::span<const int> faces(int k, std::size_t i) const;
  std::span<const int> face_signs(int k, std::size_t i) const;

  double max_edge_length() const;
  double min_edge_length() const;
  /// Σ over top simplices of the oriented flat volume (positive when the
  /// orientation is consistent with the outward normal).
  double signed_volume() const;
  long euler_characteristic() const;

  /// Flat-simplex frame: edge vectors v_i − v_0 (i = 1..N) of top simplex t
  /// in increasing vertex order.
  std::array<Vec, 3> edge_frame(std::size_t t) const;

  struct Location {
    std::size_t simplex;
    std::array<double, 4> bary;  // barycentrics of the ray hit, increasing vertex order
  };
  /// Finds the top simplex hit by the ray through x. Throws "point off mesh".
  Location locate(const Vec& x) const;

 private:
  int dim_ = 0;
  int level_ = 0;
  std::vector<Vec> vertices_;
  std::array<std::vector<std::array<int, 4>>, 4> simplices_;
  std::vector<int> orientation_;
  std::array<std::vector<int>, 4> top_faces_;
  std::array<std::size_t, 4> top_face_stride_{};
  std::array<std::vector<int>, 4> faces_;
  std::array<std::vector<int>, 4> face_signs_;
  std::vector<std::vector<int>> vertex_star_;

  bool ray_hit(std::size_t t, const Vec& x, std::array<double, 4>& bary) const;
};

using MeshPtr = std::shared_ptr<const SimplicialSphere>;

/// S¹: regular polygon with 8·2^level segments. S²: icosahedron subdivided
/// `level` times. S³: boundary of the 4-dimensional cross-polytope refined by
/// red (edge-midpoint) subdivision `level` times. New vertices are projected
/// radially to the sphere.
SimplicialSphere build_sphere_mesh(int dim, int level);
MeshPtr make_sphere_mesh(int dim, int level);

/// ASCII exchange format:
///   DIM N LEVEL l
///   VERTICES n        followed by n lines of N+1 coordinates (17 significant digits)
///   SIMPLICES m       followed by m lines of N+1 increasing vertex indices and the orientation sign
void write_mesh(const SimplicialSphere& mesh, std::ostream& out);
SimplicialSphere read_mesh(std::istream& in);

}  // namespace qtopo
