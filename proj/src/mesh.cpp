#include "qtopo/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace qtopo {

const std::vector<std::array<int, 4>>& local_subsets(int n, int size) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<std::array<int, 4>>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(n, size);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<std::array<int, 4>> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (__builtin_popcount(mask) != size) continue;
    std::array<int, 4> s{};
    int c = 0;
    for (int b = 0; b < n; ++b)
      if (mask & (1 << b)) s[c++] = b;
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [size](const auto& a, const auto& b) {
    return std::lexicographical_compare(a.begin(), a.begin() + size, b.begin(), b.begin() + size);
  });
  return cache.emplace(key, std::move(out)).first->second;
}

namespace {

using Tuple = std::array<int, 4>;

bool tuple_less(const Tuple& a, const Tuple& b, int size) {
  return std::lexicographical_compare(a.begin(), a.begin() + size, b.begin(), b.begin() + size);
}

int find_tuple(const std::vector<Tuple>& sorted, const Tuple& key, int size) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), key,
                             [size](const Tuple& a, const Tuple& b) { return tuple_less(a, b, size); });
  if (it == sorted.end() || !std::equal(it->begin(), it->begin() + size, key.begin()))
    throw Error("mesh face lookup failed");
  return static_cast<int>(it - sorted.begin());
}

Vec midpoint_on_sphere(const Vec& a, const Vec& b, int n) {
  Vec m{};
  for (int i = 0; i < n; ++i) m[i] = 0.5 * (a[i] + b[i]);
  return normalized(m, n);
}

struct MidpointCache {
  std::vector<Vec>& vertices;
  int ambient;
  std::map<std::pair<int, int>, int> index;

  int get(int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    vertices.push_back(midpoint_on_sphere(vertices[a], vertices[b], ambient));
    const int id = static_cast<int>(vertices.size()) - 1;
    index.emplace(key, id);
    return id;
  }
};

std::vector<Tuple> refine_triangles(std::vector<Vec>& vertices, const std::vector<Tuple>& tris) {
  MidpointCache mid{vertices, 3, {}};
  std::vector<Tuple> out;
  out.reserve(tris.size() * 4);
  for (const Tuple& t : tris) {
    const int a = t[0], b = t[1], c = t[2];
    const int ab = mid.get(a, b), bc = mid.get(b, c), ca = mid.get(c, a);
    out.push_back({a, ab, ca, 0});
    out.push_back({ab, b, bc, 0});
    out.push_back({ca, bc, c, 0});
    out.push_back({ab, bc, ca, 0});
  }
  return out;
}

// Red refinement of tetrahedra; the inner octahedron is split along its
// shortest diagonal measured after projection.
std::vector<Tuple> refine_tetrahedra(std::vector<Vec>& vertices, const std::vector<Tuple>& tets) {
  MidpointCache mid{vertices, 4, {}};
  std::vector<Tuple> out;
  out.reserve(tets.size() * 8);
  for (const Tuple& t : tets) {
    int m[4][4];
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) m[i][j] = m[j][i] = mid.get(t[i], t[j]);
    for (int i = 0; i < 4; ++i) {
      Tuple corner{};
      int c = 0;
      for (int j = 0; j < 4; ++j) corner[c++] = (j == i) ? t[i] : m[i][j];
      out.push_back(corner);
    }
    // Diagonals join midpoints of opposite edges: (01,23), (02,13), (03,12).
    const std::array<std::array<int, 4>, 3> diag = {{{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
    int best = 0;
    double best_len = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 3; ++d) {
      const auto& q = diag[d];
      const double len = norm(sub(vertices[m[q[0]][q[1]]], vertices[m[q[2]][q[3]]], 4), 4);
      if (len < best_len - 1e-12) {
        best_len = len;
        best = d;
      }
    }
    const auto& q = diag[best];
    const int p = m[q[0]][q[1]], r = m[q[2]][q[3]];
    // The four octahedron vertices around the diagonal p–r form a cycle
    // m[a][c] – m[a][d] – m[b][d] – m[b][c] with {a,b} = {q0,q1}, {c,d} = {q2,q3}.
    const int a = q[0], b = q[1], c = q[2], d = q[3];
    const int ring[4] = {m[a][c], m[a][d], m[b][d], m[b][c]};
    for (int i = 0; i < 4; ++i) out.push_back({p, r, ring[i], ring[(i + 1) % 4]});
  }
  return out;
}

}  // namespace

SimplicialSphere SimplicialSphere::from_top_simplices(int dim, int level, std::vector<Vec> vertices,
                                                      std::vector<Tuple> tops) {
  if (dim < 1 || dim > 3) throw Error("dimension out of range");
  SimplicialSphere s;
  s.dim_ = dim;
  s.level_ = level;
  s.vertices_ = std::move(vertices);
  const int n = dim + 1;
  const int nv = static_cast<int>(s.vertices_.size());

  s.orientation_.resize(tops.size());
  for (std::size_t t = 0; t < tops.size(); ++t) {
    Tuple& tup = tops[t];
    for (int i = 0; i < n; ++i)
      if (tup[i] < 0 || tup[i] >= nv) throw Error("simplex vertex index out of range");
    for (int i = n; i < 4; ++i) tup[i] = 0;
    std::sort(tup.begin(), tup.begin() + n);
    std::array<Vec, 4> cols{};
    Vec centroid{};
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c) centroid[c] += s.vertices_[tup[i]][c] / n;
    cols[0] = centroid;
    for (int i = 1; i < n; ++i) cols[i] = sub(s.vertices_[tup[i]], s.vertices_[tup[0]], n);
    const double det = column_determinant(std::span<const Vec>(cols.data(), n), n);
    if (det == 0.0) throw Error("degenerate top simplex");
    s.orientation_[t] = det > 0 ? 1 : -1;
  }
  s.simplices_[dim] = std::move(tops);

  for (int k = 0; k < dim; ++k) {
    std::vector<Tuple> all;
    const auto& subsets = local_subsets(n, k + 1);
    for (const Tuple& top : s.simplices_[dim])
      for (const auto& sub_idx : subsets) {
        Tuple f{};
        for (int i = 0; i <= k; ++i) f[i] = top[sub_idx[i]];
        all.push_back(f);
      }
    std::sort(all.begin(), all.end(), [k](const Tuple& a, const Tuple& b) { return tuple_less(a, b, k + 1); });
    all.erase(std::unique(all.begin(), all.end(),
                          [k](const Tuple& a, const Tuple& b) { return std::equal(a.begin(), a.begin() + k + 1, b.begin()); }),
              all.end());
    s.simplices_[k] = std::move(all);
  }
  if (s.simplices_[0].size() != s.vertices_.size()) throw Error("mesh has unreferenced vertices");

  for (int k = 0; k <= dim; ++k) {
    const auto& subsets = local_subsets(n, k + 1);
    auto& tf = s.top_faces_[k];
    s.top_face_stride_[k] = subsets.size();
    tf.reserve(s.simplices_[dim].size() * subsets.size());
    for (const Tuple& top : s.simplices_[dim]) {
      for (const auto& sub_idx : subsets) {
        Tuple f{};
        for (int i = 0; i <= k; ++i) f[i] = top[sub_idx[i]];
        tf.push_back(k == dim ? static_cast<int>(&top - s.simplices_[dim].data()) : find_tuple(s.simplices_[k], f, k + 1));
      }
    }
  }

  for (int k = 1; k <= dim; ++k) {
    auto& fi = s.faces_[k];
    auto& fs = s.face_signs_[k];
    for (std::size_t i = 0; i < s.simplices_[k].size(); ++i) {
      const Tuple& sx = s.simplices_[k][i];
      const int orient = (k == dim) ? s.orientation_[i] : 1;
      for (int drop = 0; drop <= k; ++drop) {
        Tuple f{};
        int c = 0;
        for (int j = 0; j <= k; ++j)
          if (j != drop) f[c++] = sx[j];
        fi.push_back(find_tuple(s.simplices_[k - 1], f, k));
        fs.push_back(((drop % 2) ? -1 : 1) * orient);
      }
    }
  }

  s.vertex_star_.assign(s.vertices_.size(), {});
  for (std::size_t t = 0; t < s.simplices_[dim].size(); ++t)
    for (int i = 0; i < n; ++i) s.vertex_star_[s.simplices_[dim][t][i]].push_back(static_cast<int>(t));
  return s;
}

std::span<const int> SimplicialSphere::top_faces(int k, std::size_t t) const {
  const std::size_t per = top_face_stride_[k];
  return std::span<const int>(top_faces_[k]).subspan(t * per, per);
}

std::span<const int> SimplicialSphere::faces(int k, std::size_t i) const {
  return std::span<const int>(faces_[k]).subspan(i * (k + 1), k + 1);
}

std::span<const int> SimplicialSphere::face_signs(int k, std::size_t i) const {
  return std::span<const int>(face_signs_[k]).subspan(i * (k + 1), k + 1);
}

double SimplicialSphere::max_edge_length() const {
  double m = 0.0;
  for (const auto& e : simplices_[1]) m = std::max(m, norm(sub(vertices_[e[0]], vertices_[e[1]], ambient()), ambient()));
  return m;
}

double SimplicialSphere::min_edge_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : simplices_[1]) m = std::min(m, norm(sub(vertices_[e[0]], vertices_[e[1]], ambient()), ambient()));
  return m;
}

std::array<Vec, 3> SimplicialSphere::edge_frame(std::size_t t) const {
  std::array<Vec, 3> e{};
  const Tuple& s = simplices_[dim_][t];
  for (int i = 1; i <= dim_; ++i) e[i - 1] = sub(vertices_[s[i]], vertices_[s[0]], ambient());
  return e;
}

double SimplicialSphere::signed_volume() const {
  const int n = ambient();
  double factorial = 1.0;
  for (int i = 2; i <= dim_; ++i) factorial *= i;
  std::vector<double> vols(simplices_[dim_].size());
  for (std::size_t t = 0; t < vols.size(); ++t) {
    const auto e = edge_frame(t);
    // unit normal of the simplex hyperplane, oriented away from the origin
    std::array<Vec, 4> cols{};
    Vec normal{};
    for (int c = 0; c < n; ++c) {
      // cofactor expansion: normal_c = (−1)^c det of frame with row c removed
      std::array<double, 9> m{};
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == c) continue;
        for (int j = 0; j < dim_; ++j) m[rr * dim_ + j] = e[j][r];
        ++rr;
      }
      normal[c] = ((c % 2) ? -1.0 : 1.0) * determinant(std::span<const double>(m.data(), dim_ * dim_), dim_);
    }
    if (dot(normal, vertices_[simplices_[dim_][t][0]], n) < 0) normal = scaled(normal, -1.0, n);
    cols[0] = normalized(normal, n);
    for (int j = 0; j < dim_; ++j) cols[j + 1] = e[j];
    vols[t] = orientation_[t] * column_determinant(std::span<const Vec>(cols.data(), n), n) / factorial;
  }
  double s = 0.0;
  for (double v : vols) s += v;
  return s;
}

long SimplicialSphere::euler_characteristic() const {
  long chi = 0;
  for (int k = 0; k <= dim_; ++k) chi += ((k % 2) ? -1L : 1L) * static_cast<long>(simplices_[k].size());
  return chi;
}

bool SimplicialSphere::ray_hit(std::size_t t, const Vec& x, std::array<double, 4>& bary) const {
  const int n = ambient();
  std::array<double, 16> a{};
  std::array<double, 4> b{};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a[r * n + c] = vertices_[simplices_[dim_][t][c]][r];
    b[r] = x[r];
  }
  if (!solve_dense(std::span<double>(a.data(), n * n), std::span<double>(b.data(), n), n)) return false;
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += b[i];
  if (total <= 0.0) return false;
  for (int i = 0; i < n; ++i) {
    bary[i] = b[i] / total;
    if (bary[i] < -1e-12) return false;
  }
  for (int i = n; i < 4; ++i) bary[i] = 0.0;
  return true;
}

SimplicialSphere::Location SimplicialSphere::locate(const Vec& x) const {
  const int n = ambient();
  if (!(norm(x, n) > 0.0)) throw Error("point off mesh");
  std::size_t nearest = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    const double d = dot(vertices_[v], x, n);
    if (d > best) {
      best = d;
      nearest = v;
    }
  }
  Location loc{};
  for (int t : vertex_star_[nearest])
    if (ray_hit(t, x, loc.bary)) {
      loc.simplex = t;
      return loc;
    }
  for (std::size_t t = 0; t < simplices_[dim_].size(); ++t)
    if (ray_hit(t, x, loc.bary)) {
      loc.simplex = t;
      return loc;
    }
  throw Error("point off mesh");
}

SimplicialSphere build_sphere_mesh(int dim, int level) {
  if (dim < 1 || dim > 3) throw Error("dimension out of range");
  if (level < 0) throw Error("refinement level must be non-negative");
  std::vector<Vec> verts;
  std::vector<Tuple> tops;
  if (dim == 1) {
    const int segments = 8 << level;
    for (int j = 0; j < segments; ++j) {
      const double a = 2.0 * kPi * j / segments;
      verts.push_back({std::cos(a), std::sin(a)});
      tops.push_back({j, (j + 1) % segments, 0, 0});
    }
    return SimplicialSphere::from_top_simplices(1, level, std::move(verts), std::move(tops));
  }
  if (dim == 2) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    for (double s1 : {-1.0, 1.0})
      for (double s2 : {-1.0, 1.0}) {
        verts.push_back(normalized({0.0, s1, s2 * phi}, 3));
        verts.push_back(normalized({s1, s2 * phi, 0.0}, 3));
        verts.push_back(normalized({s2 * phi, 0.0, s1}, 3));
      }
    // faces: triples of mutually adjacent vertices (adjacent = shortest distance)
    double shortest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < verts.size(); ++i)
      for (std::size_t j = i + 1; j < verts.size(); ++j) shortest = std::min(shortest, norm(sub(verts[i], verts[j], 3), 3));
    auto adjacent = [&](int i, int j) { return norm(sub(verts[i], verts[j], 3), 3) < shortest * 1.01; };
    for (int i = 0; i < 12; ++i)
      for (int j = i + 1; j < 12; ++j)
        for (int k = j + 1; k < 12; ++k)
          if (adjacent(i, j) && adjacent(j, k) && adjacent(i, k)) tops.push_back({i, j, k, 0});
    for (int l = 0; l < level; ++l) tops = refine_triangles(verts, tops);
    return SimplicialSphere::from_top_simplices(2, level, std::move(verts), std::move(tops));
  }
  for (int i = 0; i < 4; ++i) {
    Vec p{}, m{};
    p[i] = 1.0;
    m[i] = -1.0;
    verts.push_back(p);
    verts.push_back(m);
  }
  for (int signs = 0; signs < 16; ++signs) {
    Tuple t{};
    for (int i = 0; i < 4; ++i) t[i] = 2 * i + ((signs >> i) & 1);
    tops.push_back(t);
  }
  for (int l = 0; l < level; ++l) tops = refine_tetrahedra(verts, tops);
  return SimplicialSphere::from_top_simplices(3, level, std::move(verts), std::move(tops));
}

MeshPtr make_sphere_mesh(int dim, int level) {
  return std::make_shared<const SimplicialSphere>(build_sphere_mesh(dim, level));
}

void write_mesh(const SimplicialSphere& mesh, std::ostream& out) {
  const int n = mesh.ambient();
  out << "DIM " << mesh.dimension() << " LEVEL " << mesh.level() << '\n';
  out << "VERTICES " << mesh.vertices().size() << '\n';
  char buf[64];
  for (const Vec& v : mesh.vertices()) {
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      out << (i ? " " : "") << buf;
    }
    out << '\n';
  }
  const int top = mesh.dimension();
  out << "SIMPLICES " << mesh.count(top) << '\n';
  for (std::size_t t = 0; t < mesh.count(top); ++t) {
    const auto& s = mesh.simplex(top, t);
    for (int i = 0; i < n; ++i) out << s[i] << ' ';
    out << mesh.orientation(t) << '\n';
  }
}

SimplicialSphere read_mesh(std::istream& in) {
  std::string tag_dim, tag_level, tag_vertices, tag_simplices;
  int dim = 0, level = 0;
  std::size_t nv = 0, ns = 0;
  if (!(in >> tag_dim >> dim >> tag_level >> level) || tag_dim != "DIM" || tag_level != "LEVEL")
    throw Error("mesh file: bad header");
  if (dim < 1 || dim > 3) throw Error("dimension out of range");
  if (!(in >> tag_vertices >> nv) || tag_vertices != "VERTICES") throw Error("mesh file: missing VERTICES block");
  const int n = dim + 1;
  std::vector<Vec> verts(nv);
  for (auto& v : verts)
    for (int i = 0; i < n; ++i)
      if (!(in >> v[i])) throw Error("mesh file: truncated vertex block");
  if (!(in >> tag_simplices >> ns) || tag_simplices != "SIMPLICES") throw Error("mesh file: missing SIMPLICES block");
  std::vector<Tuple> tops(ns);
  std::vector<int> signs(ns);
  for (std::size_t t = 0; t < ns; ++t) {
    for (int i = 0; i < n; ++i)
      if (!(in >> tops[t][i])) throw Error("mesh file: truncated simplex block");
    if (!(in >> signs[t]) || (signs[t] != 1 && signs[t] != -1)) throw Error("mesh file: bad orientation sign");
  }
  SimplicialSphere mesh = SimplicialSphere::from_top_simplices(dim, level, std::move(verts), std::move(tops));
  for (std::size_t t = 0; t < ns; ++t)
    if (mesh.orientation(t) != signs[t]) throw Error("mesh file: orientation sign disagrees with geometry");
  return mesh;
}

}  // namespace qtopo
