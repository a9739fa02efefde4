#include "qtopo/cochain.hpp"

#include <cmath>

#include "qtopo/parallel.hpp"
#include "qtopo/quadrature.hpp"

namespace qtopo {

Cochain::Cochain(MeshPtr mesh, int degree) : mesh_(std::move(mesh)), degree_(degree) {
  if (!mesh_) throw Error("cochain without mesh");
  if (degree_ < 0 || degree_ > mesh_->dimension()) throw Error("cochain degree out of range");
  values_.assign(mesh_->count(degree_), 0.0);
}

Cochain::Cochain(MeshPtr mesh, int degree, std::vector<double> values) : Cochain(std::move(mesh), degree) {
  if (values.size() != values_.size()) throw Error("cochain length does not match simplex count");
  values_ = std::move(values);
}

namespace {

void check_compatible(const Cochain& a, const Cochain& b) {
  if (a.mesh_ptr() != b.mesh_ptr() || a.degree() != b.degree()) throw Error("incompatible cochains");
}

}  // namespace

Cochain& Cochain::operator+=(const Cochain& other) {
  check_compatible(*this, other);
  kernels::axpy(1.0, other.values_, values_);
  return *this;
}

Cochain& Cochain::operator-=(const Cochain& other) {
  check_compatible(*this, other);
  kernels::axpy(-1.0, other.values_, values_);
  return *this;
}

Cochain& Cochain::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

Cochain operator+(Cochain a, const Cochain& b) { return a += b; }
Cochain operator-(Cochain a, const Cochain& b) { return a -= b; }
Cochain operator*(double a, Cochain c) { return c *= a; }

CsrMatrix derivative_matrix(const SimplicialSphere& mesh, int k) {
  if (k < 0 || k >= mesh.dimension()) throw Error("top degree");
  std::vector<Triplet> t;
  const std::size_t rows = mesh.count(k + 1);
  t.reserve(rows * (k + 2));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto f = mesh.faces(k + 1, i);
    const auto s = mesh.face_signs(k + 1, i);
    for (std::size_t j = 0; j < f.size(); ++j)
      t.push_back({static_cast<std::int32_t>(i), f[j], static_cast<double>(s[j])});
  }
  return CsrMatrix::from_triplets(static_cast<std::int32_t>(rows), static_cast<std::int32_t>(mesh.count(k)), std::move(t));
}

Cochain exterior_derivative(const Cochain& c) {
  const SimplicialSphere& mesh = c.mesh();
  if (c.degree() >= mesh.dimension()) throw Error("top degree");
  Cochain out(c.mesh_ptr(), c.degree() + 1);
  const int k = c.degree() + 1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto f = mesh.faces(k, i);
    const auto s = mesh.face_signs(k, i);
    double v = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) v += s[j] * c[f[j]];
    out[i] = v;
  }
  return out;
}

RadialProjection::RadialProjection(const Vec& x, int ambient) : n(ambient) {
  const double r = norm(x, n);
  inv_norm = 1.0 / r;
  point = scaled(x, inv_norm, n);
}

Vec RadialProjection::push(const Vec& v) const {
  const double pv = dot(point, v, n);
  Vec out{};
  for (int i = 0; i < n; ++i) out[i] = (v[i] - pv * point[i]) * inv_norm;
  return out;
}

namespace {

constexpr std::size_t kChunk = 256;

// one value per k-face of a top simplex; a tetrahedron has six edges
using LocalValues = std::array<double, 6>;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

Cochain de_rham_project(const FormField& form, const MeshPtr& mesh, int quad_degree) {
  const int k = form.degree();
  const int n = mesh->ambient();
  if (form.domain_dim() != mesh->dimension()) throw Error("form and mesh dimensions differ");
  Cochain out(mesh, k);
  const SimplexRule& rule = simplex_rule(k, quad_degree);
  const double inv_fact = 1.0 / factorial(k);
  const std::size_t count = out.size();
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  std::span<double> values = out.values();
  parallel_chunks(chunks, [&](std::size_t chunk) {
    const std::size_t end = std::min(count, (chunk + 1) * kChunk);
    std::array<Vec, 3> frame{}, pushed{};
    for (std::size_t i = chunk * kChunk; i < end; ++i) {
      const auto& s = mesh->simplex(k, i);
      const Vec& v0 = mesh->vertex(s[0]);
      for (int j = 1; j <= k; ++j) frame[j - 1] = sub(mesh->vertex(s[j]), v0, n);
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        Vec x{};
        for (int a = 0; a <= k; ++a)
          for (int c = 0; c < n; ++c) x[c] += rule.bary[q][a] * mesh->vertex(s[a])[c];
        const RadialProjection proj(x, n);
        for (int j = 0; j < k; ++j) pushed[j] = proj.push(frame[j]);
        acc += rule.weight[q] * form.evaluate(proj.point, std::span<const Vec>(pushed.data(), k));
      }
      double v = acc * inv_fact;
      if (k == mesh->dimension()) v *= mesh->orientation(i);
      values[i] = v;
    }
  });
  return out;
}

namespace {

struct WhitneyEntry {
  int face;
  int vertex;
  int component;
  double coeff;
};

double small_det(const double* m, int k) {
  if (k == 0) return 1.0;
  if (k == 1) return m[0];
  if (k == 2) return m[0] * m[3] - m[1] * m[2];
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6]);
}

// Whitney basis on the edge frame of an N-simplex:
// W_F = k! Σ_i (−1)^i λ_{F_i} dλ_{F∖F_i}, dλ_a(e_j) = δ_{a,j+1} − δ_{a,0}.
struct WhitneyTables {
  std::array<std::array<std::vector<WhitneyEntry>, 4>, 4> entries;  // [N][k]

  WhitneyTables() {
    for (int dim = 1; dim <= 3; ++dim)
      for (int k = 0; k <= dim; ++k) {
        const auto& faces = local_subsets(dim + 1, k + 1);
        const auto& comps = local_subsets(dim, k);
        for (std::size_t f = 0; f < faces.size(); ++f)
          for (int i = 0; i <= k; ++i) {
            std::array<int, 3> rest{};
            for (int j = 0, c = 0; j <= k; ++j)
              if (j != i) rest[c++] = faces[f][j];
            for (std::size_t I = 0; I < comps.size(); ++I) {
              std::array<double, 9> m{};
              for (int r = 0; r < k; ++r)
                for (int s = 0; s < k; ++s)
                  m[r * k + s] = (rest[r] == comps[I][s] + 1 ? 1.0 : 0.0) - (rest[r] == 0 ? 1.0 : 0.0);
              const double d = small_det(m.data(), k);
              if (d == 0.0) continue;
              const double coeff = factorial(k) * ((i % 2) ? -1.0 : 1.0) * d;
              entries[dim][k].push_back({static_cast<int>(f), faces[f][i], static_cast<int>(I), coeff});
            }
          }
      }
  }
};

const WhitneyTables& whitney_tables() {
  static const WhitneyTables tables;
  return tables;
}

FrameForm whitney_local(int dim, int k, std::span<const double> local, const std::array<double, 4>& bary) {
  FrameForm out;
  out.n = dim;
  out.k = k;
  for (const WhitneyEntry& e : whitney_tables().entries[dim][k]) out.c[e.component] += e.coeff * bary[e.vertex] * local[e.face];
  return out;
}

// G[I][J] = det of the (I, J) minor of g⁻¹ for k-subsets of the frame.
std::array<double, 9> dual_gram(const std::array<Vec, 3>& frame, int dim, int n, int k) {
  std::array<double, 9> g{}, ginv{};
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) g[a * dim + b] = dot(frame[a], frame[b], n);
  for (int a = 0; a < dim; ++a) {
    std::array<double, 9> work = g;
    std::array<double, 3> rhs{};
    rhs[a] = 1.0;
    if (!solve_dense(std::span<double>(work.data(), dim * dim), std::span<double>(rhs.data(), dim), dim))
      throw Error("degenerate simplex");
    for (int b = 0; b < dim; ++b) ginv[b * dim + a] = rhs[b];
  }
  const auto& comps = local_subsets(dim, k);
  const int c = static_cast<int>(comps.size());
  std::array<double, 9> out{};
  for (int I = 0; I < c; ++I)
    for (int J = 0; J < c; ++J) {
      std::array<double, 9> m{};
      for (int r = 0; r < k; ++r)
        for (int s = 0; s < k; ++s) m[r * k + s] = ginv[comps[I][r] * dim + comps[J][s]];
      out[I * c + J] = small_det(m.data(), k);
    }
  return out;
}

double gram_volume(const std::array<Vec, 3>& frame, int dim, int n) {
  std::array<double, 9> g{};
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) g[a * dim + b] = dot(frame[a], frame[b], n);
  return std::sqrt(determinant(std::span<const double>(g.data(), dim * dim), dim)) / factorial(dim);
}

LocalValues local_values(const Cochain& c, std::size_t top) {
  const SimplicialSphere& mesh = c.mesh();
  const int k = c.degree();
  const auto faces = mesh.top_faces(k, top);
  LocalValues local{};
  const double sign = (k == mesh.dimension()) ? mesh.orientation(top) : 1.0;
  for (std::size_t f = 0; f < faces.size(); ++f) local[f] = sign * c[faces[f]];
  return local;
}

}  // namespace

FrameForm whitney_on_simplex(const Cochain& c, std::size_t top, const std::array<double, 4>& bary) {
  const auto local = local_values(c, top);
  return whitney_local(c.mesh().dimension(), c.degree(), local, bary);
}

double WhitneyValue::evaluate(std::span<const Vec> vectors) const {
  const int dim = form.n;
  if (static_cast<int>(vectors.size()) != form.k) throw Error("wrong number of vectors for Whitney form");
  if (form.k == 0) return form.c[0];
  // express each vector's projection onto the simplex plane in the edge frame
  std::array<double, 9> g{};
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) g[a * dim + b] = dot(frame[a], frame[b], ambient);
  std::array<std::array<double, 3>, 3> coords{};
  for (int v = 0; v < form.k; ++v) {
    std::array<double, 9> work = g;
    std::array<double, 3> rhs{};
    for (int a = 0; a < dim; ++a) rhs[a] = dot(frame[a], vectors[v], ambient);
    solve_dense(std::span<double>(work.data(), dim * dim), std::span<double>(rhs.data(), dim), dim);
    coords[v] = rhs;
  }
  // α(v_1..v_k) = Σ_I c_I det[coords_v(I_s)]
  const auto& comps = local_subsets(dim, form.k);
  double out = 0.0;
  for (std::size_t I = 0; I < comps.size(); ++I) {
    std::array<double, 9> m{};
    for (int r = 0; r < form.k; ++r)
      for (int s = 0; s < form.k; ++s) m[r * form.k + s] = coords[r][comps[I][s]];
    out += form.c[I] * small_det(m.data(), form.k);
  }
  return out;
}

WhitneyValue whitney_interpolate(const Cochain& c, const Vec& x) {
  const SimplicialSphere& mesh = c.mesh();
  const auto loc = mesh.locate(x);
  WhitneyValue w;
  w.simplex = loc.simplex;
  w.bary = loc.bary;
  w.frame = mesh.edge_frame(loc.simplex);
  w.ambient = mesh.ambient();
  w.form = whitney_on_simplex(c, loc.simplex, loc.bary);
  return w;
}

std::vector<double> local_whitney_mass(std::span<const Vec> vertices, int ambient, int k) {
  const int dim = static_cast<int>(vertices.size()) - 1;
  if (dim < 1 || dim > 3 || k < 0 || k > dim) throw Error("local mass: bad simplex or degree");
  std::array<Vec, 3> frame{};
  for (int j = 1; j <= dim; ++j) frame[j - 1] = sub(vertices[j], vertices[0], ambient);
  const double vol = gram_volume(frame, dim, ambient);
  const auto G = dual_gram(frame, dim, ambient, k);
  const int nf = static_cast<int>(local_subsets(dim + 1, k + 1).size());
  const int nc = component_count(dim, k);
  const SimplexRule& rule = simplex_rule(dim, 2);
  std::vector<double> m(nf * nf, 0.0);
  std::vector<FrameForm> basis(nf);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    for (int f = 0; f < nf; ++f) {
      LocalValues unit{};
      unit[f] = 1.0;
      basis[f] = whitney_local(dim, k, unit, rule.bary[q]);
    }
    for (int f = 0; f < nf; ++f)
      for (int h = 0; h < nf; ++h) {
        double s = 0.0;
        for (int I = 0; I < nc; ++I)
          for (int J = 0; J < nc; ++J) s += basis[f].c[I] * basis[h].c[J] * G[I * nc + J];
        m[f * nf + h] += rule.weight[q] * vol * s;
      }
  }
  return m;
}

CsrMatrix whitney_mass_matrix(const SimplicialSphere& mesh, int k) {
  const int dim = mesh.dimension();
  if (k < 0 || k > dim) throw Error("mass matrix degree out of range");
  const std::size_t tops = mesh.count(dim);
  const int nf = static_cast<int>(local_subsets(dim + 1, k + 1).size());
  std::vector<std::vector<double>> local(tops);
  const std::size_t chunks = (tops + kChunk - 1) / kChunk;
  parallel_chunks(chunks, [&](std::size_t chunk) {
    const std::size_t end = std::min(tops, (chunk + 1) * kChunk);
    std::array<Vec, 4> verts{};
    for (std::size_t t = chunk * kChunk; t < end; ++t) {
      const auto& s = mesh.simplex(dim, t);
      for (int i = 0; i <= dim; ++i) verts[i] = mesh.vertex(s[i]);
      local[t] = local_whitney_mass(std::span<const Vec>(verts.data(), dim + 1), mesh.ambient(), k);
    }
  });
  std::vector<Triplet> trip;
  trip.reserve(tops * nf * nf);
  for (std::size_t t = 0; t < tops; ++t) {
    const auto faces = mesh.top_faces(k, t);
    for (int f = 0; f < nf; ++f)
      for (int h = 0; h < nf; ++h) trip.push_back({faces[f], faces[h], local[t][f * nf + h]});
  }
  const auto n = static_cast<std::int32_t>(mesh.count(k));
  return CsrMatrix::from_triplets(n, n, std::move(trip));
}

double integrate_wedge(std::span<const WedgeFactor> factors, const SimplicialSphere& mesh, int quad_degree) {
  const int dim = mesh.dimension();
  const int n = mesh.ambient();
  int total = 0;
  for (const WedgeFactor& f : factors) {
    if (const auto* form = std::get_if<const FormField*>(&f)) {
      if ((*form)->domain_dim() != dim) throw Error("form and mesh dimensions differ");
      total += (*form)->degree();
    } else {
      const Cochain* c = std::get<const Cochain*>(f);
      if (&c->mesh() != &mesh) throw Error("cochain lives on a different mesh");
      total += c->degree();
    }
  }
  if (total != dim) throw Error("wedge degree ≠ N");
  if (factors.size() > 8) throw Error("too many wedge factors");
  const SimplexRule& rule = simplex_rule(dim, quad_degree);
  const double inv_fact = 1.0 / factorial(dim);
  return parallel_sum(mesh.count(dim), kChunk, [&](std::size_t t) {
    const auto frame = mesh.edge_frame(t);
    const auto& s = mesh.simplex(dim, t);
    std::array<LocalValues, 8> cochain_local{};
    for (std::size_t i = 0; i < factors.size() && i < cochain_local.size(); ++i)
      if (const auto* c = std::get_if<const Cochain*>(&factors[i])) cochain_local[i] = local_values(**c, t);
    std::array<Vec, 3> pushed{};
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Vec x{};
      for (int a = 0; a <= dim; ++a)
        for (int c = 0; c < n; ++c) x[c] += rule.bary[q][a] * mesh.vertex(s[a])[c];
      const RadialProjection proj(x, n);
      for (int j = 0; j < dim; ++j) pushed[j] = proj.push(frame[j]);
      FrameForm prod;
      prod.n = dim;
      prod.k = 0;
      prod.c[0] = 1.0;
      for (std::size_t i = 0; i < factors.size(); ++i) {
        FrameForm term;
        if (const auto* form = std::get_if<const FormField*>(&factors[i])) {
          term = (*form)->components(proj.point, std::span<const Vec>(pushed.data(), dim));
        } else {
          const Cochain* c = std::get<const Cochain*>(factors[i]);
          term = whitney_local(dim, c->degree(), cochain_local[i], rule.bary[q]);
        }
        prod = wedge(prod, term);
      }
      acc += rule.weight[q] * prod.c[0];
    }
    return mesh.orientation(t) * acc * inv_fact;
  });
}

}  // namespace qtopo
