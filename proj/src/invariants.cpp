#include "qtopo/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace qtopo {

// ------------------------------------------------------------- structures

int DegreeStructure::length() const {
  int l = 0;
  for (const auto& t : terms) l = std::max(l, t.length());
  return l;
}

bool DegreeStructure::evaluable() const {
  return std::all_of(terms.begin(), terms.end(), [](const StructureTerm& t) { return !t.forms.empty(); });
}

void DegreeStructure::validate() const {
  const int n = domain_dim;
  if (n < 1) throw Error("structure '" + name + "': domain dimension must be positive");
  if (terms.empty()) throw Error("structure '" + name + "' has no terms");
  for (const auto& t : terms) {
    if (t.degrees.empty()) throw Error("structure '" + name + "': term without form degrees");
    if (!t.forms.empty() && t.forms.size() != t.degrees.size())
      throw Error("structure '" + name + "': forms and degrees differ in length");
    const int l = t.length();
    int sum = 0;
    for (int m : t.degrees) sum += m;
    if (sum != n + l) throw Error("degree-sum violation in structure '" + name + "'");
    const bool winding = n == 1 && l == 0 && t.degrees[0] == 1;
    if (!winding) {
      if (t.degrees[0] < 2 || t.degrees[0] > n) throw Error("structure '" + name + "': M0 out of range");
      if (l == 0 && t.degrees[0] != n) throw Error("structure '" + name + "': L = 0 requires M0 = N");
      for (int i = 1; i <= l; ++i)
        if (t.degrees[i] < 2 || t.degrees[i] > n - 1) throw Error("structure '" + name + "': Mi out of range");
    }
    for (std::size_t i = 0; i < t.forms.size(); ++i)
      if (TargetForm::get(t.forms[i]).degree() != t.degrees[i])
        throw Error("structure '" + name + "': form " + t.forms[i] + " has the wrong degree");
  }
}

DegreeStructure DegreeStructure::scaled(double a) const {
  DegreeStructure out = *this;
  for (auto& t : out.terms) t.coefficient *= a;
  return out;
}

DegreeStructure DegreeStructure::winding() { return {"winding", 1, {{1.0, {1}, {"s1:dtheta"}}}}; }

DegreeStructure DegreeStructure::sphere_degree(int n) {
  if (n != 2 && n != 3) throw Error("sphere degree structure needs N = 2 or 3");
  return {"degree:s" + std::to_string(n), n, {{1.0, {n}, {n == 2 ? "s2:vol" : "s3:vol"}}}};
}

DegreeStructure DegreeStructure::hopf() { return {"hopf", 3, {{1.0, {2, 2}, {"s2:vol", "s2:vol"}}}}; }

DegreeStructure DegreeStructure::s2xs2_beta(int i) {
  if (i != 1 && i != 2) throw Error("factor index must be 1 or 2");
  const std::string w = "s2xs2:omega" + std::to_string(i);
  return {"s2xs2:beta" + std::to_string(i), 3, {{1.0, {2, 2}, {w, w}}}};
}

DegreeStructure DegreeStructure::s2xs2_alpha(int i) {
  if (i != 1 && i != 2) throw Error("factor index must be 1 or 2");
  return {"s2xs2:alpha" + std::to_string(i), 2, {{1.0, {2}, {"s2xs2:omega" + std::to_string(i)}}}};
}

void InvariantResult::finish() {
  nearest = std::lround(value);
  distance = std::abs(value - static_cast<double>(nearest));
}

// ------------------------------------------------------------- evaluation

Cochain project_closed_pullback(const PullbackForm& form, const MeshPtr& mesh, const WhitneyComplex& complex,
                                const InvariantOptions& options, int* degree_used, double* closedness) {
  int q = kDefaultQuadratureDegree;
  Cochain eta = de_rham_project(form, mesh, q);
  double c = 0.0;
  if (form.degree() < mesh->dimension()) {
    for (;;) {
      const double n = complex.norm(eta);
      c = n > 0.0 ? complex.norm(exterior_derivative(eta)) / n : 0.0;
      if (c <= options.projection_closedness || q + 2 > options.max_projection_degree) break;
      q += 2;
      eta = de_rham_project(form, mesh, q);
    }
  }
  if (degree_used) *degree_used = q;
  if (closedness) *closedness = c;
  return eta;
}

InvariantResult hardt_riviere(const SmoothMap& f, const DegreeStructure& s, const MeshPtr& mesh,
                              const InvariantOptions& options, ComplexPtr complex) {
  s.validate();
  if (!s.evaluable()) throw Error("structure not numerically evaluable");
  if (f.domain_dim() != s.domain_dim || mesh->dimension() != s.domain_dim)
    throw Error("dimension mismatch between map, structure and mesh");
  InvariantResult result;
  result.level = mesh->level();
  if (s.length() > 0 && !complex) complex = std::make_shared<WhitneyComplex>(mesh);

  const MapPtr fp(&f, [](const SmoothMap*) {});
  std::map<std::string, std::unique_ptr<PullbackForm>> pulled;
  std::map<std::string, Cochain> primitives;
  auto pullback_of = [&](const std::string& name) -> const PullbackForm& {
    auto it = pulled.find(name);
    if (it == pulled.end()) it = pulled.emplace(name, std::make_unique<PullbackForm>(fp, TargetForm::get(name))).first;
    return *it->second;
  };
  auto primitive_of = [&](const std::string& name) -> const Cochain& {
    auto it = primitives.find(name);
    if (it != primitives.end()) return it->second;
    int q = 0;
    const Cochain eta = project_closed_pullback(pullback_of(name), mesh, *complex, options, &q);
    HodgeStats stats;
    Cochain xi = d_inverse(complex, eta, options.hodge, &stats);
    result.projection_degrees.push_back(q);
    result.solves.push_back(stats);
    return primitives.emplace(name, std::move(xi)).first->second;
  };

  for (const auto& term : s.terms) {
    std::vector<WedgeFactor> factors;
    factors.emplace_back(static_cast<const FormField*>(&pullback_of(term.forms[0])));
    for (std::size_t i = 1; i < term.forms.size(); ++i) factors.emplace_back(&primitive_of(term.forms[i]));
    const double v = term.coefficient * integrate_wedge(factors, *mesh, options.wedge_degree);
    result.per_term.push_back(v);
    result.value += v;
  }
  result.finish();
  return result;
}

InvariantResult winding_number(const SmoothMap& f, const MeshPtr& mesh, int quad_degree) {
  if (f.domain_dim() != 1 || !(f.target() == Target::sphere(1))) throw Error("winding number needs a map S1 -> S1");
  InvariantOptions o;
  o.wedge_degree = quad_degree;
  return hardt_riviere(f, DegreeStructure::winding(), mesh, o);
}

InvariantResult mapping_degree(const SmoothMap& f, const MeshPtr& mesh, int quad_degree) {
  const int n = f.domain_dim();
  if (f.target().is_product() || f.target().dimension() != n) throw Error("dimension mismatch");
  if (n == 1) return winding_number(f, mesh, quad_degree);
  InvariantOptions o;
  o.wedge_degree = quad_degree;
  return hardt_riviere(f, DegreeStructure::sphere_degree(n), mesh, o);
}

InvariantResult hopf_invariant(const SmoothMap& f, const MeshPtr& mesh, const InvariantOptions& options,
                               ComplexPtr complex) {
  if (f.domain_dim() != 3 || !(f.target() == Target::sphere(2))) throw Error("Hopf invariant needs a map S3 -> S2");
  return hardt_riviere(f, DegreeStructure::hopf(), mesh, options, std::move(complex));
}

// ---------------------------------------------------------- linking oracle

namespace {

constexpr double kTraceStep = 0.005;
constexpr double kMaxCurveLength = 200.0;
constexpr double kRegularity = 1e-3;

// Orthonormal basis of x^⊥ in ℝⁿ with det[x, e_1, …] > 0.
std::array<Vec, 3> tangent_basis(const Vec& x, int n) {
  int skip = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(x[i]) > std::abs(x[skip])) skip = i;
  std::array<Vec, 3> e{};
  int k = 0;
  for (int i = 0; i < n; ++i) {
    if (i == skip) continue;
    Vec v{};
    v[i] = 1.0;
    v = sub(v, scaled(x, x[i], n), n);
    for (int j = 0; j < k; ++j) v = sub(v, scaled(e[j], dot(e[j], v, n), n), n);
    e[k++] = normalized(v, n);
  }
  std::array<Vec, 4> cols = {x, e[0], e[1], e[2]};
  if (column_determinant(std::span<const Vec>(cols.data(), n), n) < 0) e[0] = scaled(e[0], -1.0, n);
  return e;
}

struct LocalLinearization {
  std::array<Vec, 3> basis;       // tangent basis at x
  std::array<double, 6> a{};      // 2×3: u_a · Df e_i
  std::array<double, 2> r{};      // u_a · (f(x) − p)
  double residual = 0.0;          // |f(x) − p|
};

LocalLinearization linearize(const SmoothMap& f, const Vec& x, const Vec& p, const std::array<Vec, 3>& u) {
  LocalLinearization l;
  l.basis = tangent_basis(x, 4);
  Vec y{};
  Jacobian j;
  f.evaluate(x, y, j);
  const Vec diff = sub(y, p, 3);
  l.residual = norm(diff, 3);
  for (int a = 0; a < 2; ++a) {
    l.r[a] = dot(u[a], diff, 3);
    for (int i = 0; i < 3; ++i) l.a[a * 3 + i] = dot(u[a], j.apply(l.basis[i], 4), 3);
  }
  return l;
}

// smallest singular value of the 2×3 block and the positively oriented kernel
double kernel_direction(const LocalLinearization& l, Vec& t) {
  const double* a = l.a.data();
  const double k0 = a[1] * a[5] - a[2] * a[4];
  const double k1 = a[2] * a[3] - a[0] * a[5];
  const double k2 = a[0] * a[4] - a[1] * a[3];
  t = Vec{};
  for (int c = 0; c < 4; ++c) t[c] = k0 * l.basis[0][c] + k1 * l.basis[1][c] + k2 * l.basis[2][c];
  const double g11 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
  const double g12 = a[0] * a[3] + a[1] * a[4] + a[2] * a[5];
  const double g22 = a[3] * a[3] + a[4] * a[4] + a[5] * a[5];
  const double tr = 0.5 * (g11 + g22);
  const double disc = std::sqrt(std::max(0.0, tr * tr - (g11 * g22 - g12 * g12)));
  const double nt = norm(t, 4);
  if (nt > 0.0) t = scaled(t, 1.0 / nt, 4);
  return std::sqrt(std::max(0.0, tr - disc));
}

bool newton_to_preimage(const SmoothMap& f, Vec& x, const Vec& p, const std::array<Vec, 3>& u) {
  for (int it = 0; it < 60; ++it) {
    const LocalLinearization l = linearize(f, x, p, u);
    if (l.residual < 1e-13) return true;
    const double* a = l.a.data();
    const double g11 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    const double g12 = a[0] * a[3] + a[1] * a[4] + a[2] * a[5];
    const double g22 = a[3] * a[3] + a[4] * a[4] + a[5] * a[5];
    const double det = g11 * g22 - g12 * g12;
    if (!(det > 1e-20)) return false;
    // minimum-norm step δ = −Aᵀ(AAᵀ)⁻¹ r
    const double z0 = (g22 * l.r[0] - g12 * l.r[1]) / det;
    const double z1 = (g11 * l.r[1] - g12 * l.r[0]) / det;
    Vec step{};
    for (int i = 0; i < 3; ++i) {
      const double d = -(a[i] * z0 + a[3 + i] * z1);
      for (int c = 0; c < 4; ++c) step[c] += d * l.basis[i][c];
    }
    const double len = norm(step, 4);
    if (len > 0.2) step = scaled(step, 0.2 / len, 4);
    for (int c = 0; c < 4; ++c) x[c] += step[c];
    x = normalized(x, 4);
  }
  return linearize(f, x, p, u).residual < 1e-11;
}

Polyline trace_component(const SmoothMap& f, const Vec& start, const Vec& p, const std::array<Vec, 3>& u,
                         double& min_singular) {
  Polyline pts{start};
  Vec x = start;
  double travelled = 0.0;
  Vec t{};
  while (travelled < kMaxCurveLength) {
    const LocalLinearization l = linearize(f, x, p, u);
    min_singular = std::min(min_singular, kernel_direction(l, t));
    if (min_singular < kRegularity) throw Error("non-regular value");
    Vec next{};
    for (int c = 0; c < 4; ++c) next[c] = x[c] + kTraceStep * t[c];
    next = normalized(next, 4);
    if (!newton_to_preimage(f, next, p, u)) throw Error("preimage trace lost the curve");
    travelled += norm(sub(next, x, 4), 4);
    const Vec back = sub(start, next, 4);
    if (travelled > 4.0 * kTraceStep && norm(back, 4) < kTraceStep && dot(back, t, 4) > 0.0) return pts;
    pts.push_back(next);
    x = next;
  }
  throw Error("open preimage trace");
}

// Uniform arc-length resampling of a closed polyline, re-projected onto the preimage.
Polyline resample(const SmoothMap& f, const Polyline& c, int count, const Vec& p, const std::array<Vec, 3>& u) {
  const std::size_t n = c.size();
  std::vector<double> s(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) s[i + 1] = s[i] + norm(sub(c[(i + 1) % n], c[i], 4), 4);
  Polyline out;
  out.reserve(count);
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    const double target = s[n] * k / count;
    while (seg + 1 < n && s[seg + 1] < target) ++seg;
    const double w = (target - s[seg]) / (s[seg + 1] - s[seg]);
    Vec x{};
    for (int d = 0; d < 4; ++d) x[d] = (1.0 - w) * c[seg][d] + w * c[(seg + 1) % n][d];
    x = normalized(x, 4);
    newton_to_preimage(f, x, p, u);
    out.push_back(x);
  }
  return out;
}

std::array<Vec, 3> target_basis(const Vec& p) {
  const auto e = tangent_basis(p, 3);
  return {e[0], e[1], Vec{}};
}

}  // namespace

std::vector<Polyline> trace_preimage(const SmoothMap& f, const Vec& p_in, int points_per_curve, double* min_singular) {
  if (f.domain_dim() != 3 || !(f.target() == Target::sphere(2))) throw Error("linking oracle needs a map S3 -> S2");
  const Vec p = normalized(p_in, 3);
  const auto u = target_basis(p);
  // deterministic seed cloud
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  std::vector<std::pair<double, Vec>> seeds;
  for (int i = 0; i < 40000; ++i) {
    Vec x{};
    for (int c = 0; c < 4; ++c) x[c] = g(rng);
    x = normalized(x, 4);
    const double r = norm(sub(f.value(x), p, 3), 3);
    if (r < 0.3) seeds.emplace_back(r, x);
  }
  std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double sigma = 1e300;
  std::vector<Polyline> raw;
  for (auto& [r, x] : seeds) {
    Vec y = x;
    if (!newton_to_preimage(f, y, p, u)) continue;
    bool known = false;
    for (const auto& c : raw) {
      for (const auto& q : c)
        if (norm(sub(q, y, 4), 4) < 4.0 * kTraceStep) {
          known = true;
          break;
        }
      if (known) break;
    }
    if (!known) raw.push_back(trace_component(f, y, p, u, sigma));
  }
  if (raw.empty()) throw Error("no preimage found");
  if (min_singular) *min_singular = sigma;
  std::vector<Polyline> out;
  for (const auto& c : raw) {
    out.push_back(resample(f, c, points_per_curve, p, u));
    // Df must exist along the preimage, not just be nondegenerate
    for (std::size_t k = 0; k < out.back().size(); k += 16) {
      const Vec& x = out.back()[k];
      for (const Vec& e : tangent_basis(x, 4))
        if (jacobian_fd_error(f, x, e) > 1e-4) throw Error("non-regular value");
    }
  }
  return out;
}

double gauss_linking_integral(const Polyline& a, const Polyline& b) {
  const std::size_t na = a.size(), nb = b.size();
  std::vector<Vec> ma(na), da(na), mb(nb), db(nb);
  for (std::size_t i = 0; i < na; ++i) {
    da[i] = sub(a[(i + 1) % na], a[i], 3);
    for (int c = 0; c < 3; ++c) ma[i][c] = 0.5 * (a[i][c] + a[(i + 1) % na][c]);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    db[j] = sub(b[(j + 1) % nb], b[j], 3);
    for (int c = 0; c < 3; ++c) mb[j][c] = 0.5 * (b[j][c] + b[(j + 1) % nb][c]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      const double rx = ma[i][0] - mb[j][0], ry = ma[i][1] - mb[j][1], rz = ma[i][2] - mb[j][2];
      const double cx = da[i][1] * db[j][2] - da[i][2] * db[j][1];
      const double cy = da[i][2] * db[j][0] - da[i][0] * db[j][2];
      const double cz = da[i][0] * db[j][1] - da[i][1] * db[j][0];
      const double d2 = rx * rx + ry * ry + rz * rz;
      row += (rx * cx + ry * cy + rz * cz) / (d2 * std::sqrt(d2));
    }
    total += row;
  }
  return total / (4.0 * kPi);
}

LinkingResult gauss_linking_oracle(const SmoothMap& f, const Vec& p, const Vec& q, int points_per_curve) {
  double sp = 0.0, sq = 0.0;
  const auto cp = trace_preimage(f, p, points_per_curve, &sp);
  const auto cq = trace_preimage(f, q, points_per_curve, &sq);
  // stereographic pole: the candidate farthest from both preimages
  std::mt19937_64 rng(0x901e);
  std::normal_distribution<double> g;
  Vec pole{};
  double best = -1.0;
  for (int i = 0; i < 256; ++i) {
    Vec x{};
    for (int c = 0; c < 4; ++c) x[c] = g(rng);
    x = normalized(x, 4);
    double m = 1e300;
    for (const auto* set : {&cp, &cq})
      for (const auto& c : *set)
        for (std::size_t k = 0; k < c.size(); k += 8) m = std::min(m, norm(sub(c[k], x, 4), 4));
    if (m > best) {
      best = m;
      pole = x;
    }
  }
  // orientation-preserving chart: (b₁, b₂, b₃) positive at the antipode −pole
  const auto b = tangent_basis(scaled(pole, -1.0, 4), 4);
  auto project = [&](const std::vector<Polyline>& curves) {
    std::vector<Polyline> out;
    for (const auto& c : curves) {
      Polyline r;
      r.reserve(c.size());
      for (const auto& x : c) {
        const double s = 1.0 - dot(x, pole, 4);
        r.push_back({dot(x, b[0], 4) / s, dot(x, b[1], 4) / s, dot(x, b[2], 4) / s});
      }
      out.push_back(std::move(r));
    }
    return out;
  };
  const auto rp = project(cp), rq = project(cq);
  LinkingResult res;
  for (const auto& a : rp)
    for (const auto& c : rq) res.value += gauss_linking_integral(a, c);
  res.nearest = std::lround(res.value);
  res.components_p = static_cast<int>(cp.size());
  res.components_q = static_cast<int>(cq.size());
  res.min_singular_value = std::min(sp, sq);
  res.points = points_per_curve;
  return res;
}

}  // namespace qtopo
