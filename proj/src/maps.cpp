#include "qtopo/maps.hpp"

#include <charconv>
#include <complex>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "qtopo/mesh.hpp"

namespace qtopo {

using cplx = std::complex<double>;

// ---------------------------------------------------------------- targets

Target Target::sphere(int m) {
  if (m < 1 || m > 3) throw Error("target sphere dimension out of range");
  return Target(m, false);
}

Target Target::s2xs2() { return Target(2, true); }

std::string Target::name() const { return product_ ? "S2xS2" : "S" + std::to_string(m_); }

namespace {

Vec project_block(const Vec& y, int offset, int size, Vec out) {
  double r = 0.0;
  for (int i = 0; i < size; ++i) r += y[offset + i] * y[offset + i];
  r = std::sqrt(r);
  if (!(r > 1e-12)) throw Error("point at the center of the target sphere");
  for (int i = 0; i < size; ++i) out[offset + i] = y[offset + i] / r;
  return out;
}

Vec project_block_derivative(const Vec& y, const Vec& v, int offset, int size, Vec out) {
  double r2 = 0.0, yv = 0.0;
  for (int i = 0; i < size; ++i) {
    r2 += y[offset + i] * y[offset + i];
    yv += y[offset + i] * v[offset + i];
  }
  const double r = std::sqrt(r2);
  for (int i = 0; i < size; ++i) out[offset + i] = (v[offset + i] - yv * y[offset + i] / r2) / r;
  return out;
}

double block_distance(const Vec& y, int offset, int size) {
  double r = 0.0;
  for (int i = 0; i < size; ++i) r += y[offset + i] * y[offset + i];
  return std::abs(std::sqrt(r) - 1.0);
}

}  // namespace

Vec Target::project(const Vec& y) const {
  if (!product_) return project_block(y, 0, m_ + 1, Vec{});
  return project_block(y, 3, 3, project_block(y, 0, 3, Vec{}));
}

Vec Target::project_derivative(const Vec& y, const Vec& v) const {
  if (!product_) return project_block_derivative(y, v, 0, m_ + 1, Vec{});
  return project_block_derivative(y, v, 3, 3, project_block_derivative(y, v, 0, 3, Vec{}));
}

double Target::distance(const Vec& y) const {
  if (!product_) return block_distance(y, 0, m_ + 1);
  return std::hypot(block_distance(y, 0, 3), block_distance(y, 3, 3));
}

// ----------------------------------------------------------------- forms

TargetForm::TargetForm(std::string name, Target target, int degree, int offset)
    : name_(std::move(name)), target_(target), degree_(degree), offset_(offset), normalization_(1.0 / sphere_volume(degree)) {}

const TargetForm& TargetForm::get(std::string_view name) {
  static const std::map<std::string, TargetForm, std::less<>> forms = [] {
    std::map<std::string, TargetForm, std::less<>> m;
    m.emplace("s1:dtheta", TargetForm("s1:dtheta", Target::sphere(1), 1, 0));
    m.emplace("s2:vol", TargetForm("s2:vol", Target::sphere(2), 2, 0));
    m.emplace("s3:vol", TargetForm("s3:vol", Target::sphere(3), 3, 0));
    m.emplace("s2xs2:omega1", TargetForm("s2xs2:omega1", Target::s2xs2(), 2, 0));
    m.emplace("s2xs2:omega2", TargetForm("s2xs2:omega2", Target::s2xs2(), 2, 3));
    return m;
  }();
  const auto it = forms.find(name);
  if (it == forms.end()) throw Error("unknown target form: " + std::string(name));
  return it->second;
}

const TargetForm& TargetForm::volume(const Target& target) {
  if (target.is_product()) throw Error("no single volume form on a product target");
  switch (target.dimension()) {
    case 1: return get("s1:dtheta");
    case 2: return get("s2:vol");
    default: return get("s3:vol");
  }
}

double TargetForm::evaluate(const Vec& y, std::span<const Vec> vectors) const {
  if (static_cast<int>(vectors.size()) != degree_) throw Error("wrong number of vectors for target form");
  const int n = degree_ + 1;
  std::array<Vec, 4> cols{};
  for (int i = 0; i < n; ++i) cols[0][i] = y[offset_ + i];
  for (int j = 0; j < degree_; ++j)
    for (int i = 0; i < n; ++i) cols[j + 1][i] = vectors[j][offset_ + i];
  return normalization_ * column_determinant(std::span<const Vec>(cols.data(), n), n);
}

double pullback(const SmoothMap& f, const TargetForm& omega, const Vec& x, std::span<const Vec> vectors) {
  if (omega.degree() > f.domain_dim()) throw Error("form degree exceeds domain dimension");
  if (!(omega.target() == f.target())) throw Error("form and map targets differ");
  if (static_cast<int>(vectors.size()) != omega.degree()) throw Error("wrong number of vectors for pullback");
  Vec y{};
  Jacobian j;
  f.evaluate(x, y, j);
  std::array<Vec, 4> w{};
  for (std::size_t i = 0; i < vectors.size(); ++i) w[i] = j.apply(vectors[i], f.domain_ambient());
  return omega.evaluate(y, std::span<const Vec>(w.data(), vectors.size()));
}

PullbackForm::PullbackForm(MapPtr f, const TargetForm& omega) : f_(std::move(f)), omega_(&omega) {
  if (omega.degree() > f_->domain_dim()) throw Error("form degree exceeds domain dimension");
  if (!(omega.target() == f_->target())) throw Error("form and map targets differ");
}

double PullbackForm::evaluate(const Vec& x, std::span<const Vec> vectors) const {
  return pullback(*f_, *omega_, x, vectors);
}

FrameForm PullbackForm::components(const Vec& x, std::span<const Vec> frame) const {
  Vec y{};
  Jacobian j;
  f_->evaluate(x, y, j);
  std::array<Vec, 3> w{};
  for (std::size_t i = 0; i < frame.size(); ++i) w[i] = j.apply(frame[i], f_->domain_ambient());
  FrameForm out;
  out.n = static_cast<int>(frame.size());
  out.k = omega_->degree();
  const auto& subsets = local_subsets(out.n, out.k);
  std::array<Vec, 3> picked{};
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (int i = 0; i < out.k; ++i) picked[i] = w[subsets[s][i]];
    out.c[s] = omega_->evaluate(y, std::span<const Vec>(picked.data(), out.k));
  }
  return out;
}

// --------------------------------------------------------------- rotation

Vec Rotation::apply(const Vec& x) const {
  Vec y{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) y[i] += m[i * 4 + j] * x[j];
  return y;
}

Rotation Rotation::random(int n, std::uint64_t seed) {
  if (n < 1 || n > 4) throw Error("rotation dimension out of range");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::array<Vec, 4> rows{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) rows[i][j] = g(rng);
    for (int k = 0; k < i; ++k) {
      const double p = dot(rows[i], rows[k], n);
      for (int j = 0; j < n; ++j) rows[i][j] -= p * rows[k][j];
    }
    rows[i] = normalized(rows[i], n);
  }
  if (column_determinant(std::span<const Vec>(rows.data(), n), n) < 0) rows[0] = scaled(rows[0], -1.0, n);
  Rotation r;
  r.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.m[i * 4 + j] = rows[i][j];
  return r;
}

// --------------------------------------------------------------- families

namespace {

cplx ipow(cplx z, int e) {
  cplx r(1.0, 0.0);
  while (e > 0) {
    if (e & 1) r *= z;
    z *= z;
    e >>= 1;
  }
  return r;
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

MapPtr make_circle_power(int d) {
  auto eval = [d](const Vec& x, Vec& y, Jacobian* j) {
    const cplx z(x[0], x[1]);
    const int m = std::abs(d);
    const cplx base = d >= 0 ? z : std::conj(z);
    const cplx v = ipow(base, m);
    y = Vec{};
    y[0] = v.real();
    y[1] = v.imag();
    if (j) {
      *j = Jacobian{};
      if (m == 0) return;
      const cplx a = static_cast<double>(m) * ipow(base, m - 1);
      const cplx dx1 = d >= 0 ? cplx(0, 1) * a : cplx(0, -1) * a;
      j->col[0][0] = a.real();
      j->col[0][1] = a.imag();
      j->col[1][0] = dx1.real();
      j->col[1][1] = dx1.imag();
    }
  };
  return std::make_shared<SmoothMap>(1, Target::sphere(1), "circle-power:d=" + std::to_string(d), eval);
}

MapPtr make_sphere_suspension(int d) {
  // pole axis x₀; w = x₁ + i x₂ ↦ |w| (w/|w|)^d = w^a w̄^b, a = (1+d)/2, b = (1−d)/2
  auto eval = [d](const Vec& x, Vec& y, Jacobian* j) {
    const cplx w(x[1], x[2]);
    const double r = std::abs(w);
    cplx g(0.0, 0.0);
    if (r > 0.0) {
      const cplx u = w / r;
      g = r * (d >= 0 ? ipow(u, d) : ipow(std::conj(u), -d));
    }
    y = Vec{};
    y[0] = x[0];
    y[1] = g.real();
    y[2] = g.imag();
    if (j) {
      *j = Jacobian{};
      j->col[0][0] = 1.0;
      if (r > 0.0) {
        const double a = 0.5 * (1 + d), b = 0.5 * (1 - d);
        for (int c = 1; c <= 2; ++c) {
          const cplx delta = c == 1 ? cplx(1, 0) : cplx(0, 1);
          const cplx dg = g * (a * delta / w + b * std::conj(delta) / std::conj(w));
          j->col[c][1] = dg.real();
          j->col[c][2] = dg.imag();
        }
      } else if (d == 1) {
        j->col[1][1] = 1.0;
        j->col[2][2] = 1.0;
      }
    }
  };
  return std::make_shared<SmoothMap>(2, Target::sphere(2), "suspension:d=" + std::to_string(d), eval);
}

MapPtr make_antipodal(int n) {
  if (n < 1 || n > 3) throw Error("dimension out of range");
  auto eval = [n](const Vec& x, Vec& y, Jacobian* j) {
    y = Vec{};
    for (int i = 0; i <= n; ++i) y[i] = -x[i];
    if (j) {
      *j = Jacobian{};
      for (int i = 0; i <= n; ++i) j->col[i][i] = -1.0;
    }
  };
  return std::make_shared<SmoothMap>(n, Target::sphere(n), "antipodal:n=" + std::to_string(n), eval);
}

MapPtr make_identity(int n) {
  if (n < 1 || n > 3) throw Error("dimension out of range");
  auto eval = [n](const Vec& x, Vec& y, Jacobian* j) {
    y = Vec{};
    for (int i = 0; i <= n; ++i) y[i] = x[i];
    if (j) {
      *j = Jacobian{};
      for (int i = 0; i <= n; ++i) j->col[i][i] = 1.0;
    }
  };
  return std::make_shared<SmoothMap>(n, Target::sphere(n), "identity:n=" + std::to_string(n), eval);
}

MapPtr make_constant(int domain_dim, const Target& target) {
  if (domain_dim < 1 || domain_dim > 3) throw Error("dimension out of range");
  Vec c{};
  c[0] = 1.0;
  if (target.is_product()) c[3] = 1.0;
  auto eval = [c](const Vec&, Vec& y, Jacobian* j) {
    y = c;
    if (j) *j = Jacobian{};
  };
  const std::string m = target.is_product() ? "s2xs2" : std::to_string(target.dimension());
  return std::make_shared<SmoothMap>(domain_dim, target, "const:n=" + std::to_string(domain_dim) + ",m=" + m, eval);
}

MapPtr make_hopf() {
  auto eval = [](const Vec& x, Vec& y, Jacobian* j) {
    const double a = x[0], b = x[1], c = x[2], d = x[3];
    y = Vec{};
    y[0] = a * a + b * b - c * c - d * d;
    y[1] = 2.0 * (a * c + b * d);
    y[2] = 2.0 * (b * c - a * d);
    if (j) {
      *j = Jacobian{};
      const double rows[3][4] = {{2 * a, 2 * b, -2 * c, -2 * d}, {2 * c, 2 * d, 2 * a, 2 * b}, {-2 * d, 2 * c, 2 * b, -2 * a}};
      for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 4; ++k) j->col[k][r] = rows[r][k];
    }
  };
  return std::make_shared<SmoothMap>(3, Target::sphere(2), "hopf", eval);
}

MapPtr make_composition(MapPtr outer, MapPtr inner) {
  if (inner->target().is_product()) throw Error("composition through a product target");
  if (outer->domain_dim() != inner->target().dimension()) throw Error("composition dimension mismatch");
  const std::string spec = "compose:" + outer->spec() + "|" + inner->spec();
  auto eval =[outer, inner](const Vec& x, Vec& y, Jacobian* j) {
    if (!j) {
      y = outer->value(inner->value(x));
      return;
    }
    Vec mid{};
    Jacobian ji, jo;
    inner->evaluate(x, mid, ji);
    outer->evaluate(mid, y, jo);
    *j = Jacobian{};
    for (int c = 0; c < inner->domain_ambient(); ++c) j->col[c] = jo.apply(ji.col[c], outer->domain_ambient());
  };
  return std::make_shared<SmoothMap>(inner->domain_dim(), outer->target(), spec, eval);
}

MapPtr make_product_map(MapPtr f1, MapPtr f2) {
  if (f1->domain_dim() != f2->domain_dim()) throw Error("product factors have different domains");
  if (!(f1->target() == Target::sphere(2)) || !(f2->target() == Target::sphere(2)))
    throw Error("product factors must map to S2");
  const std::string spec = "product:" + f1->spec() + "," + f2->spec();
  auto eval = [f1, f2](const Vec& x, Vec& y, Jacobian* j) {
    Vec a{}, b{};
    Jacobian ja, jb;
    if (j) {
      f1->evaluate(x, a, ja);
      f2->evaluate(x, b, jb);
    } else {
      a = f1->value(x);
      b = f2->value(x);
    }
    y = Vec{};
    for (int i = 0; i < 3; ++i) {
      y[i] = a[i];
      y[3 + i] = b[i];
    }
    if (j) {
      *j = Jacobian{};
      for (int c = 0; c < kMaxDomainAmbient; ++c)
        for (int i = 0; i < 3; ++i) {
          j->col[c][i] = ja.col[c][i];
          j->col[c][3 + i] = jb.col[c][i];
        }
    }
  };
  return std::make_shared<SmoothMap>(f1->domain_dim(), Target::s2xs2(), spec, eval);
}

MapPtr make_oscillation_perturbation(MapPtr f, double epsilon, int frequency) {
  if (!(epsilon >= 0.0)) throw Error("perturbation amplitude must be non-negative");
  if (epsilon >= 0.2) throw Error("leaves tubular neighborhood");
  if (epsilon == 0.0) return f;
  const int n_in = f->domain_ambient();
  const int n_out = f->target().ambient();
  // fixed field g_j(z) = sin(Σ_i A_ji z_i + φ_j)/√n_out, so |g| ≤ 1
  std::array<std::array<double, kMaxDomainAmbient>, kMaxAmbient> a{};
  std::array<double, kMaxAmbient> phase{};
  for (int jj = 0; jj < n_out; ++jj) {
    phase[jj] = 0.8 * jj + 0.3;
    for (int i = 0; i < n_in; ++i) a[jj][i] = 1.5 * std::sin(1.9 * jj + 3.1 * i + 0.7);
  }
  const double inv = 1.0 / std::sqrt(static_cast<double>(n_out));
  const double m = frequency;
  const std::string spec = "perturb:eps=" + format_double(epsilon) + ",m=" + std::to_string(frequency) + "|" + f->spec();
  auto eval = [f, a, phase, inv, m, epsilon, n_in, n_out](const Vec& x, Vec& y, Jacobian* j) {
    Vec base{};
    Jacobian jb;
    if (j)
      f->evaluate(x, base, jb);
    else
      base = f->value(x);
    Vec s = base;
    std::array<double, kMaxAmbient> cosarg{};
    for (int jj = 0; jj < n_out; ++jj) {
      double arg = phase[jj];
      for (int i = 0; i < n_in; ++i) arg += a[jj][i] * m * x[i];
      s[jj] += epsilon * std::sin(arg) * inv;
      cosarg[jj] = std::cos(arg) * inv;
    }
    y = f->target().project(s);
    if (j) {
      *j = Jacobian{};
      for (int c = 0; c < n_in; ++c) {
        Vec ds = jb.col[c];
        for (int jj = 0; jj < n_out; ++jj) ds[jj] += epsilon * m * cosarg[jj] * a[jj][c];
        j->col[c] = f->target().project_derivative(s, ds);
      }
    }
  };
  return std::make_shared<SmoothMap>(f->domain_dim(), f->target(), spec, eval);
}

MapPtr make_rotated(MapPtr f, std::uint64_t seed) {
  const Rotation r = Rotation::random(f->domain_ambient(), seed);
  const std::string spec = "rotate:seed=" + std::to_string(seed) + "|" + f->spec();
  auto eval = [f, r](const Vec& x, Vec& y, Jacobian* j) {
    const Vec rx = r.apply(x);
    if (!j) {
      y = f->value(rx);
      return;
    }
    Jacobian jf;
    f->evaluate(rx, y, jf);
    *j = Jacobian{};
    for (int c = 0; c < r.n; ++c)
      for (int i = 0; i < r.n; ++i)
        for (int k = 0; k < kMaxAmbient; ++k) j->col[c][k] += jf.col[i][k] * r.m[i * 4 + c];
  };
  return std::make_shared<SmoothMap>(f->domain_dim(), f->target(), spec, eval);
}

MapPtr make_reflected(MapPtr f) {
  const int last = f->domain_dim();
  auto eval = [f, last](const Vec& x, Vec& y, Jacobian* j) {
    Vec rx = x;
    rx[last] = -rx[last];
    if (!j) {
      y = f->value(rx);
      return;
    }
    f->evaluate(rx, y, *j);
    j->col[last] = scaled(j->col[last], -1.0, kMaxAmbient);
  };
  return std::make_shared<SmoothMap>(f->domain_dim(), f->target(), "reflect|" + f->spec(), eval);
}

// ----------------------------------------------------------------- parser

namespace {

const std::vector<std::string_view>& family_names() {
  static const std::vector<std::string_view> names = {"circle-power", "suspension", "antipodal", "identity",
                                                      "const",        "hopf",       "compose",   "product",
                                                      "perturb",      "rotate",     "reflect"};
  return names;
}

bool starts_with_family(std::string_view s) {
  for (auto name : family_names())
    if (s.substr(0, name.size()) == name &&
        (s.size() == name.size() || s[name.size()] == ':' || s[name.size()] == '|' || s[name.size()] == ','))
      return true;
  return false;
}

std::map<std::string, std::string, std::less<>> parse_params(std::string_view s, std::string_view spec) {
  std::map<std::string, std::string, std::less<>> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const std::string_view item = s.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) throw Error("bad map parameter '" + std::string(item) + "' in " + std::string(spec));
    out.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_number(const std::map<std::string, std::string, std::less<>>& p, std::string_view key, std::string_view spec,
               std::optional<T> fallback = std::nullopt) {
  const auto it = p.find(key);
  if (it == p.end()) {
    if (fallback) return *fallback;
    throw Error("missing map parameter '" + std::string(key) + "' in " + std::string(spec));
  }
  T v{};
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error("bad value for map parameter '" + std::string(key) + "' in " + std::string(spec));
  return v;
}

void check_keys(const std::map<std::string, std::string, std::less<>>& p, std::initializer_list<std::string_view> allowed,
                std::string_view spec) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k == a;
    if (!ok) throw Error("unknown map parameter '" + k + "' in " + std::string(spec));
  }
}

Target parse_target(const std::string& m) {
  if (m == "s2xs2") return Target::s2xs2();
  if (m == "1" || m == "2" || m == "3") return Target::sphere(m[0] - '0');
  throw Error("bad target '" + m + "'");
}

}  // namespace

MapPtr parse_map(std::string_view spec, int domain_hint) {
  const auto colon = spec.find(':');
  const auto bar = spec.find('|');
  const auto head_end = std::min(colon, bar);
  const std::string_view family = spec.substr(0, head_end);
  std::string_view rest = head_end == std::string_view::npos ? std::string_view{} : spec.substr(head_end + 1);
  const bool has_params = colon != std::string_view::npos && colon == head_end;

  if (family == "hopf") {
    if (!rest.empty()) throw Error("hopf takes no parameters");
    return make_hopf();
  }
  if (family == "reflect") {
    if (bar != head_end) throw Error("reflect needs a base map: reflect|SPEC");
    return make_reflected(parse_map(rest, domain_hint));
  }
  if (family == "compose") {
    const auto sep = rest.find('|');
    if (!has_params || sep == std::string_view::npos) throw Error("compose needs OUTER|INNER");
    MapPtr inner = parse_map(rest.substr(sep + 1), domain_hint);
    MapPtr outer = parse_map(rest.substr(0, sep), inner->target().dimension());
    return make_composition(outer, inner);
  }
  if (family == "perturb" || family == "rotate") {
    const auto sep = rest.find('|');
    if (!has_params || sep == std::string_view::npos) throw Error(std::string(family) + " needs PARAMS|BASE");
    const auto p = parse_params(rest.substr(0, sep), spec);
    MapPtr base = parse_map(rest.substr(sep + 1), domain_hint);
    if (family == "rotate") {
      check_keys(p, {"seed"}, spec);
      return make_rotated(base, parse_number<std::uint64_t>(p, "seed", spec));
    }
    check_keys(p, {"eps", "m"}, spec);
    return make_oscillation_perturbation(base, parse_number<double>(p, "eps", spec), parse_number<int>(p, "m", spec, 1));
  }
  if (family == "product") {
    if (!has_params) throw Error("product needs two factors");
    std::size_t split = std::string_view::npos;
    for (std::size_t i = 0; i < rest.size(); ++i)
      if (rest[i] == ',' && starts_with_family(rest.substr(i + 1))) {
        split = i;
        break;
      }
    if (split == std::string_view::npos) throw Error("product needs two factors");
    const std::string_view a = rest.substr(0, split), b = rest.substr(split + 1);
    const bool a_const = a == "const", b_const = b == "const";
    if (a_const && b_const) return make_product_map(make_constant(domain_hint < 0 ? 3 : domain_hint, Target::sphere(2)),
                                                    make_constant(domain_hint < 0 ? 3 : domain_hint, Target::sphere(2)));
    MapPtr fa = a_const ? nullptr : parse_map(a, domain_hint);
    MapPtr fb = b_const ? nullptr : parse_map(b, fa ? fa->domain_dim() : domain_hint);
    if (!fa) fa = make_constant(fb->domain_dim(), Target::sphere(2));
    if (!fb) fb = make_constant(fa->domain_dim(), Target::sphere(2));
    return make_product_map(fa, fb);
  }
  if (bar != std::string_view::npos && bar < colon) throw Error("unexpected '|' in map spec " + std::string(spec));
  const auto p = has_params ? parse_params(rest, spec) : decltype(parse_params(rest, spec)){};
  if (family == "circle-power") {
    check_keys(p, {"d"}, spec);
    return make_circle_power(parse_number<int>(p, "d", spec));
  }
  if (family == "suspension") {
    check_keys(p, {"d"}, spec);
    return make_sphere_suspension(parse_number<int>(p, "d", spec));
  }
  if (family == "antipodal") {
    check_keys(p, {"n"}, spec);
    return make_antipodal(parse_number<int>(p, "n", spec, 2));
  }
  if (family == "identity") {
    check_keys(p, {"n"}, spec);
    return make_identity(parse_number<int>(p, "n", spec, domain_hint > 0 ? domain_hint : 2));
  }
  if (family == "const") {
    check_keys(p, {"n", "m"}, spec);
    const int n = parse_number<int>(p, "n", spec, domain_hint > 0 ? std::optional<int>(domain_hint) : std::nullopt);
    const auto mit = p.find("m");
    return make_constant(n, mit == p.end() ? Target::sphere(std::min(n, 3)) : parse_target(mit->second));
  }
  throw Error("unknown map family '" + std::string(family) + "'");
}

double jacobian_fd_error(const SmoothMap& f, const Vec& x, const Vec& v, double h) {
  const int n = f.domain_ambient();
  const int m = f.target().ambient();
  Vec t = v;
  const double xv = dot(x, v, n);
  for (int i = 0; i < n; ++i) t[i] -= xv * x[i];
  t = normalized(t, n);
  Vec plus{}, minus{};
  for (int i = 0; i < n; ++i) {
    plus[i] = std::cos(h) * x[i] + std::sin(h) * t[i];
    minus[i] = std::cos(h) * x[i] - std::sin(h) * t[i];
  }
  const Vec fp = f.value(plus), fm = f.value(minus);
  Vec fd{};
  for (int i = 0; i < m; ++i) fd[i] = (fp[i] - fm[i]) / (2.0 * std::sin(h));
  const Vec exact = f.jacobian(x).apply(t, n);
  return norm(sub(fd, exact, m), m) / std::max(norm(exact, m), 1e-3);
}

}  // namespace qtopo
