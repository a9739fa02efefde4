#include "qtopo/seminorms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qtopo/parallel.hpp"
#include "qtopo/quadrature.hpp"

namespace qtopo {

namespace {

constexpr long kChunk = 4096;

struct Moments {
  double sum = 0.0;
  double sq = 0.0;
  long n = 0;

  void add(const Moments& o) {
    sum += o.sum;
    sq += o.sq;
    n += o.n;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
  }
};

// Draws `count` values of sample(rng) in fixed-size chunks; chunk c of stream s
// always uses derive_seed(seed, (s << 32) + c), so results do not depend on the
// thread count.
template <class Sampler>
Moments run_stream(long count, std::uint64_t seed, std::uint64_t stream, long first_chunk, const Sampler& sample) {
  const long chunks = (count + kChunk - 1) / kChunk;
  std::vector<Moments> part(static_cast<std::size_t>(chunks));
  parallel_chunks(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    std::mt19937_64 rng(derive_seed(seed, (stream << 32) + static_cast<std::uint64_t>(first_chunk) + c));
    const long begin = static_cast<long>(c) * kChunk;
    const long end = std::min(count, begin + kChunk);
    Moments m;
    for (long i = begin; i < end; ++i) {
      const double v = sample(rng);
      m.sum += v;
      m.sq += v * v;
      ++m.n;
    }
    part[c] = m;
  });
  Moments total;
  for (const auto& m : part) total.add(m);
  return total;
}

Vec tangent_direction(const Vec& x, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (;;) {
    Vec u{};
    for (int i = 0; i <= n; ++i) u[i] = g(rng);
    u = sub(u, scaled(x, dot(u, x, n + 1), n + 1), n + 1);
    const double l = norm(u, n + 1);
    if (l > 1e-12) return scaled(u, 1.0 / l, n + 1);
  }
}

double sample_angle(int n, double a, double b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (n == 1) return a + (b - a) * u(rng);
  if (n == 2) {
    const double ca = std::cos(a), cb = std::cos(b);
    return std::acos(std::clamp(cb + (ca - cb) * u(rng), -1.0, 1.0));
  }
  // density ∝ sin^{n−1}θ by rejection
  const double top = (a <= kPi / 2 && kPi / 2 <= b) ? 1.0 : std::max(std::sin(a), std::sin(b));
  const double peak = std::pow(top, n - 1);
  for (;;) {
    const double t = a + (b - a) * u(rng);
    if (u(rng) * peak <= std::pow(std::sin(t), n - 1)) return t;
  }
}

double difference_power(const Vec& fx, const Vec& fy, int m, double p) {
  return std::pow(norm(sub(fx, fy, m), m), p);
}

}  // namespace

Vec uniform_on_sphere(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (;;) {
    Vec v{};
    for (int i = 0; i <= n; ++i) v[i] = g(rng);
    const double l = norm(v, n + 1);
    if (l > 1e-12) return scaled(v, 1.0 / l, n + 1);
  }
}

Vec sample_in_shell(const Vec& center, int n, double a, double b, std::mt19937_64& rng) {
  const double t = sample_angle(n, a, b, rng);
  const Vec u = tangent_direction(center, n, rng);
  Vec y{};
  for (int i = 0; i <= n; ++i) y[i] = std::cos(t) * center[i] + std::sin(t) * u[i];
  return y;
}

double shell_measure(int n, double a, double b) {
  switch (n) {
    case 1:
      return 2.0 * (b - a);
    case 2:
      return 2.0 * kPi * (std::cos(a) - std::cos(b));
    case 3: {
      auto prim = [](double t) { return 0.5 * t - 0.25 * std::sin(2.0 * t); };
      return 4.0 * kPi * (prim(b) - prim(a));
    }
    default:
      throw Error("shell measure needs n in 1..3");
  }
}

// ------------------------------------------------------------------ Sobolev

namespace {

void check_sobolev(const SmoothMap& f, const SobolevOptions& o) {
  if (!(o.beta > 0.0 && o.beta < 1.0)) throw Error("beta must lie in (0,1)");
  if (!(o.p >= 1.0)) throw Error("p must be at least 1");
  if (o.samples < 1) throw Error("sample count must be positive");
  if (f.domain_dim() < 1 || f.domain_dim() > 3) throw Error("domain dimension must be 1..3");
}

SeminormEstimate finish_power(double integral, double integral_error, double p) {
  SeminormEstimate e;
  if (integral <= 0.0) return e;
  e.value = std::pow(integral, 1.0 / p);
  e.error = e.value / (p * integral) * integral_error;
  return e;
}

SeminormEstimate sobolev_plain(const SmoothMap& f, const SobolevOptions& o) {
  const int n = f.domain_dim(), m = f.target().ambient();
  const double s = o.beta * o.p + n;
  const Moments mom = run_stream(o.samples, o.seed, 0, 0, [&](std::mt19937_64& rng) {
    const Vec x = uniform_on_sphere(n, rng), y = uniform_on_sphere(n, rng);
    const double r = norm(sub(x, y, n + 1), n + 1);
    if (r == 0.0) return 0.0;
    return difference_power(f.value(x), f.value(y), m, o.p) / std::pow(r, s);
  });
  const double w = sphere_volume(n) * sphere_volume(n);
  SeminormEstimate e = finish_power(w * mom.mean(), w * std::sqrt(mom.variance() / mom.n), o.p);
  e.method = "plain-MC";
  e.samples = o.samples;
  e.seed = o.seed;
  e.strata = 1;
  return e;
}

SeminormEstimate sobolev_tensor(const SmoothMap& f, const SobolevOptions& o) {
  if (f.domain_dim() != 1) throw Error("tensor quadrature is available on S1 only");
  const int m = f.target().ambient();
  const double s = 1.0 + o.beta * o.p;
  // The t-integrand behaves like t^{q-1} at both ends; t = π v^k with k = 1/q
  // makes it bounded in v.
  const double k = std::clamp(1.0 / (o.p * (1.0 - o.beta)), 1.0, 24.0);
  auto run = [&](int nodes, int line_nodes) {
    const LineRule rule = gauss_legendre(line_nodes);
    std::vector<double> part(static_cast<std::size_t>(nodes));
    parallel_chunks(static_cast<std::size_t>(nodes), [&](std::size_t i) {
      const double th = 2.0 * kPi * static_cast<double>(i) / nodes;
      const Vec x{std::cos(th), std::sin(th)};
      Vec fx{};
      Jacobian jx;
      f.evaluate(x, fx, jx);
      const double speed = norm(jx.apply(Vec{-x[1], x[0]}, 2), m);
      double acc = 0.0;
      for (std::size_t j = 0; j < rule.node.size(); ++j) {
        const double v = rule.node[j];
        const double t = kPi * std::pow(v, k);
        const double dt = kPi * k * std::pow(v, k - 1.0);
        const double chord = 2.0 * std::sin(0.5 * t);
        const double c = std::pow(chord, s);
        for (double sgn : {1.0, -1.0}) {
          // Below t = 1e-5 the difference cancels; use |f'|·chord (relative error O(t²)).
          const Vec y{std::cos(th + sgn * t), std::sin(th + sgn * t)};
          const double num = t < 1e-5 ? std::pow(speed * chord, o.p) : difference_power(fx, f.value(y), m, o.p);
          acc += rule.weight[j] * dt * num / c;
        }
      }
      part[i] = acc;
    });
    return 2.0 * kPi / nodes * pairwise_sum(part);
  };
  const int line_nodes = 96;
  int nodes = 16;
  while (static_cast<long>(nodes) * 4 * line_nodes <= o.samples && nodes < (1 << 12)) nodes *= 2;
  const double fine = run(nodes, line_nodes);
  const double coarse = run(nodes / 2, line_nodes / 2);
  SeminormEstimate e = finish_power(fine, std::abs(fine - coarse), o.p);
  e.method = "tensor-quadrature";
  e.samples = 3L * nodes * line_nodes;
  e.seed = o.seed;
  e.strata = nodes;
  return e;
}

SeminormEstimate sobolev_stratified(const SmoothMap& f, const SobolevOptions& o) {
  const int n = f.domain_dim(), m = f.target().ambient();
  const double s = o.beta * o.p + n;
  const double q = o.p * (1.0 - o.beta);
  const double vol = sphere_volume(n);

  // Stream 0: near-diagonal density E|Df(x)u|ᵖ; stream k+1: chord shell [2^{-k}, 2^{1-k}].
  auto tail_sample = [&](std::mt19937_64& rng) {
    const Vec x = uniform_on_sphere(n, rng);
    const Vec u = tangent_direction(x, n, rng);
    const Vec du = f.jacobian(x).apply(u, n + 1);
    return std::pow(norm(du, m), o.p);
  };
  auto shell_sample = [&](int k) {
    const double a = chord_angle(std::ldexp(1.0, -k)), b = chord_angle(std::ldexp(1.0, 1 - k));
    return [&, a, b](std::mt19937_64& rng) {
      const Vec x = uniform_on_sphere(n, rng);
      const Vec y = sample_in_shell(x, n, a, b, rng);
      const double r = norm(sub(x, y, n + 1), n + 1);
      return difference_power(f.value(x), f.value(y), m, o.p) / std::pow(r, s);
    };
  };
  auto shell_weight = [&](int k) {
    return vol * shell_measure(n, chord_angle(std::ldexp(1.0, -k)), chord_angle(std::ldexp(1.0, 1 - k)));
  };
  // Tail stratum weight for inner chord radius r.
  auto tail_weight = [&](double r) { return vol * sphere_volume(n - 1) * std::pow(r, q) / q; };

  const long pilot = std::max<long>(256, o.samples / (20L * o.max_shells));
  std::vector<Moments> mom;
  std::vector<double> weight;
  mom.push_back(run_stream(pilot, o.seed, 0, 0, tail_sample));
  double running = 0.0;
  int shells = 0;
  for (int k = 0; k < o.max_shells; ++k) {
    mom.push_back(run_stream(pilot, o.seed, static_cast<std::uint64_t>(k) + 1, 0, shell_sample(k)));
    weight.push_back(shell_weight(k));
    running += weight.back() * mom.back().mean();
    shells = k + 1;
    const double tail = tail_weight(std::ldexp(1.0, -k)) * mom[0].mean();
    if (tail <= o.tail_target * (running + tail)) break;
  }
  weight.insert(weight.begin(), tail_weight(std::ldexp(1.0, 1 - shells)));

  // Neyman allocation of the remaining budget from the pilot spreads.
  const long used = pilot * static_cast<long>(mom.size());
  const long budget = std::max<long>(0, o.samples - used);
  std::vector<double> score(mom.size());
  for (std::size_t j = 0; j < mom.size(); ++j) score[j] = weight[j] * std::sqrt(mom[j].variance());
  const double total_score = std::accumulate(score.begin(), score.end(), 0.0);
  long drawn = used;
  for (std::size_t j = 0; j < mom.size(); ++j) {
    const double share = total_score > 0.0 ? score[j] / total_score : 1.0 / static_cast<double>(mom.size());
    const long extra = static_cast<long>(std::floor(share * static_cast<double>(budget)));
    if (extra <= 0) continue;
    const long first_chunk = (pilot + kChunk - 1) / kChunk;
    mom[j].add(j == 0 ? run_stream(extra, o.seed, 0, first_chunk, tail_sample)
                      : run_stream(extra, o.seed, j, first_chunk, shell_sample(static_cast<int>(j) - 1)));
    drawn += extra;
  }

  double integral = 0.0, variance = 0.0;
  for (std::size_t j = 0; j < mom.size(); ++j) {
    integral += weight[j] * mom[j].mean();
    variance += weight[j] * weight[j] * mom[j].variance() / static_cast<double>(mom[j].n);
  }
  SeminormEstimate e = finish_power(integral, std::sqrt(variance), o.p);
  e.method = "stratified-MC";
  e.samples = drawn;
  e.seed = o.seed;
  e.strata = shells;
  e.tail_fraction = integral > 0.0 ? weight[0] * mom[0].mean() / integral : 0.0;
  return e;
}

}  // namespace

SeminormEstimate sobolev_seminorm(const SmoothMap& f, const SobolevOptions& options) {
  check_sobolev(f, options);
  switch (options.method) {
    case SobolevMethod::plain:
      return sobolev_plain(f, options);
    case SobolevMethod::tensor:
      return sobolev_tensor(f, options);
    case SobolevMethod::stratified:
    default:
      return sobolev_stratified(f, options);
  }
}

// ------------------------------------------------------------------- Hölder

namespace {

struct Pair {
  Vec x{}, y{};
  double ratio = 0.0;
};

constexpr double kMinChord = 1e-7;

double holder_ratio(const SmoothMap& f, const Vec& x, const Vec& y, double beta) {
  const int n = f.domain_dim(), m = f.target().ambient();
  const double r = norm(sub(x, y, n + 1), n + 1);
  if (r < kMinChord) return -1.0;
  return norm(sub(f.value(x), f.value(y), m), m) / std::pow(r, beta);
}

Vec move_along(const Vec& x, int n, double step, std::mt19937_64& rng) {
  const Vec u = tangent_direction(x, n, rng);
  Vec y{};
  for (int i = 0; i <= n; ++i) y[i] = std::cos(step) * x[i] + std::sin(step) * u[i];
  return normalized(y, n + 1);
}

}  // namespace

SeminormEstimate holder_seminorm(const SmoothMap& f, const HolderOptions& o) {
  if (!(o.beta > 0.0 && o.beta <= 1.0)) throw Error("beta must lie in (0,1]");
  if (o.samples < 1) throw Error("sample count must be positive");
  const int n = f.domain_dim();
  const long chunks = (o.samples + kChunk - 1) / kChunk;
  const std::size_t keep = static_cast<std::size_t>(std::max(1, o.starts));
  std::vector<std::vector<Pair>> best(static_cast<std::size_t>(chunks));
  auto by_ratio = [](const Pair& a, const Pair& b) { return a.ratio > b.ratio; };
  parallel_chunks(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    std::mt19937_64 rng(derive_seed(o.seed, c));
    std::uniform_int_distribution<int> scale(0, 23);
    const long begin = static_cast<long>(c) * kChunk, end = std::min(o.samples, begin + kChunk);
    std::vector<Pair> local;
    for (long i = begin; i < end; ++i) {
      Pair p;
      p.x = uniform_on_sphere(n, rng);
      // Alternate global pairs with pairs at dyadic chord 2^{1-j}.
      p.y = (i % 2 == 0) ? uniform_on_sphere(n, rng) : move_along(p.x, n, chord_angle(std::ldexp(1.0, 1 - scale(rng))), rng);
      p.ratio = holder_ratio(f, p.x, p.y, o.beta);
      local.push_back(p);
    }
    const std::size_t k = std::min(keep, local.size());
    std::partial_sort(local.begin(), local.begin() + static_cast<long>(k), local.end(), by_ratio);
    local.resize(k);
    best[c] = std::move(local);
  });
  std::vector<Pair> pool;
  for (auto& b : best) pool.insert(pool.end(), b.begin(), b.end());
  std::stable_sort(pool.begin(), pool.end(), by_ratio);
  pool.resize(std::min(keep, pool.size()));
  const double sampled = pool.empty() ? 0.0 : std::max(0.0, pool.front().ratio);

  std::vector<double> climbed(pool.size());
  parallel_chunks(pool.size(), [&](std::size_t s) {
    std::mt19937_64 rng(derive_seed(o.seed ^ 0x9e3779b97f4a7c15ULL, s));
    Pair cur = pool[s];
    const double r = norm(sub(cur.x, cur.y, n + 1), n + 1);
    double step = 0.25 * std::max(r, kMinChord);
    int failures = 0;
    for (int it = 0; it < o.climb_steps && step > 1e-10; ++it) {
      const Vec x = move_along(cur.x, n, step, rng), y = move_along(cur.y, n, step, rng);
      const double v = holder_ratio(f, x, y, o.beta);
      if (v > cur.ratio) {
        cur = {x, y, v};
        failures = 0;
      } else if (++failures >= 8) {
        step *= 0.5;
        failures = 0;
      }
    }
    climbed[s] = cur.ratio;
  });
  SeminormEstimate e;
  e.value = std::max(sampled, climbed.empty() ? 0.0 : *std::max_element(climbed.begin(), climbed.end()));
  e.error = e.value - sampled;
  e.method = "sampled-sup";
  e.samples = o.samples + static_cast<long>(pool.size()) * o.climb_steps;
  e.seed = o.seed;
  e.strata = static_cast<int>(pool.size());
  return e;
}

// ---------------------------------------------------------------------- BMO

double cap_oscillation(const SmoothMap& f, const Vec& center, double radius, int points, std::mt19937_64& rng,
                       double* error) {
  if (points < 2) throw Error("a cap needs at least two points");
  const int n = f.domain_dim(), m = f.target().ambient();
  const double a = chord_angle(radius);
  std::vector<Vec> v(static_cast<std::size_t>(points));
  for (auto& y : v) y = f.value(sample_in_shell(center, n, 0.0, a, rng));
  std::vector<double> h(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      const double d = norm(sub(v[i], v[j], m), m);
      h[i] += d;
      h[j] += d;
    }
  const double k = static_cast<double>(points);
  double total = 0.0;
  for (auto& x : h) {
    total += x;
    x /= (k - 1.0);
  }
  const double u = total / (k * (k - 1.0));
  if (error) {
    // Hoeffding projection: Var U ≈ 4 Var(h_i) / k.
    double var = 0.0;
    for (double x : h) var += (x - u) * (x - u);
    var /= (k - 1.0);
    *error = std::sqrt(4.0 * var / k);
  }
  return u;
}

SeminormEstimate bmo_seminorm(const SmoothMap& f, const BmoOptions& o) {
  if (!(o.min_radius > 0.0)) throw Error("minimum radius must be positive");
  if (o.centers < 1) throw Error("need at least one center");
  const int n = f.domain_dim();
  std::vector<double> radii;
  for (double r = 2.0; r >= o.min_radius * (1.0 - 1e-12); r *= 0.5) radii.push_back(r);
  std::vector<Vec> centers(static_cast<std::size_t>(o.centers));
  {
    std::mt19937_64 rng(derive_seed(o.seed, 0));
    for (auto& c : centers) c = uniform_on_sphere(n, rng);
  }
  const std::size_t jobs = centers.size() * radii.size();
  std::vector<double> value(jobs), err(jobs);
  parallel_chunks(jobs, [&](std::size_t j) {
    std::mt19937_64 rng(derive_seed(o.seed, j + 1));
    value[j] = cap_oscillation(f, centers[j / radii.size()], radii[j % radii.size()], o.points_per_cap, rng, &err[j]);
  });
  const std::size_t arg = static_cast<std::size_t>(std::max_element(value.begin(), value.end()) - value.begin());
  SeminormEstimate e;
  e.value = value[arg];
  e.error = err[arg];
  e.method = "stratified-MC";
  e.samples = static_cast<long>(jobs) * o.points_per_cap;
  e.seed = o.seed;
  e.strata = static_cast<int>(radii.size());
  return e;
}

// ------------------------------------------------------------------ Poisson

SphereNodes sphere_nodes(const SimplicialSphere& mesh, int degree) {
  const int n = mesh.dimension();
  const SimplexRule& rule = simplex_rule(n, degree);
  double factorial = 1.0;
  for (int i = 2; i <= n; ++i) factorial *= i;
  SphereNodes out;
  out.point.reserve(mesh.count(n) * rule.size());
  out.weight.reserve(mesh.count(n) * rule.size());
  for (std::size_t t = 0; t < mesh.count(n); ++t) {
    const auto& s = mesh.simplex(n, t);
    const auto e = mesh.edge_frame(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Vec p{};
      for (int i = 0; i <= n; ++i)
        for (int c = 0; c <= n; ++c) p[c] += rule.bary[q][i] * mesh.vertex(s[i])[c];
      std::array<Vec, 4> cols{};
      cols[0] = p;
      for (int i = 0; i < n; ++i) cols[i + 1] = e[i];
      const double det = std::abs(column_determinant(std::span<const Vec>(cols.data(), n + 1), n + 1));
      const double r = norm(p, n + 1);
      out.point.push_back(scaled(p, 1.0 / r, n + 1));
      out.weight.push_back(rule.weight[q] * det / (factorial * std::pow(r, n + 1)));
    }
  }
  return out;
}

std::vector<PoissonProbe> poisson_extension_distance(const SmoothMap& f, const std::vector<Vec>& probes,
                                                     const MeshPtr& mesh, int quad_degree) {
  const int n = f.domain_dim(), m = f.target().ambient();
  if (mesh->dimension() != n) throw Error("mesh dimension does not match the map domain");
  for (const auto& x : probes)
    if (!(norm(x, n + 1) < 1.0)) throw Error("probe outside the open unit ball");
  const SphereNodes nodes = sphere_nodes(*mesh, quad_degree);
  std::vector<Vec> values(nodes.point.size());
  parallel_chunks(values.size(), [&](std::size_t i) { values[i] = f.value(nodes.point[i]); });
  std::vector<PoissonProbe> out(probes.size());
  parallel_chunks(probes.size(), [&](std::size_t k) {
    const Vec& x = probes[k];
    const double c = 1.0 - dot(x, x, n + 1);
    double mass = 0.0;
    Vec acc{};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double w = nodes.weight[i] * c / std::pow(norm(sub(x, nodes.point[i], n + 1), n + 1), n + 1);
      mass += w;
      for (int j = 0; j < m; ++j) acc[j] += w * values[i][j];
    }
    out[k].point = x;
    out[k].extension = scaled(acc, 1.0 / mass, m);
    out[k].distance = f.target().distance(out[k].extension);
  });
  return out;
}

std::vector<Vec> default_poisson_probes(int domain_dim, const std::vector<double>& radii) {
  std::vector<Vec> probes{Vec{}};
  for (double r : radii)
    for (int i = 0; i <= domain_dim; ++i)
      for (double sgn : {1.0, -1.0}) {
        Vec x{};
        x[i] = sgn * r;
        probes.push_back(x);
      }
  return probes;
}

}  // namespace qtopo
