#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qtopo/cochain.hpp"
#include "qtopo/maps.hpp"

using namespace qtopo;

namespace {

const std::vector<std::string> kSpecs = {
    "circle-power:d=0",
    "circle-power:d=1",
    "circle-power:d=3",
    "circle-power:d=-3",
    "suspension:d=1",
    "suspension:d=2",
    "suspension:d=-3",
    "antipodal:n=1",
    "antipodal:n=2",
    "antipodal:n=3",
    "identity:n=2",
    "identity:n=3",
    "const:n=3,m=2",
    "hopf",
    "compose:suspension:d=2|hopf",
    "compose:antipodal:n=2|hopf",
    "product:hopf,const:n=3,m=2",
    "product:hopf,compose:suspension:d=2|hopf",
    "perturb:eps=0.1,m=7|hopf",
    "perturb:eps=0.15,m=3|circle-power:d=2",
    "perturb:eps=0.05,m=2|product:hopf,hopf",
    "rotate:seed=3|hopf",
    "reflect|identity:n=2",
};

Vec random_point(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vec x{};
  for (int i = 0; i < n; ++i) x[i] = g(rng);
  return normalized(x, n);
}

Vec random_tangent(std::mt19937_64& rng, const Vec& x, int n) {
  std::normal_distribution<double> g;
  Vec v{};
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  const double p = dot(x, v, n);
  for (int i = 0; i < n; ++i) v[i] -= p * x[i];
  return v;
}

// Winding of a closed curve in ℝ² \ 0 by summing principal argument increments.
double tracked_winding(const SmoothMap& f, int samples) {
  double total = 0.0;
  Vec prev = f.value({1.0, 0.0});
  for (int i = 1; i <= samples; ++i) {
    const double t = 2.0 * kPi * i / samples;
    const Vec y = f.value({std::cos(t), std::sin(t)});
    total += std::atan2(prev[0] * y[1] - prev[1] * y[0], prev[0] * y[0] + prev[1] * y[1]);
    prev = y;
  }
  return total / (2.0 * kPi);
}

double sum_top(const Cochain& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c[i];
  return s;
}

double l2(const Cochain& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * c[i];
  return std::sqrt(s);
}

}  // namespace

TEST(Maps, ValuesLieOnTarget) {
  std::mt19937_64 rng(11);
  for (const auto& spec : kSpecs) {
    const MapPtr f = parse_map(spec);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) worst = std::max(worst, f->target().distance(f->value(random_point(rng, f->domain_ambient()))));
    EXPECT_LT(worst, 1e-12) << spec;
  }
}

TEST(Maps, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  for (const auto& spec : kSpecs) {
    const MapPtr f = parse_map(spec);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Vec x = random_point(rng, f->domain_ambient());
      worst = std::max(worst, jacobian_fd_error(*f, x, random_tangent(rng, x, f->domain_ambient())));
    }
    EXPECT_LT(worst, 1e-6) << spec;
  }
}

TEST(Maps, HopfFiberOverNorthPole) {
  const MapPtr h = make_hopf();
  for (int i = 0; i < 64; ++i) {
    const double t = 2.0 * kPi * i / 64;
    const Vec y = h->value({std::cos(t), std::sin(t), 0.0, 0.0});
    EXPECT_NEAR(y[0], 1.0, 1e-12);
    EXPECT_NEAR(y[1], 0.0, 1e-12);
    EXPECT_NEAR(y[2], 0.0, 1e-12);
  }
}

TEST(Maps, CirclePowerWindingByArgumentTracking) {
  for (int d : {-3, 0, 1, 2, 5}) EXPECT_NEAR(tracked_winding(*make_circle_power(d), 4096), d, 1e-9) << d;
  EXPECT_NEAR(tracked_winding(*parse_map("perturb:eps=0.1,m=7|circle-power:d=2"), 8192), 2.0, 1e-9);
}

TEST(Maps, CirclePowerHasConstantSpeed) {
  const MapPtr f = make_circle_power(-3);
  const TargetForm& w = TargetForm::get("s1:dtheta");
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_point(rng, 2);
    const Vec v = {-x[1], x[0]};
    EXPECT_NEAR(pullback(*f, w, x, std::span(&v, 1)) * 2.0 * kPi, -3.0, 1e-12);
  }
}

TEST(Maps, JacobianDeterminantRatioOnS2) {
  const TargetForm& vol = TargetForm::get("s2:vol");
  const MapPtr id = make_identity(2);
  std::mt19937_64 rng(14);
  for (const auto& [spec, ratio] : std::vector<std::pair<std::string, double>>{
           {"suspension:d=2", 2.0}, {"suspension:d=-3", -3.0}, {"antipodal:n=2", -1.0}, {"reflect|identity:n=2", -1.0}}) {
    const MapPtr f = parse_map(spec);
    for (int i = 0; i < 100; ++i) {
      const Vec x = random_point(rng, 3);
      const std::array<Vec, 2> v = {random_tangent(rng, x, 3), random_tangent(rng, x, 3)};
      EXPECT_NEAR(pullback(*f, vol, x, v), ratio * pullback(*id, vol, x, v), 1e-12) << spec;
    }
  }
}

TEST(Pullback, ConstantMapGivesZero) {
  std::mt19937_64 rng(15);
  const MapPtr c = parse_map("const:n=3,m=2");
  const Vec x = random_point(rng, 4);
  const std::array<Vec, 2> v = {random_tangent(rng, x, 4), random_tangent(rng, x, 4)};
  EXPECT_EQ(pullback(*c, TargetForm::get("s2:vol"), x, v), 0.0);
}

TEST(Pullback, IdentityReproducesVolumeForm) {
  std::mt19937_64 rng(16);
  const MapPtr id = make_identity(2);
  for (int i = 0; i < 50; ++i) {
    const Vec x = random_point(rng, 3);
    const std::array<Vec, 2> v = {random_tangent(rng, x, 3), random_tangent(rng, x, 3)};
    const std::array<Vec, 3> cols = {x, v[0], v[1]};
    EXPECT_NEAR(pullback(*id, TargetForm::get("s2:vol"), x, v), column_determinant(cols, 3) / (4.0 * kPi), 1e-15);
  }
}

TEST(Pullback, HopfMatchesFiniteDifferencePullback) {
  std::mt19937_64 rng(17);
  const MapPtr h = make_hopf();
  const TargetForm& vol = TargetForm::get("s2:vol");
  const double step = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_point(rng, 4);
    std::array<Vec, 2> v = {normalized(random_tangent(rng, x, 4), 4), {}};
    v[1] = random_tangent(rng, x, 4);
    v[1] = normalized(sub(v[1], scaled(v[0], dot(v[0], v[1], 4), 4), 4), 4);
    std::array<Vec, 2> w{};
    for (int k = 0; k < 2; ++k) {
      Vec p{}, m{};
      for (int j = 0; j < 4; ++j) {
        p[j] = std::cos(step) * x[j] + std::sin(step) * v[k][j];
        m[j] = std::cos(step) * x[j] - std::sin(step) * v[k][j];
      }
      w[k] = scaled(sub(h->value(p), h->value(m), 3), 0.5 / std::sin(step), 3);
    }
    EXPECT_NEAR(pullback(*h, vol, x, v), vol.evaluate(h->value(x), w), 1e-6);
  }
}

TEST(Pullback, IsAlternating) {
  std::mt19937_64 rng(18);
  const MapPtr h = parse_map("perturb:eps=0.1,m=3|hopf");
  const Vec x = random_point(rng, 4);
  const Vec a = random_tangent(rng, x, 4), b = random_tangent(rng, x, 4);
  const std::array<Vec, 2> ab = {a, b}, ba = {b, a}, aa = {a, a};
  const TargetForm& vol = TargetForm::get("s2:vol");
  EXPECT_NEAR(pullback(*h, vol, x, ab), -pullback(*h, vol, x, ba), 1e-15);
  EXPECT_NEAR(pullback(*h, vol, x, aa), 0.0, 1e-15);
}

TEST(Pullback, Errors) {
  const std::array<Vec, 2> v{};
  EXPECT_THROW(pullback(*parse_map("const:n=1,m=s2xs2"), TargetForm::get("s2xs2:omega1"), {1.0, 0.0}, v), Error);
  EXPECT_THROW(pullback(*make_hopf(), TargetForm::get("s3:vol"), {1.0, 0.0, 0.0, 0.0}, v), Error);
  EXPECT_THROW(PullbackForm(make_circle_power(2), TargetForm::get("s2:vol")), Error);
  EXPECT_THROW(TargetForm::get("cp2:omega"), Error);
}

TEST(Pullback, EquivariantUnderDomainRotation) {
  std::mt19937_64 rng(19);
  const TargetForm& vol = TargetForm::get("s2:vol");
  for (const std::string base : {"hopf", "perturb:eps=0.1,m=5|hopf"}) {
    const MapPtr f = parse_map(base);
    const MapPtr fr = make_rotated(f, 42);
    const Rotation r = Rotation::random(4, 42);
    for (int i = 0; i < 100; ++i) {
      const Vec x = random_point(rng, 4);
      const std::array<Vec, 2> v = {random_tangent(rng, x, 4), random_tangent(rng, x, 4)};
      const std::array<Vec, 2> rv = {r.apply(v[0]), r.apply(v[1])};
      EXPECT_NEAR(pullback(*fr, vol, x, v), pullback(*f, vol, r.apply(x), rv), 1e-12);
    }
  }
}

TEST(Rotation, IsSpecialOrthogonal) {
  for (int n : {2, 3, 4}) {
    const Rotation r = Rotation::random(n, 7);
    std::array<Vec, 4> cols{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += r.m[i * 4 + k] * r.m[j * 4 + k];
        EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-14);
        cols[j][i] = r.m[i * 4 + j];
      }
    EXPECT_NEAR(column_determinant(std::span<const Vec>(cols.data(), n), n), 1.0, 1e-14);
  }
}

TEST(TargetForms, VolumeFormsIntegrateToOne) {
  for (const auto& [dim, level] : std::vector<std::pair<int, int>>{{1, 5}, {2, 4}, {3, 3}}) {
    const MapPtr id = make_identity(dim);
    const PullbackForm form(id, TargetForm::volume(id->target()));
    EXPECT_NEAR(sum_top(de_rham_project(form, make_sphere_mesh(dim, level))), 1.0, 1e-6) << dim;
  }
}

TEST(TargetForms, PullbacksProjectToClosedCochains) {
  // closedness is limited only by quadrature error on the curved simplices
  const auto s3 = make_sphere_mesh(3, 2);
  const int q = 12;
  for (const std::string spec : {"hopf", "compose:suspension:d=2|hopf", "perturb:eps=0.1,m=2|hopf"}) {
    const Cochain c = de_rham_project(PullbackForm(parse_map(spec), TargetForm::get("s2:vol")), s3, q);
    EXPECT_LT(l2(exterior_derivative(c)) / l2(c), 1e-6) << spec;
  }
  const MapPtr p = parse_map("product:hopf,compose:suspension:d=2|hopf");
  for (const char* name : {"s2xs2:omega1", "s2xs2:omega2"}) {
    const Cochain c = de_rham_project(PullbackForm(p, TargetForm::get(name)), s3, q);
    EXPECT_LT(l2(exterior_derivative(c)) / l2(c), 1e-6) << name;
  }
}

TEST(Perturbation, ZeroAmplitudeLeavesMapUnchanged) {
  const MapPtr h = make_hopf();
  EXPECT_EQ(make_oscillation_perturbation(h, 0.0, 7), h);
}

TEST(Perturbation, LargeAmplitudeRejected) {
  try {
    make_oscillation_perturbation(make_hopf(), 0.2, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "leaves tubular neighborhood");
  }
  EXPECT_THROW(make_oscillation_perturbation(make_hopf(), -0.1, 3), Error);
  EXPECT_THROW(parse_map("perturb:eps=0.5,m=1|hopf"), Error);
}

TEST(Perturbation, StaysCloseToBase) {
  std::mt19937_64 rng(20);
  const MapPtr h = make_hopf();
  const MapPtr p = make_oscillation_perturbation(h, 0.1, 7);
  for (int i = 0; i < 200; ++i) {
    const Vec x = random_point(rng, 4);
    EXPECT_LT(norm(sub(p->value(x), h->value(x), 3), 3), 0.2);
  }
}

TEST(Product, BlockStructure) {
  std::mt19937_64 rng(21);
  const MapPtr hc = parse_map("product:hopf,const");
  const MapPtr hh = parse_map("product:hopf,hopf");
  for (int i = 0; i < 50; ++i) {
    const Vec x = random_point(rng, 4);
    const std::array<Vec, 2> v = {random_tangent(rng, x, 4), random_tangent(rng, x, 4)};
    EXPECT_EQ(pullback(*hc, TargetForm::get("s2xs2:omega2"), x, v), 0.0);
    EXPECT_NEAR(pullback(*hc, TargetForm::get("s2xs2:omega1"), x, v), pullback(*make_hopf(), TargetForm::get("s2:vol"), x, v),
                1e-15);
    EXPECT_EQ(pullback(*hh, TargetForm::get("s2xs2:omega1"), x, v), pullback(*hh, TargetForm::get("s2xs2:omega2"), x, v));
  }
  EXPECT_THROW(make_product_map(make_hopf(), make_identity(2)), Error);
  EXPECT_THROW(make_product_map(make_hopf(), make_circle_power(1)), Error);
}

TEST(Parser, CanonicalSpecsRoundTrip) {
  for (const auto& spec : kSpecs) EXPECT_EQ(parse_map(spec)->spec(), spec);
  EXPECT_EQ(parse_map("product:hopf,const")->spec(), "product:hopf,const:n=3,m=2");
  EXPECT_EQ(parse_map("const", 2)->spec(), "const:n=2,m=2");
}

TEST(Parser, RejectsMalformedSpecs) {
  for (const char* bad : {"", "nosuch", "circle-power", "circle-power:d=x", "circle-power:k=1", "suspension:d=1.5",
                          "compose:hopf", "product:hopf", "perturb:eps=0.1", "reflect", "hopf:d=1", "const",
                          "compose:hopf|hopf", "identity:n=9"})
    EXPECT_THROW(parse_map(bad), Error) << bad;
}
