#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "qtopo/hodge.hpp"

using namespace qtopo;

namespace {

Cochain random_cochain(const MeshPtr& mesh, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Cochain c(mesh, k);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = g(rng);
  return c;
}

LambdaForm smooth_one_form(int dim) {
  return LambdaForm(dim, 1, [dim](const Vec& x, std::span<const Vec> v) {
    const Vec a{x[1] * x[2] + x[dim], std::sin(2.0 * x[0]), x[0] * x[0] - x[1], std::cos(x[1] + x[2]) * x[0], 0.0, 0.0};
    return dot(a, v[0], dim + 1);
  });
}

LambdaForm smooth_zero_form(int dim) {
  return LambdaForm(dim, 0, [dim](const Vec& x, std::span<const Vec>) {
    return std::exp(x[0]) * x[1] + x[2] * x[dim] + 0.3 * std::sin(3.0 * x[2]);
  });
}

}  // namespace

TEST(Codifferential, ZeroAndDegreeZero) {
  const auto mesh = make_sphere_mesh(2, 2);
  const WhitneyComplex cx(mesh);
  const Cochain z = codifferential(cx, Cochain(mesh, 1));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  try {
    codifferential(cx, Cochain(mesh, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no codifferential");
  }
}

TEST(Codifferential, CircleMatchesHandBuiltP1Laplacian) {
  // On S¹ the Whitney complex is P1 / P0: d*du satisfies M_P1 (d*du) = K u with
  // K the P1 stiffness (1/h stencil) and M_P1 the P1 mass (h/3, h/6 stencil).
  const auto mesh = make_sphere_mesh(1, 4);
  const WhitneyComplex cx(mesh);
  const Cochain u = random_cochain(mesh, 0, 3);
  const Cochain x = codifferential(cx, exterior_derivative(u));
  const std::size_t n = mesh->count(0);
  std::vector<double> ku(n, 0.0), mx(n, 0.0);
  for (std::size_t e = 0; e < mesh->count(1); ++e) {
    const auto& s = mesh->simplex(1, e);
    const double h = norm(sub(mesh->vertex(s[0]), mesh->vertex(s[1]), 2), 2);
    const int a = s[0], b = s[1];
    ku[a] += (u[a] - u[b]) / h;
    ku[b] += (u[b] - u[a]) / h;
    mx[a] += h / 3.0 * x[a] + h / 6.0 * x[b];
    mx[b] += h / 3.0 * x[b] + h / 6.0 * x[a];
  }
  double scale = 0.0;
  for (double v : ku) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(mx[i], ku[i], 1e-9 * scale);
}

class HodgeSymmetry : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(HodgeSymmetry, LaplacianIsSelfAdjointInMassInnerProduct) {
  const auto [dim, k] = GetParam();
  const auto mesh = make_sphere_mesh(dim, 2);
  const auto cx = std::make_shared<const WhitneyComplex>(mesh);
  const HodgeOperator op(cx, k);
  for (int trial = 0; trial < 3; ++trial) {
    const Cochain a = random_cochain(mesh, k, 100 + trial), b = random_cochain(mesh, k, 200 + trial);
    std::vector<double> aa(a.size()), ab(a.size());
    op.apply(a.values(), aa);
    op.apply(b.values(), ab);
    const double lhs = kernels::dot(b.values(), aa), rhs = kernels::dot(a.values(), ab);
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * cx->norm(a) * cx->norm(b)) << lhs << " " << rhs;
    EXPECT_GT(kernels::dot(a.values(), aa), 0.0);
  }
}

INSTANTIATE_TEST_SUITE_P(Degrees, HodgeSymmetry,
                         ::testing::Values(std::pair{2, 1}, std::pair{3, 1}, std::pair{3, 2}, std::pair{2, 0}));

TEST(DInverse, ZeroGivesZero) {
  const auto mesh = make_sphere_mesh(2, 2);
  const auto cx = std::make_shared<const WhitneyComplex>(mesh);
  const Cochain xi = d_inverse(cx, Cochain(mesh, 1));
  EXPECT_EQ(xi.degree(), 0);
  for (double v : xi.values()) EXPECT_EQ(v, 0.0);
}

TEST(DInverse, RejectsNonClosedInput) {
  const auto mesh = make_sphere_mesh(2, 2);
  const auto cx = std::make_shared<const WhitneyComplex>(mesh);
  try {
    d_inverse(cx, random_cochain(mesh, 1, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "input not closed");
  }
}

TEST(DInverse, RejectsDegreeOutsideRange) {
  const auto mesh = make_sphere_mesh(2, 1);
  const auto cx = std::make_shared<const WhitneyComplex>(mesh);
  EXPECT_THROW(d_inverse(cx, Cochain(mesh, 2)), Error);
  EXPECT_THROW(d_inverse(cx, Cochain(mesh, 0)), Error);
}

struct RoundTripCase {
  int dim, level, degree;
};

class DInverseRoundTrip : public ::testing::TestWithParam<RoundTripCase> {};

TEST_P(DInverseRoundTrip, ExactFormsRecovered) {
  const auto [dim, level, degree] = GetParam();
  const auto mesh = make_sphere_mesh(dim, level);
  const auto cx = std::make_shared<const WhitneyComplex>(mesh);
  const Cochain alpha = degree == 1 ? de_rham_project(smooth_zero_form(dim), mesh) : de_rham_project(smooth_one_form(dim), mesh);
  const Cochain eta = exterior_derivative(alpha);
  HodgeStats stats;
  const auto t0 = std::chrono::steady_clock::now();
  const Cochain xi = d_inverse(cx, eta, {}, &stats);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double en = cx->norm(eta);
  const double res = cx->norm(exterior_derivative(xi) - eta) / en;
  const double coex = coexactness_defect(*cx, xi) / en;
  std::cout << "N=" << dim << " level " << level << " degree " << degree << ": iters " << stats.iterations
            << " mass iters " << stats.mass_iterations << " |dξ−η|/|η| " << res << " |d*ξ|/|η| " << coex << " ("
            << secs << " s)\n";
  EXPECT_LT(res, 1e-6);
  EXPECT_LT(coex, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Meshes, DInverseRoundTrip,
                         ::testing::Values(RoundTripCase{2, 4, 1}, RoundTripCase{3, 2, 1}, RoundTripCase{3, 2, 2}));

TEST(DInverse, LinearAndDeterministic) {
  const auto mesh = make_sphere_mesh(3, 1);
  const auto cx = std::make_shared<const WhitneyComplex>(mesh);
  const Cochain e1 = exterior_derivative(random_cochain(mesh, 1, 1));
  const Cochain e2 = exterior_derivative(random_cochain(mesh, 1, 2));
  const Cochain x1 = d_inverse(cx, e1), x2 = d_inverse(cx, e2);
  const Cochain x12 = d_inverse(cx, 2.0 * e1 - 0.5 * e2);
  const Cochain expected = 2.0 * x1 - 0.5 * x2;
  EXPECT_LT(cx->norm(x12 - expected) / cx->norm(expected), 1e-7);
  const Cochain again = d_inverse(cx, e1);
  for (std::size_t i = 0; i < x1.size(); ++i) EXPECT_EQ(x1[i], again[i]);
}
