#include <gtest/gtest.h>

#include <cmath>

#include "qtopo/invariants.hpp"

using namespace qtopo;

namespace {

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

// x ↦ Π(c + x₀₁₂/2): image inside a cap, so null-homotopic.
MapPtr cap_map() {
  auto eval = [](const Vec& x, Vec& y, Jacobian* j) {
    const Vec s = {1.0 + 0.5 * x[0], 0.5 * x[1], 0.5 * x[2]};
    const Target t = Target::sphere(2);
    y = t.project(s);
    if (j) {
      *j = Jacobian{};
      for (int i = 0; i < 3; ++i) {
        Vec e{};
        e[i] = 0.5;
        j->col[i] = t.project_derivative(s, e);
      }
    }
  };
  return std::make_shared<SmoothMap>(3, Target::sphere(2), "cap", eval);
}

struct HopfLevels : ::testing::Test {
  static MeshPtr mesh(int level) {
    static std::array<MeshPtr, 4> meshes;
    if (!meshes[level]) meshes[level] = make_sphere_mesh(3, level);
    return meshes[level];
  }
  static ComplexPtr complex(int level) {
    static std::array<ComplexPtr, 4> complexes;
    if (!complexes[level]) complexes[level] = std::make_shared<WhitneyComplex>(mesh(level));
    return complexes[level];
  }
  static InvariantResult hopf(const std::string& spec, int level) {
    return hopf_invariant(*parse_map(spec), mesh(level), {}, complex(level));
  }
};

}  // namespace

TEST(Structure, BuiltinsAreValid) {
  for (const auto& s : {DegreeStructure::winding(), DegreeStructure::sphere_degree(2), DegreeStructure::sphere_degree(3),
                        DegreeStructure::hopf(), DegreeStructure::s2xs2_beta(1), DegreeStructure::s2xs2_beta(2),
                        DegreeStructure::s2xs2_alpha(1), DegreeStructure::s2xs2_alpha(2)}) {
    EXPECT_NO_THROW(s.validate()) << s.name;
    EXPECT_TRUE(s.evaluable());
  }
  EXPECT_EQ(DegreeStructure::hopf().length(), 1);
  EXPECT_EQ(DegreeStructure::sphere_degree(2).length(), 0);
}

TEST(Structure, RejectsInvalidDegrees) {
  DegreeStructure bad{"bad", 3, {{1.0, {2, 3}, {}}}};
  EXPECT_THROW(bad.validate(), Error);  // sum 5 ≠ N + L = 4
  DegreeStructure range{"range", 4, {{1.0, {1, 4}, {}}}};
  EXPECT_THROW(range.validate(), Error);  // sum ok, M0 = 1 and M1 = N
  DegreeStructure l0{"l0", 3, {{1.0, {2}, {}}}};
  EXPECT_THROW(l0.validate(), Error);
  DegreeStructure wrong_form{"wf", 3, {{1.0, {2, 2}, {"s2:vol", "s3:vol"}}}};
  EXPECT_THROW(wrong_form.validate(), Error);
}

TEST(Structure, SymbolicStructureNotEvaluable) {
  const DegreeStructure s{"symbolic", 3, {{1.0, {2, 2}, {}}}};
  EXPECT_NO_THROW(s.validate());
  try {
    hardt_riviere(*make_hopf(), s, make_sphere_mesh(3, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "structure not numerically evaluable");
  }
}

TEST(Winding, CirclePowersExactAtLevelSeven) {
  const auto mesh = make_sphere_mesh(1, 7);
  for (int d = -10; d <= 10; ++d) EXPECT_NEAR(winding_number(*make_circle_power(d), mesh).value, d, 1e-12) << d;
}

TEST(Winding, ConstantIsZero) {
  const auto f = parse_map("const:n=1,m=1");
  EXPECT_EQ(winding_number(*f, make_sphere_mesh(1, 3)).value, 0.0);
}

TEST(Winding, PerturbedMatchesArgumentTracking) {
  const auto mesh = make_sphere_mesh(1, 7);
  for (const char* spec : {"perturb:eps=0.1,m=7|circle-power:d=2", "perturb:eps=0.15,m=5|circle-power:d=-3",
                           "perturb:eps=0.19,m=11|circle-power:d=1"}) {
    const auto f = parse_map(spec);
    const double oracle = tracked_winding(*f, 1 << 16);
    const InvariantResult r = winding_number(*f, mesh);
    EXPECT_NEAR(r.value, oracle, 1e-8) << spec;
    EXPECT_EQ(r.nearest, std::lround(oracle)) << spec;
  }
}

TEST(Degree, SpheresAtLevelFive) {
  const auto mesh = make_sphere_mesh(2, 5);
  EXPECT_NEAR(mapping_degree(*make_identity(2), mesh).value, 1.0, 1e-4);
  EXPECT_NEAR(mapping_degree(*make_antipodal(2), mesh).value, -1.0, 1e-4);
  for (int d = 1; d <= 5; ++d) EXPECT_NEAR(mapping_degree(*make_sphere_suspension(d), mesh).value, d, 1e-3) << d;
  EXPECT_NEAR(mapping_degree(*parse_map("reflect|suspension:d=3"), mesh).value, -3.0, 1e-3);
}

TEST(Degree, ThreeSphere) {
  const auto mesh = make_sphere_mesh(3, 2);
  EXPECT_NEAR(mapping_degree(*make_identity(3), mesh).value, 1.0, 1e-3);
  EXPECT_NEAR(mapping_degree(*make_antipodal(3), mesh).value, 1.0, 1e-3);  // antipodal on S³ preserves orientation
}

TEST(Degree, DimensionMismatchThrows) {
  EXPECT_THROW(mapping_degree(*make_hopf(), make_sphere_mesh(3, 0)), Error);
  EXPECT_THROW(mapping_degree(*make_identity(2), make_sphere_mesh(3, 0)), Error);
}

TEST(Degree, StructurePathMatchesMappingDegree) {
  const auto mesh = make_sphere_mesh(2, 4);
  const auto f = make_sphere_suspension(2);
  const double a = mapping_degree(*f, mesh).value;
  const double b = hardt_riviere(*f, DegreeStructure::sphere_degree(2), mesh, [] {
                     InvariantOptions o;
                     o.wedge_degree = kDefaultQuadratureDegree;
                     return o;
                   }()).value;
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(Degree, StructureLinearInCoefficients) {
  const auto mesh = make_sphere_mesh(2, 3);
  const auto f = make_sphere_suspension(3);
  const double a = hardt_riviere(*f, DegreeStructure::sphere_degree(2), mesh).value;
  EXPECT_DOUBLE_EQ(hardt_riviere(*f, DegreeStructure::sphere_degree(2).scaled(0.5), mesh).value, 0.5 * a);
}

TEST_F(HopfLevels, ConstantMapGivesZero) { EXPECT_NEAR(hopf("const:n=3,m=2", 2).value, 0.0, 1e-9); }

TEST_F(HopfLevels, HopfMapConvergesToOne) {
  const InvariantResult r2 = hopf("hopf", 2);
  const InvariantResult r3 = hopf("hopf", 3);
  EXPECT_GE(r2.value, 0.9);
  EXPECT_LE(r2.value, 1.1);
  EXPECT_LT(std::abs(r3.value - 1.0), std::abs(r2.value - 1.0));
  EXPECT_EQ(r3.nearest, 1);
  ASSERT_EQ(r3.solves.size(), 1u);
  EXPECT_LT(r3.solves[0].relative_residual, 1e-8);
}

TEST_F(HopfLevels, IntegerProximityImprovesWithLevel) {
  const double d1 = hopf("hopf", 1).distance, d2 = hopf("hopf", 2).distance, d3 = hopf("hopf", 3).distance;
  EXPECT_GT(d1, d2);
  EXPECT_GT(d2, d3);
}

TEST_F(HopfLevels, SuspensionCompositionGivesSquare) {
  EXPECT_NEAR(hopf("compose:suspension:d=2|hopf", 3).value, 4.0, 0.6);
}

TEST_F(HopfLevels, OrientationReversalNegates) {
  const double a = hopf("hopf", 2).value;
  const double b = hopf("reflect|hopf", 2).value;
  EXPECT_NEAR(a, -b, 0.02);
}

TEST_F(HopfLevels, PerturbationKeepsInvariant) {
  const double base = hopf("hopf", 3).value;
  const double bar = std::abs(base - hopf("hopf", 2).value);
  EXPECT_NEAR(hopf("perturb:eps=0.1,m=3|hopf", 3).value, base, bar);
}

TEST_F(HopfLevels, Deterministic) {
  EXPECT_EQ(hopf("perturb:eps=0.05,m=2|hopf", 2).value, hopf("perturb:eps=0.05,m=2|hopf", 2).value);
}

TEST_F(HopfLevels, UnresolvedOscillationIsRejected) {
  // quadrature cannot make the projection closed on the coarsest mesh
  try {
    hopf("perturb:eps=0.1,m=7|hopf", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "input not closed");
  }
}

TEST_F(HopfLevels, ProductStructuresReduceToFactors) {
  const auto hc = parse_map("product:hopf,const");
  const double h = hopf("hopf", 2).value;
  EXPECT_NEAR(hardt_riviere(*hc, DegreeStructure::s2xs2_beta(1), mesh(2), {}, complex(2)).value, h, 1e-9);
  EXPECT_NEAR(hardt_riviere(*hc, DegreeStructure::s2xs2_beta(2), mesh(2), {}, complex(2)).value, 0.0, 1e-9);
  const auto hs = parse_map("product:hopf,compose:suspension:d=2|hopf");
  EXPECT_NEAR(hardt_riviere(*hs, DegreeStructure::s2xs2_beta(1), mesh(2), {}, complex(2)).value, 1.0, 0.1);
  EXPECT_NEAR(hardt_riviere(*hs, DegreeStructure::s2xs2_beta(2), mesh(2), {}, complex(2)).value, 4.0, 0.6);
}

TEST(ProductDegree, AlphaStructuresOnTwoSphere) {
  const auto mesh = make_sphere_mesh(2, 4);
  const auto f = parse_map("product:suspension:d=2,antipodal:n=2");
  EXPECT_NEAR(hardt_riviere(*f, DegreeStructure::s2xs2_alpha(1), mesh).value, 2.0, 1e-3);
  EXPECT_NEAR(hardt_riviere(*f, DegreeStructure::s2xs2_alpha(2), mesh).value, -1.0, 1e-3);
}

TEST(Linking, HopfFibersLinkOnce) {
  const LinkingResult r = gauss_linking_oracle(*make_hopf(), {1, 0, 0}, {-1, 0, 0});
  EXPECT_NEAR(r.value, 1.0, 1e-3);
  EXPECT_EQ(r.components_p, 1);
  EXPECT_EQ(r.components_q, 1);
}

TEST(Linking, TracedNorthFiberIsAnalyticCircle) {
  double sigma = 0.0;
  const auto curves = trace_preimage(*make_hopf(), {1, 0, 0}, 500, &sigma);
  ASSERT_EQ(curves.size(), 1u);
  for (const Vec& x : curves[0]) {
    EXPECT_NEAR(x[0] * x[0] + x[1] * x[1], 1.0, 1e-12);
    EXPECT_NEAR(x[2], 0.0, 1e-12);
  }
  EXPECT_NEAR(sigma, 2.0, 1e-9);
}

TEST(Linking, SuspensionCompositionsGiveSquares) {
  for (int d : {2, 3}) {
    const auto f = parse_map("compose:suspension:d=" + std::to_string(d) + "|hopf");
    const LinkingResult a = gauss_linking_oracle(*f, {0, 1, 0}, {0.3, -0.5, 0.8});
    const LinkingResult b = gauss_linking_oracle(*f, {0.6, 0, 0.8}, {-0.2, -0.9, 0.1});
    EXPECT_NEAR(a.value, d * d, 0.02 * d * d);
    EXPECT_NEAR(b.value, d * d, 0.02 * d * d);
    EXPECT_EQ(a.components_p, d);
  }
}

TEST(Linking, ReflectionNegates) {
  EXPECT_NEAR(gauss_linking_oracle(*parse_map("reflect|hopf"), {0, 1, 0}, {0, 0, 1}).value, -1.0, 1e-3);
}

TEST(Linking, UnlinkedPreimagesOfCapMap) {
  const auto f = cap_map();
  const Vec p = f->value(normalized({0.3, 0.2, 0.1, 0.9}, 4));
  const Vec q = f->value(normalized({-0.4, 0.1, -0.3, 0.5}, 4));
  EXPECT_NEAR(gauss_linking_oracle(*f, p, q).value, 0.0, 1e-3);
}

TEST(Linking, BranchPointIsNotRegular) {
  try {
    gauss_linking_oracle(*parse_map("compose:suspension:d=2|hopf"), {1, 0, 0}, {0, 1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "non-regular value");
  }
}

TEST(Linking, GaussIntegralOfRoundHopfLink) {
  // two round circles in ℝ³ forming a Hopf link
  Polyline a, b;
  for (int i = 0; i < 4000; ++i) {
    const double t = 2.0 * kPi * i / 4000;
    a.push_back({std::cos(t), std::sin(t), 0.0});
    b.push_back({1.0 + std::cos(t), 0.0, std::sin(t)});
  }
  EXPECT_NEAR(std::abs(gauss_linking_integral(a, b)), 1.0, 1e-5);
  Polyline c;
  for (int i = 0; i < 4000; ++i) c.push_back({5.0 + a[i][0], a[i][1], 0.0});
  EXPECT_NEAR(gauss_linking_integral(a, c), 0.0, 1e-9);
}

TEST_F(HopfLevels, AgreesWithLinkingOracle) {
  const double h3 = hopf("hopf", 3).value;
  const double bar = std::abs(h3 - hopf("hopf", 2).value);
  const LinkingResult l = gauss_linking_oracle(*make_hopf(), {0, 1, 0}, {0, 0, 1});
  EXPECT_NEAR(h3, l.value, std::max(bar, 1e-3));
}
