#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qtopo/kernels.hpp"
#include "qtopo/sparse.hpp"

using namespace qtopo;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!kernels::isa_available(kernels::Isa::avx2)) GTEST_SKIP() << "AVX2 not available";
  }
};

}  // namespace

TEST_F(KernelEquivalence, DotMatchesScalarOnAllTailLengths) {
  std::mt19937_64 rng(1);
  for (std::size_t n = 0; n < 70; ++n) {
    auto x = random_vector(n, rng), y = random_vector(n, rng);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
    EXPECT_NEAR(kernels::scalar::dot(x, y), kernels::avx2::dot(x, y), 1e-14 * (scale + 1.0)) << n;
  }
}

TEST_F(KernelEquivalence, AxpyXpayHadamard) {
  std::mt19937_64 rng(2);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 17u, 1001u}) {
    auto x = random_vector(n, rng), y = random_vector(n, rng);
    auto y1 = y, y2 = y;
    kernels::scalar::axpy(0.37, x, y1);
    kernels::avx2::axpy(0.37, x, y2);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 4e-16);
    y1 = y;
    y2 = y;
    kernels::scalar::xpay(x, -1.3, y1);
    kernels::avx2::xpay(x, -1.3, y2);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 8e-16);
    std::vector<double> h1(n), h2(n);
    kernels::scalar::hadamard(x, y, h1);
    kernels::avx2::hadamard(x, y, h2);
    EXPECT_EQ(h1, h2);
  }
}

TEST_F(KernelEquivalence, Spmv) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> col(0, 99);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::vector<Triplet> t;
  for (int r = 0; r < 80; ++r)
    for (int k = 0; k < r % 11; ++k) t.push_back({r, col(rng), val(rng)});
  const CsrMatrix a = CsrMatrix::from_triplets(80, 100, t);
  const auto x = random_vector(100, rng);
  std::vector<double> y1(80), y2(80);
  kernels::scalar::spmv(a.view(), x, y1);
  kernels::avx2::spmv(a.view(), x, y2);
  for (int i = 0; i < 80; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-13);
}

TEST(KernelDispatch, SetIsaRoundTrip) {
  const auto before = kernels::active_isa();
  kernels::set_isa(kernels::Isa::scalar);
  EXPECT_EQ(kernels::active_isa(), kernels::Isa::scalar);
  EXPECT_STREQ(kernels::isa_name(kernels::Isa::scalar), "scalar");
  kernels::set_isa(before);
}

TEST(Sparse, TripletsSumDuplicatesAndTranspose) {
  const CsrMatrix a = CsrMatrix::from_triplets(2, 3, {{0, 2, 1.0}, {0, 2, 2.0}, {1, 0, -1.0}});
  EXPECT_EQ(a.nonzeros(), 2u);
  EXPECT_DOUBLE_EQ(a.entry(0, 2), 3.0);
  const CsrMatrix at = a.transpose();
  EXPECT_DOUBLE_EQ(at.entry(2, 0), 3.0);
  EXPECT_DOUBLE_EQ(at.entry(0, 1), -1.0);
  const CsrMatrix p = multiply(a, at);
  EXPECT_DOUBLE_EQ(p.entry(0, 0), 9.0);
  EXPECT_DOUBLE_EQ(p.entry(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(p.entry(0, 1), 0.0);
}

TEST(Sparse, ConjugateGradientSolvesTridiagonal) {
  const int n = 200;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 2.5});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  const CsrMatrix a = CsrMatrix::from_triplets(n, n, t);
  std::vector<double> xs(n), b(n), x(n, 0.0);
  for (int i = 0; i < n; ++i) xs[i] = std::sin(0.1 * i);
  a.multiply(xs, b);
  const auto stats = conjugate_gradient([&](auto in, auto out) { a.multiply(in, out); }, b, x, {}, 1e-12, 1000);
  EXPECT_TRUE(stats.converged);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], xs[i], 1e-10);
}
