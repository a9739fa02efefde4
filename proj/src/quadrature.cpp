#include "qtopo/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "qtopo/core.hpp"

namespace qtopo {

LineRule gauss_legendre(int n) {
  if (n < 1) throw Error("Gauss-Legendre needs at least one node");
  LineRule rule;
  rule.node.resize(n);
  rule.weight.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1,1] → [0,1]
    rule.node[i] = 0.5 * (1.0 - x);
    rule.node[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weight[i] = rule.weight[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

namespace {

SimplexRule build_rule(int dim, int degree) {
  SimplexRule r;
  r.dim = dim;
  r.degree = degree;
  auto points = [](int exact_degree) { return exact_degree / 2 + 1; };
  if (dim == 0) {
    r.bary.push_back({1.0, 0.0, 0.0, 0.0});
    r.weight.push_back(1.0);
  } else if (dim == 1) {
    const LineRule g = gauss_legendre(points(degree));
    for (std::size_t i = 0; i < g.node.size(); ++i) {
      r.bary.push_back({1.0 - g.node[i], g.node[i], 0.0, 0.0});
      r.weight.push_back(g.weight[i]);
    }
  } else if (dim == 2) {
    const LineRule gu = gauss_legendre(points(degree + 1));
    const LineRule gv = gauss_legendre(points(degree));
    for (std::size_t i = 0; i < gu.node.size(); ++i)
      for (std::size_t j = 0; j < gv.node.size(); ++j) {
        const double u = gu.node[i], v = gv.node[j];
        const double l1 = u, l2 = v * (1.0 - u);
        r.bary.push_back({1.0 - l1 - l2, l1, l2, 0.0});
        r.weight.push_back(2.0 * gu.weight[i] * gv.weight[j] * (1.0 - u));
      }
  } else if (dim == 3) {
    const LineRule gu = gauss_legendre(points(degree + 2));
    const LineRule gv = gauss_legendre(points(degree + 1));
    const LineRule gw = gauss_legendre(points(degree));
    for (std::size_t i = 0; i < gu.node.size(); ++i)
      for (std::size_t j = 0; j < gv.node.size(); ++j)
        for (std::size_t k = 0; k < gw.node.size(); ++k) {
          const double u = gu.node[i], v = gv.node[j], w = gw.node[k];
          const double l1 = u, l2 = v * (1.0 - u), l3 = w * (1.0 - u) * (1.0 - v);
          r.bary.push_back({1.0 - l1 - l2 - l3, l1, l2, l3});
          r.weight.push_back(6.0 * gu.weight[i] * gv.weight[j] * gw.weight[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
        }
  } else {
    throw Error("simplex rule dimension out of range");
  }
  return r;
}

}  // namespace

const SimplexRule& simplex_rule(int dim, int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, SimplexRule> cache;
  if (degree < 0) throw Error("quadrature degree must be non-negative");
  std::lock_guard lock(mutex);
  auto key = std::make_pair(dim, degree);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_rule(dim, degree)).first;
  return it->second;
}

}  // namespace qtopo
