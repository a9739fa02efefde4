#include "qtopo/hodge.hpp"

#include <cmath>
#include <sstream>

namespace qtopo {

namespace {

constexpr double kMassTolerance = 1e-14;
constexpr double kMassAcceptable = 1e-11;
constexpr int kMassMaxIterations = 5000;
constexpr double kClosednessTolerance = 1e-6;

}  // namespace

WhitneyComplex::WhitneyComplex(MeshPtr mesh) : mesh_(std::move(mesh)) {
  const int n = mesh_->dimension();
  for (int k = 0; k <= n; ++k) {
    mass_.push_back(whitney_mass_matrix(*mesh_, k));
    std::vector<double> d = mass_.back().diagonal();
    for (double& v : d) v = 1.0 / v;
    mass_inv_diag_.push_back(std::move(d));
  }
  for (int k = 0; k < n; ++k) {
    deriv_.push_back(derivative_matrix(*mesh_, k));
    deriv_t_.push_back(deriv_.back().transpose());
  }
}

int WhitneyComplex::solve_mass(int k, std::span<const double> b, std::span<double> x) const {
  const CsrMatrix& m = mass_.at(k);
  std::fill(x.begin(), x.end(), 0.0);
  const SolveStats s = conjugate_gradient([&m](auto in, auto out) { m.multiply(in, out); }, b, x, mass_inv_diag_[k],
                                          kMassTolerance, kMassMaxIterations);
  if (s.relative_residual > kMassAcceptable) {
    std::ostringstream msg;
    msg << "mass solve did not converge: relative residual " << s.relative_residual;
    throw Error(msg.str());
  }
  return s.iterations;
}

double WhitneyComplex::inner(const Cochain& a, const Cochain& b) const {
  if (a.degree() != b.degree() || a.size() != b.size()) throw Error("incompatible cochains");
  const auto mb = mass_.at(a.degree()).multiply(b.values());
  return kernels::dot(a.values(), mb);
}

double WhitneyComplex::norm(const Cochain& a) const { return std::sqrt(std::max(0.0, inner(a, a))); }

HodgeOperator::HodgeOperator(ComplexPtr complex, int k, HodgeOptions options)
    : complex_(std::move(complex)), k_(k), options_(options) {
  const int n = complex_->dimension();
  if (k_ < 0 || k_ > n) throw Error("Hodge degree out of range");
  const std::size_t size = complex_->mesh().count(k_);
  std::vector<double> diag(size, 0.0);
  if (k_ < n) {
    // diag(d_kᵀ M_{k+1} d_k)
    const CsrMatrix md = multiply(complex_->mass(k_ + 1), complex_->derivative(k_));
    const CsrMatrix dtmd = multiply(complex_->derivative_transpose(k_), md);
    const auto dd = dtmd.diagonal();
    for (std::size_t i = 0; i < size; ++i) diag[i] += dd[i];
  }
  if (k_ > 0) {
    // diag(M_k d_{k−1} D⁻¹ d_{k−1}ᵀ M_k) with D = diag(M_{k−1})
    const CsrMatrix c = multiply(complex_->mass(k_), complex_->derivative(k_ - 1));
    const auto dlow = complex_->mass(k_ - 1).diagonal();
    const auto rp = c.row_ptr();
    const auto ci = c.col_index();
    const auto cv = c.values();
    for (std::size_t i = 0; i < size; ++i)
      for (auto p = rp[i]; p < rp[i + 1]; ++p) diag[i] += cv[p] * cv[p] / dlow[ci[p]];
  }
  if (options_.jacobi) {
    inv_diag_.resize(size);
    for (std::size_t i = 0; i < size; ++i) inv_diag_[i] = diag[i] > 0.0 ? 1.0 / diag[i] : 1.0;
  }
}

void HodgeOperator::apply(std::span<const double> u, std::span<double> out) const {
  const WhitneyComplex& c = *complex_;
  const int n = c.dimension();
  std::fill(out.begin(), out.end(), 0.0);
  if (k_ < n) {
    const auto du = c.derivative(k_).multiply(u);
    const auto mdu = c.mass(k_ + 1).multiply(du);
    const auto t = c.derivative_transpose(k_).multiply(mdu);
    kernels::axpy(1.0, t, out);
  }
  if (k_ > 0) {
    const auto mu = c.mass(k_).multiply(u);
    const auto rhs = c.derivative_transpose(k_ - 1).multiply(mu);
    std::vector<double> star(rhs.size());
    mass_iterations_ += c.solve_mass(k_ - 1, rhs, star);
    const auto dstar = c.derivative(k_ - 1).multiply(star);
    const auto t = c.mass(k_).multiply(dstar);
    kernels::axpy(1.0, t, out);
  }
}

Cochain HodgeOperator::laplacian(const Cochain& u) const {
  if (u.degree() != k_) throw Error("cochain degree does not match operator");
  std::vector<double> au(u.size());
  apply(u.values(), au);
  Cochain out(complex_->mesh_ptr(), k_);
  complex_->solve_mass(k_, au, out.values());
  return out;
}

HodgeStats HodgeOperator::solve(std::span<const double> rhs, std::span<double> u) const {
  mass_iterations_ = 0;
  std::fill(u.begin(), u.end(), 0.0);
  const SolveStats s = conjugate_gradient([this](auto in, auto out) { apply(in, out); }, rhs, u, inv_diag_,
                                          options_.tolerance, options_.max_iterations);
  // report the true residual, not the recursively updated one
  std::vector<double> au(u.size());
  apply(u, au);
  double rr = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < au.size(); ++i) {
    rr += (rhs[i] - au[i]) * (rhs[i] - au[i]);
    bb += rhs[i] * rhs[i];
  }
  HodgeStats stats;
  stats.iterations = s.iterations;
  stats.relative_residual = bb > 0.0 ? std::sqrt(rr / bb) : 0.0;
  stats.mass_iterations = mass_iterations_;
  if (!s.converged || stats.relative_residual > 10.0 * options_.tolerance) {
    std::ostringstream msg;
    msg << "Hodge solve did not converge: relative residual " << stats.relative_residual << " after " << s.iterations
        << " iterations";
    throw Error(msg.str());
  }
  return stats;
}

Cochain codifferential(const WhitneyComplex& complex, const Cochain& c) {
  const int k = c.degree();
  if (k == 0) throw Error("no codifferential");
  const auto mc = complex.mass(k).multiply(c.values());
  const auto rhs = complex.derivative_transpose(k - 1).multiply(mc);
  Cochain out(c.mesh_ptr(), k - 1);
  complex.solve_mass(k - 1, rhs, out.values());
  return out;
}

Cochain d_inverse(const ComplexPtr& complex, const Cochain& eta, const HodgeOptions& options, HodgeStats* stats) {
  const int l = eta.degree();
  const int n = complex->dimension();
  if (eta.mesh_ptr() != complex->mesh_ptr()) throw Error("cochain lives on a different mesh");
  if (l < 1 || l > n - 1) throw Error("d_inverse needs 1 ≤ degree ≤ N−1");
  HodgeStats local;
  const double eta_norm = complex->norm(eta);
  if (eta_norm == 0.0) {
    if (stats) *stats = local;
    return Cochain(eta.mesh_ptr(), l - 1);
  }
  const Cochain deta = exterior_derivative(eta);
  local.closedness = complex->norm(deta) / eta_norm;
  if (!(local.closedness < kClosednessTolerance)) throw Error("input not closed");

  const HodgeOperator op(complex, l, options);
  const auto rhs = complex->mass(l).multiply(eta.values());
  std::vector<double> u(eta.size());
  const HodgeStats solve = op.solve(rhs, u);
  local.iterations = solve.iterations;
  local.relative_residual = solve.relative_residual;
  local.mass_iterations = solve.mass_iterations;

  const Cochain uc(eta.mesh_ptr(), l, std::move(u));
  Cochain xi = codifferential(*complex, uc);
  if (stats) *stats = local;
  return xi;
}

double coexactness_defect(const WhitneyComplex& complex, const Cochain& xi) {
  if (xi.degree() >= 1) return complex.norm(codifferential(complex, xi));
  // ⟨ξ, 1⟩_M / ‖1‖_M
  const std::vector<double> one(xi.size(), 1.0);
  const auto m1 = complex.mass(0).multiply(one);
  const double num = kernels::dot(xi.values(), m1);
  const double den = std::sqrt(kernels::dot(one, m1));
  return std::abs(num) / den;
}

}  // namespace qtopo
