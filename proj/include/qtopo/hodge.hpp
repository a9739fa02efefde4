#pragma once

#include <memory>
#include <vector>

#include "qtopo/cochain.hpp"
#include "qtopo/sparse.hpp"

namespace qtopo {

/// Whitney mass matrices M_0..M_N and incidence matrices d_0..d_{N−1} of a mesh.
class WhitneyComplex {
 public:
  explicit WhitneyComplex(MeshPtr mesh);

  const SimplicialSphere& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int dimension() const { return mesh_->dimension(); }
  const CsrMatrix& mass(int k) const { return mass_.at(k); }
  const CsrMatrix& derivative(int k) const { return deriv_.at(k); }
  const CsrMatrix& derivative_transpose(int k) const { return deriv_t_.at(k); }

  /// Solves M_k x = b by Jacobi-preconditioned CG; returns the iteration count.
  int solve_mass(int k, std::span<const double> b, std::span<double> x) const;

  double inner(const Cochain& a, const Cochain& b) const;
  double norm(const Cochain& a) const;

 private:
  MeshPtr mesh_;
  std::vector<CsrMatrix> mass_;
  std::vector<std::vector<double>> mass_inv_diag_;
  std::vector<CsrMatrix> deriv_;
  std::vector<CsrMatrix> deriv_t_;
};

using ComplexPtr = std::shared_ptr<const WhitneyComplex>;

struct HodgeOptions {
  double tolerance = 1e-9;
  int max_iterations = 50000;
  bool jacobi = true;
};

struct HodgeStats {
  int iterations = 0;
  double relative_residual = 0.0;
  long mass_iterations = 0;
  double closedness = 0.0;  // ‖dη‖_M / ‖η‖_M of the input
};

/// Weak Hodge Laplacian on k-cochains:
///   A = d_kᵀ M_{k+1} d_k + M_k d_{k−1} M_{k−1}⁻¹ d_{k−1}ᵀ M_k,
/// so that Δu = η reads A u = M_k η. Either block is absent at the ends of
/// the complex.
class HodgeOperator {
 public:
  HodgeOperator(ComplexPtr complex, int k, HodgeOptions options = {});

  int degree() const { return k_; }
  const HodgeOptions& options() const { return options_; }
  const WhitneyComplex& complex() const { return *complex_; }

  /// out = A u
  void apply(std::span<const double> u, std::span<double> out) const;
  /// Strong form Δu = M_k⁻¹ A u.
  Cochain laplacian(const Cochain& u) const;
  /// Solves A u = rhs (rhs already multiplied by M_k). Throws on non-convergence.
  HodgeStats solve(std::span<const double> rhs, std::span<double> u) const;

 private:
  ComplexPtr complex_;
  int k_;
  HodgeOptions options_;
  std::vector<double> inv_diag_;
  mutable long mass_iterations_ = 0;
};

/// d*c: solves M_{k−1} x = d_{k−1}ᵀ M_k c. Throws "no codifferential" for k = 0.
Cochain codifferential(const WhitneyComplex& complex, const Cochain& c);

/// ξ = d*Δ⁻¹η for a closed ℓ-cochain η, 1 ≤ ℓ ≤ N−1.
/// Throws "input not closed" when ‖dη‖_M/‖η‖_M ≥ 10⁻⁶.
Cochain d_inverse(const ComplexPtr& complex, const Cochain& eta, const HodgeOptions& options = {},
                  HodgeStats* stats = nullptr);

/// Co-exactness defect of a primitive: ‖d*ξ‖_M for degree ≥ 1, and for
/// 0-cochains the mass-norm of the projection onto constants (the only
/// harmonic 0-forms).
double coexactness_defect(const WhitneyComplex& complex, const Cochain& xi);

}  // namespace qtopo
