#pragma once

#include <string>
#include <vector>

#include "qtopo/hodge.hpp"
#include "qtopo/maps.hpp"

namespace qtopo {

/// One summand c·∫ f*ω₀ ∧ d⁻¹f*ω₁ ∧ … ∧ d⁻¹f*ω_L of a representation formula.
struct StructureTerm {
  double coefficient = 1.0;
  std::vector<int> degrees;        // M₀, M₁, …, M_L
  std::vector<std::string> forms;  // target form names; empty when symbolic only
  int length() const { return static_cast<int>(degrees.size()) - 1; }
};

struct DegreeStructure {
  std::string name;
  int domain_dim = 0;
  std::vector<StructureTerm> terms;

  /// L = max over terms of L_k.
  int length() const;
  bool evaluable() const;
  /// Checks the degree-sum and degree-range conditions; throws on violation.
  void validate() const;
  /// Multiplies every coefficient by a.
  DegreeStructure scaled(double a) const;

  static DegreeStructure winding();
  static DegreeStructure sphere_degree(int n);
  static DegreeStructure hopf();
  /// d_{β_i} on S³ → S²×S² (i = 1, 2).
  static DegreeStructure s2xs2_beta(int i);
  /// d_{α_i} on S² → S²×S² (i = 1, 2).
  static DegreeStructure s2xs2_alpha(int i);
};

struct InvariantOptions {
  HodgeOptions hodge;
  /// Quadrature degree of the final wedge integral.
  int wedge_degree = 6;
  /// Projections of f*ω are refined in quadrature degree until
  /// ‖dη‖_M/‖η‖_M falls below this target or the cap is reached.
  double projection_closedness = 1e-8;
  int max_projection_degree = 20;
};

struct InvariantResult {
  double value = 0.0;
  std::vector<double> per_term;
  int level = 0;
  std::vector<HodgeStats> solves;
  std::vector<int> projection_degrees;
  long nearest = 0;
  double distance = 0.0;  // |value − nearest|

  void finish();
};

/// (1/2π)∫ f*dθ over the mesh of S¹.
InvariantResult winding_number(const SmoothMap& f, const MeshPtr& mesh, int quad_degree = kDefaultQuadratureDegree);

/// ∫ f*ω for the normalized volume form of the target sphere.
InvariantResult mapping_degree(const SmoothMap& f, const MeshPtr& mesh, int quad_degree = kDefaultQuadratureDegree);

/// Σ_k c_k ∫ f*ω₀ᵏ ∧ d⁻¹f*ω₁ᵏ ∧ …; first factors analytic, d⁻¹ factors
/// Whitney-interpolated. `complex` may be null (built on demand).
InvariantResult hardt_riviere(const SmoothMap& f, const DegreeStructure& s, const MeshPtr& mesh,
                              const InvariantOptions& options = {}, ComplexPtr complex = nullptr);

InvariantResult hopf_invariant(const SmoothMap& f, const MeshPtr& mesh, const InvariantOptions& options = {},
                               ComplexPtr complex = nullptr);

/// Projection of f*ω with quadrature degree raised until numerically closed.
/// Reports the degree used and the closedness reached.
Cochain project_closed_pullback(const PullbackForm& form, const MeshPtr& mesh, const WhitneyComplex& complex,
                                const InvariantOptions& options, int* degree_used = nullptr,
                                double* closedness = nullptr);

struct LinkingResult {
  double value = 0.0;
  long nearest = 0;
  int components_p = 0;
  int components_q = 0;
  double min_singular_value = 0.0;
  int points = 0;
};

/// Linking number of f⁻¹(p) and f⁻¹(q) for f: S³ → S², by the Gauss double
/// integral of the traced preimage polylines after stereographic projection.
/// Throws "non-regular value" when Df degenerates on a preimage.
LinkingResult gauss_linking_oracle(const SmoothMap& f, const Vec& p, const Vec& q, int points_per_curve = 2000);

/// Closed polyline approximating a preimage component, oriented so that
/// (tangent, n₁, n₂) is positive on S³ whenever Df(n₁), Df(n₂) is positive on S².
using Polyline = std::vector<Vec>;
std::vector<Polyline> trace_preimage(const SmoothMap& f, const Vec& p, int points_per_curve, double* min_singular = nullptr);

/// Gauss linking integral of two closed polylines in ℝ³ (midpoint rule).
double gauss_linking_integral(const Polyline& a, const Polyline& b);

}  // namespace qtopo
