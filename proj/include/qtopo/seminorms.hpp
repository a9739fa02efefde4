#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qtopo/maps.hpp"
#include "qtopo/mesh.hpp"

namespace qtopo {

struct SeminormEstimate {
  double value = 0.0;
  /// Standard error (Monte Carlo), error bound (quadrature) or last hill-climb
  /// gain (sampled sup).
  double error = 0.0;
  std::string method;  // tensor-quadrature | stratified-MC | plain-MC | sampled-sup
  long samples = 0;
  std::uint64_t seed = 0;
  /// Number of dyadic chord shells (Sobolev) or radii (BMO) used.
  int strata = 0;
  /// Share of the p-th power integral carried by the linearized near-diagonal tail.
  double tail_fraction = 0.0;
};

enum class SobolevMethod { stratified, plain, tensor };

struct SobolevOptions {
  double beta = 0.5;
  double p = 2.0;
  long samples = 100000;
  std::uint64_t seed = 1;
  SobolevMethod method = SobolevMethod::stratified;
  /// Shells are added until the tail is below this share of the estimate.
  double tail_target = 0.01;
  int max_shells = 24;
};

/// (∫∫ |f(x)−f(y)|ᵖ / |x−y|^{N+βp} dx dy)^{1/p} with chordal |x−y|.
SeminormEstimate sobolev_seminorm(const SmoothMap& f, const SobolevOptions& options);

struct HolderOptions {
  double beta = 1.0;
  long samples = 20000;
  std::uint64_t seed = 1;
  int starts = 10;
  int climb_steps = 400;
};

/// Lower bound of sup |f(x)−f(y)| / |x−y|^β from sampled pairs refined by hill-climbing.
SeminormEstimate holder_seminorm(const SmoothMap& f, const HolderOptions& options);

struct BmoOptions {
  /// Smallest radius of the dyadic grid 2, 1, 1/2, … (chordal).
  double min_radius = 1.0 / 16.0;
  int centers = 64;
  int points_per_cap = 256;
  std::uint64_t seed = 1;
};

/// Lower bound of sup over caps of the double average ⨍⨍|f(θ)−f(σ)|.
SeminormEstimate bmo_seminorm(const SmoothMap& f, const BmoOptions& options);

/// Double average ⨍⨍|f(θ)−f(σ)| over one cap of chordal radius r (U-statistic).
/// Writes its standard error to *error when given.
double cap_oscillation(const SmoothMap& f, const Vec& center, double radius, int points, std::mt19937_64& rng,
                       double* error = nullptr);

struct PoissonProbe {
  Vec point{};
  Vec extension{};
  double distance = 0.0;
};

/// Self-normalized Poisson extension F(x) = Σ w K(x,θ) f(θ) / Σ w K(x,θ) over the
/// quadrature nodes of the mesh, and dist(F(x), target). Probes need |x| < 1.
std::vector<PoissonProbe> poisson_extension_distance(const SmoothMap& f, const std::vector<Vec>& probes,
                                                     const MeshPtr& mesh, int quad_degree = 6);

/// Fixed probe set: the origin and 2N+2 axis directions at each radius.
std::vector<Vec> default_poisson_probes(int domain_dim, const std::vector<double>& radii = {0.3, 0.6, 0.85});

/// Quadrature nodes on the sphere: the rule of each flat top simplex pushed
/// radially outward with the exact area factor.
struct SphereNodes {
  std::vector<Vec> point;
  std::vector<double> weight;
};
SphereNodes sphere_nodes(const SimplicialSphere& mesh, int degree);

// Sampling helpers (exposed for tests).
Vec uniform_on_sphere(int n, std::mt19937_64& rng);
/// Uniform point of Sⁿ at geodesic angle in [a, b] from the center.
Vec sample_in_shell(const Vec& center, int n, double a, double b, std::mt19937_64& rng);
/// Measure of {y ∈ Sⁿ : angle(y, center) ∈ [a, b]}.
double shell_measure(int n, double a, double b);
/// Geodesic angle subtended by the chord r.
inline double chord_angle(double r) { return 2.0 * std::asin(std::min(1.0, 0.5 * r)); }

}  // namespace qtopo
