#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "qtopo/forms.hpp"

namespace qtopo {

/// Target manifold embedded in Euclidean space: a round sphere Sᴹ ⊂ ℝ^{M+1}
/// (M = 1, 2, 3) or the product S²×S² ⊂ ℝ³×ℝ³.
class Target {
 public:
  static Target sphere(int m);
  static Target s2xs2();

  bool is_product() const { return product_; }
  int dimension() const { return product_ ? 4 : m_; }
  int ambient() const { return product_ ? 6 : m_ + 1; }
  std::string name() const;
  /// Nearest-point projection onto the target (factorwise for products).
  Vec project(const Vec& y) const;
  /// Differential of project() at y applied to v.
  Vec project_derivative(const Vec& y, const Vec& v) const;
  /// Euclidean distance from y to the target.
  double distance(const Vec& y) const;
  bool operator==(const Target& o) const { return product_ == o.product_ && m_ == o.m_; }

 private:
  Target(int m, bool product) : m_(m), product_(product) {}
  int m_;
  bool product_;
};

/// Smooth map f: Sᴺ → target with value and Jacobian of an ambient extension
/// (only its action on tangent vectors is meaningful).
class SmoothMap {
 public:
  using Evaluator = std::function<void(const Vec& x, Vec& value, Jacobian* jacobian)>;

  SmoothMap(int domain_dim, Target target, std::string spec, Evaluator eval)
      : dim_(domain_dim), target_(target), spec_(std::move(spec)), eval_(std::move(eval)) {}

  int domain_dim() const { return dim_; }
  int domain_ambient() const { return dim_ + 1; }
  const Target& target() const { return target_; }
  /// Canonical family spec string, parseable by parse_map().
  const std::string& spec() const { return spec_; }

  Vec value(const Vec& x) const {
    Vec y{};
    eval_(x, y, nullptr);
    return y;
  }
  Jacobian jacobian(const Vec& x) const {
    Vec y{};
    Jacobian j;
    eval_(x, y, &j);
    return j;
  }
  void evaluate(const Vec& x, Vec& value, Jacobian& jacobian) const { eval_(x, value, &jacobian); }

 private:
  int dim_;
  Target target_;
  std::string spec_;
  Evaluator eval_;
};

using MapPtr = std::shared_ptr<const SmoothMap>;

/// Closed form on a target, normalized so that top-degree forms integrate to 1.
class TargetForm {
 public:
  /// Names: s1:dtheta, s2:vol, s3:vol, s2xs2:omega1, s2xs2:omega2.
  static const TargetForm& get(std::string_view name);
  static const TargetForm& volume(const Target& target);

  const std::string& name() const { return name_; }
  const Target& target() const { return target_; }
  int degree() const { return degree_; }
  /// Factor 1/|Sᴹ| applied to the raw form.
  double normalization() const { return normalization_; }
  bool closed() const { return true; }
  /// ω_y(w_1, …, w_k) for vectors tangent to the target at y.
  double evaluate(const Vec& y, std::span<const Vec> vectors) const;

 private:
  TargetForm(std::string name, Target target, int degree, int offset);
  std::string name_;
  Target target_;
  int degree_;
  int offset_;  // first ambient coordinate of the factor sphere
  double normalization_;
};

/// ω(f(x); Df(x)v_1, …, Df(x)v_k). Throws when the degree exceeds N.
double pullback(const SmoothMap& f, const TargetForm& omega, const Vec& x, std::span<const Vec> vectors);

/// f*ω as a form field on the domain sphere.
class PullbackForm final : public FormField {
 public:
  PullbackForm(MapPtr f, const TargetForm& omega);
  int degree() const override { return omega_->degree(); }
  int domain_dim() const override { return f_->domain_dim(); }
  double evaluate(const Vec& x, std::span<const Vec> vectors) const override;
  FrameForm components(const Vec& x, std::span<const Vec> frame) const override;

 private:
  MapPtr f_;
  const TargetForm* omega_;
};

/// Rotation of ℝⁿ (n ≤ 4), row-major.
struct Rotation {
  int n = 0;
  std::array<double, 16> m{};
  Vec apply(const Vec& x) const;
  static Rotation random(int n, std::uint64_t seed);
};

MapPtr make_circle_power(int d);
MapPtr make_sphere_suspension(int d);
MapPtr make_antipodal(int n);
MapPtr make_identity(int n);
MapPtr make_constant(int domain_dim, const Target& target);
MapPtr make_hopf();
MapPtr make_composition(MapPtr outer, MapPtr inner);
MapPtr make_product_map(MapPtr f1, MapPtr f2);
/// Π(f(x) + ε g(m x)); throws "leaves tubular neighborhood" for ε ≥ 0.2.
MapPtr make_oscillation_perturbation(MapPtr f, double epsilon, int frequency);
/// f ∘ R with R a seeded random rotation of the domain.
MapPtr make_rotated(MapPtr f, std::uint64_t seed);
/// f ∘ r with r the reflection of the last domain coordinate.
MapPtr make_reflected(MapPtr f);

/// Parses a family spec, e.g. `circle-power:d=3`, `suspension:d=2`, `hopf`,
/// `compose:suspension:d=2|hopf`, `product:hopf,const`,
/// `perturb:eps=0.1,m=7|hopf`, `rotate:seed=3|hopf`, `reflect|identity:n=2`,
/// `antipodal:n=2`, `identity:n=3`, `const:n=2,m=2`.
/// `domain_hint` supplies the domain of a bare `const` (−1 if unknown).
MapPtr parse_map(std::string_view spec, int domain_hint = -1);

/// Largest relative error between J·v and the central difference of f along
/// the great circle through x with unit tangent v, step h.
double jacobian_fd_error(const SmoothMap& f, const Vec& x, const Vec& v, double h = 1e-5);

}  // namespace qtopo
