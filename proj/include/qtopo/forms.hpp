#pragma once

#include <array>
#include <functional>
#include <span>

#include "qtopo/core.hpp"

namespace qtopo {

/// Value of a k-form at a point, expressed by its values on the increasing
/// k-subsets of a frame (v_0, …, v_{n−1}): c[I] = α(v_{I_1}, …, v_{I_k}).
/// Subsets are ordered lexicographically; n ≤ 3.
struct FrameForm {
  int n = 0;
  int k = 0;
  std::array<double, 4> c{};
};

int component_count(int n, int k);

/// Exterior product in the determinant convention:
/// (α∧β)(v_1..v_{p+q}) = Σ_shuffles sgn(σ) α(v_σ(1..p)) β(v_σ(p+1..p+q)).
FrameForm wedge(const FrameForm& a, const FrameForm& b);

/// A smooth k-form on the domain sphere Sᴺ, evaluable on tangent vectors at
/// any sphere point.
class FormField {
 public:
  virtual ~FormField() = default;
  virtual int degree() const = 0;
  virtual int domain_dim() const = 0;
  /// α_x(v_1, …, v_k) for k tangent vectors at the unit vector x.
  virtual double evaluate(const Vec& x, std::span<const Vec> vectors) const = 0;
  /// Components on a frame of tangent vectors at x; the default evaluates
  /// every subset separately.
  virtual FrameForm components(const Vec& x, std::span<const Vec> frame) const;
};

/// Form field backed by a callable.
class LambdaForm final : public FormField {
 public:
  using Fn = std::function<double(const Vec&, std::span<const Vec>)>;
  LambdaForm(int domain_dim, int degree, Fn fn) : dim_(domain_dim), degree_(degree), fn_(std::move(fn)) {}
  int degree() const override { return degree_; }
  int domain_dim() const override { return dim_; }
  double evaluate(const Vec& x, std::span<const Vec> vectors) const override { return fn_(x, vectors); }

 private:
  int dim_;
  int degree_;
  Fn fn_;
};

}  // namespace qtopo
