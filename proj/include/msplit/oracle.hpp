#pragma once

#include <Eigen/Core>

namespace msplit {

using Vector = Eigen::VectorXd;

/// A convex C^{1,1} function presented through its value, gradient and a
/// Lipschitz constant of the gradient.
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector grad(const Vector& x) const = 0;

  /// Bound L with ||grad(x) - grad(y)|| <= L ||x - y||.
  virtual double lipschitz() const = 0;
};

/// A smooth oracle that also solves its own proximal subproblem
///
///   prox(lambda, y) = argmin_u  f(u) + (1/(2 lambda)) ||u - y||^2
///
/// exactly (up to floating-point accuracy, or the oracle's documented
/// inner-solve accuracy for iterative proxes).
class ProxOracle : public SmoothOracle {
 public:
  virtual Vector prox(double lambda, const Vector& y) const = 0;
};

}  // namespace msplit
