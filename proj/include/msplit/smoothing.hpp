#pragma once

#include "msplit/oracle.hpp"

namespace msplit {

/// Scalar Huber function: the closed form of
///   max_{|u| <= 1} { s u - (rho/2) u^2 },
/// i.e. s^2/(2 rho) for |s| <= rho and |s| - rho/2 otherwise.
double huber_value(double s, double rho);

/// Its derivative, clamp(s / rho, -1, 1).
double huber_slope(double s, double rho);

/// Smoothed l1 norm: sum_j huber(x_j, rho).
double l1_smooth_value(const Vector& x, double rho);
Vector l1_smooth_grad(const Vector& x, double rho);

/// Smoothed Euclidean distance to a center:
///   max_{||y|| <= 1} { <x - c, y> - (rho/2) ||y||^2 } = huber(||x - c||, rho).
double norm_smooth_value(const Vector& x, const Vector& center, double rho);

/// Gradient (x - c) / max{rho, ||x - c||}.
Vector norm_smooth_grad(const Vector& x, const Vector& center, double rho);

/// Smoothness parameter giving an epsilon/2 approximation gap:
/// rho = epsilon / (2 D), where D bounds the prox-function over the dual set.
double rho_for_epsilon(double epsilon, double diameter);

/// Smoothed l1 norm as a prox-capable oracle.
///
/// Dual set is the unit infinity-norm ball with prox-function (1/2)||u||^2,
/// so the gradient Lipschitz constant is 1/rho and the approximation gap is
/// at most rho * D with D = dim/2.
class SmoothedL1 final : public ProxOracle {
 public:
  SmoothedL1(Eigen::Index dim, double rho);

  Eigen::Index dim() const override { return dim_; }
  double value(const Vector& x) const override;
  Vector grad(const Vector& x) const override;
  double lipschitz() const override { return 1.0 / rho_; }
  Vector prox(double lambda, const Vector& y) const override;

  double rho() const { return rho_; }
  /// Gap constant: l1(x) - value(x) lies in [0, rho * gap_diameter()].
  double gap_diameter() const { return 0.5 * static_cast<double>(dim_); }

 private:
  Eigen::Index dim_;
  double rho_;
};

/// Smoothed Euclidean norm ||x - c||.
///
/// Dual set is the unit Euclidean ball, D = 1/2, Lipschitz constant 1/rho.
class SmoothedNorm final : public ProxOracle {
 public:
  SmoothedNorm(Vector center, double rho);

  Eigen::Index dim() const override { return center_.size(); }
  double value(const Vector& x) const override;
  Vector grad(const Vector& x) const override;
  double lipschitz() const override { return 1.0 / rho_; }
  Vector prox(double lambda, const Vector& y) const override;

  const Vector& center() const { return center_; }
  double rho() const { return rho_; }
  static constexpr double kGapDiameter = 0.5;

 private:
  Vector center_;
  double rho_;
};

}  // namespace msplit
