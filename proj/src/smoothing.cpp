#include "msplit/smoothing.hpp"

#include <cmath>
#include <stdexcept>

namespace msplit {

double huber_value(double s, double rho) {
  const double a = std::abs(s);
  return a <= rho ? s * s / (2.0 * rho) : a - 0.5 * rho;
}

double huber_slope(double s, double rho) {
  return std::clamp(s / rho, -1.0, 1.0);
}

double l1_smooth_value(const Vector& x, double rho) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) total += huber_value(x[j], rho);
  return total;
}

Vector l1_smooth_grad(const Vector& x, double rho) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) g[j] = huber_slope(x[j], rho);
  return g;
}

double norm_smooth_value(const Vector& x, const Vector& center, double rho) {
  return huber_value((x - center).norm(), rho);
}

Vector norm_smooth_grad(const Vector& x, const Vector& center, double rho) {
  const Vector diff = x - center;
  return diff / std::max(rho, diff.norm());
}

double rho_for_epsilon(double epsilon, double diameter) {
  if (!(epsilon > 0.0) || !(diameter > 0.0)) {
    throw std::invalid_argument("rho_for_epsilon: epsilon and diameter must be positive");
  }
  return epsilon / (2.0 * diameter);
}

namespace {
void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("smoothing parameter must be positive and finite");
  }
}
}  // namespace

SmoothedL1::SmoothedL1(Eigen::Index dim, double rho) : dim_(dim), rho_(rho) {
  if (dim <= 0) throw std::invalid_argument("SmoothedL1: dimension must be positive");
  check_rho(rho);
}

double SmoothedL1::value(const Vector& x) const { return l1_smooth_value(x, rho_); }

Vector SmoothedL1::grad(const Vector& x) const { return l1_smooth_grad(x, rho_); }

Vector SmoothedL1::prox(double lambda, const Vector& y) const {
  // Componentwise: argmin_u huber(u, rho) + (u - y)^2 / (2 lambda)
  //              = y - lambda * clamp(y / (rho + lambda), -1, 1).
  Vector out(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    out[j] = y[j] - lambda * std::clamp(y[j] / (rho_ + lambda), -1.0, 1.0);
  }
  return out;
}

SmoothedNorm::SmoothedNorm(Vector center, double rho)
    : center_(std::move(center)), rho_(rho) {
  if (center_.size() == 0) throw std::invalid_argument("SmoothedNorm: empty center");
  check_rho(rho);
}

double SmoothedNorm::value(const Vector& x) const {
  return norm_smooth_value(x, center_, rho_);
}

Vector SmoothedNorm::grad(const Vector& x) const {
  return norm_smooth_grad(x, center_, rho_);
}

Vector SmoothedNorm::prox(double lambda, const Vector& y) const {
  // Radial problem in r = ||u - c||: shrink toward the center when far,
  // scale by rho/(rho + lambda) when within rho + lambda.
  const Vector diff = y - center_;
  const double r = diff.norm();
  if (r <= rho_ + lambda) {
    return center_ + (rho_ / (rho_ + lambda)) * diff;
  }
  return center_ + ((r - lambda) / r) * diff;
}

}  // namespace msplit
