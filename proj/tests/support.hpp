#pragma once

#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "msplit/oracle.hpp"
#include "msplit/problem.hpp"

namespace msplit::testing {

/// Weighted quadratic (a/2)||x - c||^2 with an exact closed-form prox.
class QuadraticOracle final : public ProxOracle {
 public:
  QuadraticOracle(Vector center, double weight = 1.0)
      : center_(std::move(center)), weight_(weight) {}

  Eigen::Index dim() const override { return center_.size(); }

  double value(const Vector& x) const override {
    return 0.5 * weight_ * (x - center_).squaredNorm();
  }

  Vector grad(const Vector& x) const override { return weight_ * (x - center_); }

  double lipschitz() const override { return weight_; }

  Vector prox(double lambda, const Vector& y) const override {
    return (y + weight_ * lambda * center_) / (1.0 + weight_ * lambda);
  }

  const Vector& center() const { return center_; }
  double weight() const { return weight_; }

 private:
  Vector center_;
  double weight_;
};

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

/// Central finite differences with step h.
inline Vector finite_difference_grad(const std::function<double(const Vector&)>& f,
                                     const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double hi = f(probe);
    probe[i] = x[i] - h;
    const double lo = f(probe);
    probe[i] = x[i];
    g[i] = (hi - lo) / (2.0 * h);
  }
  return g;
}

/// Long accelerated-gradient run (with gradient-scheme adaptive restart) used
/// as a high-accuracy reference for bound-envelope tests.  Deliberately
/// implemented as its own loop so the reference stays independent of the
/// engine's steppers.  The restart is what lets 1e5 iterations reach machine
/// accuracy on locally strongly convex objectives; without it the reference
/// point is too coarse to adjudicate 1e-8-relative envelope checks.
inline Vector accel_reference(const SplitProblem& problem, const Vector& x0, long iters) {
  double lipschitz_sum = 0.0;
  for (int j = 0; j < problem.size(); ++j) {
    lipschitz_sum += problem.function(j).lipschitz();
  }
  const double tau = 1.0 / lipschitz_sum;
  Vector x = x0;
  Vector y = x0;
  double t = 1.0;
  for (long k = 1; k <= iters; ++k) {
    const Vector g = problem.grad_sum(y);
    Vector xn = y - tau * g;
    if (g.dot(xn - x) > 0.0) {
      // Momentum points uphill: drop it and continue from the new point.
      t = 1.0;
      y = xn;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = xn + ((t - 1.0) / tn) * (xn - x);
      t = tn;
    }
    x = std::move(xn);
  }
  return x;
}

/// Random ensemble of quadratics; the optimum of the sum is closed form:
/// x* = sum(a_j c_j) / sum(a_j).
struct QuadraticEnsemble {
  SplitProblem problem;
  Vector x_star;
  double f_star;
};

inline QuadraticEnsemble random_quadratic_ensemble(std::mt19937_64& rng, int k,
                                                   Eigen::Index n) {
  std::uniform_real_distribution<double> weight_dist(0.5, 3.0);
  std::vector<std::shared_ptr<const ProxOracle>> functions;
  Vector weighted_sum = Vector::Zero(n);
  double weight_total = 0.0;
  for (int j = 0; j < k; ++j) {
    const double a = weight_dist(rng);
    Vector c = random_vector(rng, n, 2.0);
    weighted_sum += a * c;
    weight_total += a;
    functions.push_back(std::make_shared<QuadraticOracle>(std::move(c), a));
  }
  SplitProblem problem(std::move(functions));
  Vector x_star = weighted_sum / weight_total;
  const double f_star = problem.value(x_star);
  return {std::move(problem), std::move(x_star), f_star};
}

}  // namespace msplit::testing
