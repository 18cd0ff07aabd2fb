#pragma once

#include <memory>
#include <vector>

#include "msplit/oracle.hpp"

namespace msplit {

/// An ordered collection of K >= 2 prox-capable convex functions over a
/// common n-dimensional space; the objective is F(x) = sum_i f_i(x).
class SplitProblem {
 public:
  explicit SplitProblem(std::vector<std::shared_ptr<const ProxOracle>> functions);

  Eigen::Index dim() const { return dim_; }
  int size() const { return static_cast<int>(functions_.size()); }
  const ProxOracle& function(int i) const { return *functions_[i]; }

  double value(const Vector& x) const;
  Vector grad_sum(const Vector& x) const;
  double max_lipschitz() const;

 private:
  std::vector<std::shared_ptr<const ProxOracle>> functions_;
  Eigen::Index dim_;
};

}  // namespace msplit
