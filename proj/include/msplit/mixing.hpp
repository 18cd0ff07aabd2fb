#pragma once

#include <vector>

#include <Eigen/Core>

#include "msplit/oracle.hpp"

namespace msplit {

/// K x K doubly stochastic matrix used to recombine the block iterates.
/// Rows and columns must each sum to one (within 1e-12) and all entries
/// must be nonnegative; the constructor rejects anything else.
class MixingMatrix {
 public:
  explicit MixingMatrix(Eigen::MatrixXd entries);

  static MixingMatrix uniform(int k);
  static MixingMatrix identity(int k);

  int size() const { return static_cast<int>(entries_.rows()); }
  double operator()(int i, int j) const { return entries_(i, j); }
  const Eigen::MatrixXd& entries() const { return entries_; }

 private:
  Eigen::MatrixXd entries_;
};

/// Recombines blocks as (w^1,...,w^K) = (x^1,...,x^K) D,
/// i.e. output j = sum_i D(i,j) * blocks[i].
std::vector<Vector> mix(const std::vector<Vector>& blocks, const MixingMatrix& d);

}  // namespace msplit
