#include "msplit/mixing.hpp"

#include <stdexcept>

namespace msplit {

namespace {
constexpr double kStochasticTol = 1e-12;
}

MixingMatrix::MixingMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw std::invalid_argument("MixingMatrix: matrix must be square and nonempty");
  }
  if ((entries_.array() < 0.0).any()) {
    throw std::invalid_argument("MixingMatrix: negative entry");
  }
  const auto row_sums = entries_.rowwise().sum();
  const auto col_sums = entries_.colwise().sum();
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    if (std::abs(row_sums(i) - 1.0) > kStochasticTol ||
        std::abs(col_sums(i) - 1.0) > kStochasticTol) {
      throw std::invalid_argument("MixingMatrix: rows and columns must sum to one");
    }
  }
}

MixingMatrix MixingMatrix::uniform(int k) {
  return MixingMatrix(Eigen::MatrixXd::Constant(k, k, 1.0 / k));
}

MixingMatrix MixingMatrix::identity(int k) {
  return MixingMatrix(Eigen::MatrixXd::Identity(k, k));
}

std::vector<Vector> mix(const std::vector<Vector>& blocks, const MixingMatrix& d) {
  const int k = static_cast<int>(blocks.size());
  if (k != d.size()) {
    throw std::invalid_argument("mix: block count does not match matrix size");
  }
  const Eigen::Index n = blocks.front().size();
  for (const auto& b : blocks) {
    if (b.size() != n) throw std::invalid_argument("mix: inconsistent block dims");
  }
  std::vector<Vector> out(k, Vector::Zero(n));
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) {
      const double w = d(i, j);
      if (w != 0.0) out[j] += w * blocks[i];
    }
  }
  return out;
}

}  // namespace msplit
