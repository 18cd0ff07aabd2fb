#include "msplit/problem.hpp"

#include <stdexcept>

namespace msplit {

SplitProblem::SplitProblem(std::vector<std::shared_ptr<const ProxOracle>> functions)
    : functions_(std::move(functions)) {
  if (functions_.size() < 2) {
    throw std::invalid_argument("SplitProblem: need at least two functions");
  }
  for (const auto& f : functions_) {
    if (!f) throw std::invalid_argument("SplitProblem: null oracle");
  }
  dim_ = functions_.front()->dim();
  for (const auto& f : functions_) {
    if (f->dim() != dim_) {
      throw std::invalid_argument("SplitProblem: oracles disagree on dimension");
    }
  }
}

double SplitProblem::value(const Vector& x) const {
  double total = 0.0;
  for (const auto& f : functions_) total += f->value(x);
  return total;
}

Vector SplitProblem::grad_sum(const Vector& x) const {
  Vector g = Vector::Zero(dim_);
  for (const auto& f : functions_) g += f->grad(x);
  return g;
}

double SplitProblem::max_lipschitz() const {
  double top = 0.0;
  for (const auto& f : functions_) top = std::max(top, f->lipschitz());
  return top;
}

}  // namespace msplit
