#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msplit/engine.hpp"
#include "msplit/problem.hpp"

namespace msplit::fw {

/// A Fermat-Weber instance: K anchor points in R^n, stored column-wise.
struct FwInstance {
  Eigen::MatrixXd points;  // n x K, column i holds c^i
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(points.rows()); }
  int count() const { return static_cast<int>(points.cols()); }
};

/// Deterministic instance with i.i.d. Gaussian entries of variance n.
FwInstance random_instance(int n, int k, std::uint64_t seed);

/// Nonsmooth objective sum_i ||x - c^i||.
double objective(const Vector& x, const FwInstance& instance);

/// Smoothed objective sum_i huber(||x - c^i||, rho).
double objective_smoothed(const Vector& x, const FwInstance& instance, double rho);

/// Mean of the anchor points (the experiments' starting point).
Vector initial_point(const FwInstance& instance);

/// Closed-form minimizer of the i-th block subproblem at the shifted point z:
///   argmin_u huber(||u - c^i||, rho) + (K-1)/(2 mu) ||u - z||^2.
Vector prox_closed_form(int i, const Vector& z, double mu, double rho, int k,
                        const FwInstance& instance);

/// All K block subproblems at a shared anchor w in one pass: the summed
/// gradient is formed once, each block removes its own term, and the
/// closed-form prox finishes the solve.  Cost is about one full-gradient
/// evaluation.
std::vector<Vector> batch_step(const Vector& w, const FwInstance& instance,
                               double mu, double rho);

/// Independent reference optimum from the Weiszfeld fixed-point iteration.
struct FwReference {
  Vector x_star;
  double f_star = 0.0;    // nonsmooth objective at x_star
  double residual = 0.0;  // optimality residual actually achieved
  long iterations = 0;
};

/// Runs Weiszfeld until the step norm drops below tol.  Iterates landing on
/// an anchor point are accepted when the subgradient optimality condition
/// ||sum_{j != i} (c^i - c^j)/||c^i - c^j|| || <= 1 holds and pushed off along
/// the descent direction otherwise.  Throws on non-convergence.
FwReference weiszfeld_reference(const FwInstance& instance, double tol,
                                long max_iter = 200000);

/// Wraps the instance as a SplitProblem of smoothed-norm oracles.
SplitProblem split_problem(const FwInstance& instance, double rho);

struct FwExperimentConfig {
  int n = 50;
  int k = 50;
  double tau = 0.1;    // mu = tau * (K - 1)
  double rho = 1e-3;
  double tol = 1e-6;
  long max_iter = 500;
  std::uint64_t seed = 0;
  std::vector<Algorithm> algos = {Algorithm::kMsa, Algorithm::kFamsaS,
                                  Algorithm::kGrad, Algorithm::kNest};
};

struct FwExperimentRow {
  Algorithm algo = Algorithm::kMsa;
  long iterations = 0;
  double relerr = 0.0;
  double seconds = 0.0;
};

/// Runs the configured algorithms on one random instance and reports
/// {iterations, relerr, time} per algorithm.  relerr compares the nonsmooth
/// objective against the Weiszfeld reference.
std::vector<FwExperimentRow> experiment(const FwExperimentConfig& config);

/// Plain-text instance format: header "n K seed", then K rows of n reals.
void save_instance(const FwInstance& instance, const std::string& path);
FwInstance load_instance(const std::string& path);

}  // namespace msplit::fw
