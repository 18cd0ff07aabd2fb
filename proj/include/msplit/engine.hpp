#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msplit/mixing.hpp"
#include "msplit/problem.hpp"

namespace msplit {

/// Largest admissible step parameter, 1 / max_i L(f_i).
double default_mu(const SplitProblem& problem);

/// Momentum sequence update t -> (1 + sqrt(1 + 4 t^2)) / 2.
double t_next(double t);

/// Solves the i-th block subproblem with all anchors equal to w:
/// keep f_i, linearize every f_j (j != i) at w and add (1/2mu)||u - w||^2
/// proximal terms.  Completing the square reduces this to
///   prox_{f_i, mu/(K-1)} ( w - mu/(K-1) * sum_{j != i} grad f_j(w) ).
Vector subproblem_point(int i, const Vector& w, double mu, const SplitProblem& problem);

/// All K subproblems at a shared anchor; each gradient is evaluated once.
std::vector<Vector> subproblem_points_shared(const Vector& w, double mu,
                                             const SplitProblem& problem);

/// Value of the surrogate that the i-th subproblem minimizes, with all
/// anchors equal to v and the free slot at p:
///   f_i(p) + sum_{j != i} [ f_j(v) + <grad f_j(v), p - v> + (1/2mu)||p - v||^2 ].
double surrogate_value(int i, const Vector& v, const Vector& p, double mu,
                       const SplitProblem& problem);

// ---------------------------------------------------------------------------
// Algorithm states.  `iter` counts completed iterations; the block vectors
// always hold the iterates produced by the most recent step.
// ---------------------------------------------------------------------------

struct MsaState {
  std::vector<Vector> blocks;   // x^i
  std::vector<Vector> anchors;  // w^i
  long iter = 0;
};

struct FamsaState {
  std::vector<Vector> blocks;     // x^i at the current iteration
  std::vector<Vector> anchors;    // w^i for the next iteration
  std::vector<Vector> hats;       // what the mixing produced this iteration
  std::vector<Vector> hats_prev;  // previous mixing output
  double t = 1.0;                 // t for the next iteration
  double t_prev = 1.0;            // t used by the last completed iteration
  long iter = 0;
};

/// FaMSA-s keeps a single anchor and a single mixing output (uniform mixing
/// makes all of them coincide).
struct FamsasState {
  std::vector<Vector> blocks;
  Vector anchor;
  Vector hat;
  Vector hat_prev;
  double t = 1.0;
  double t_prev = 1.0;
  long iter = 0;
};

MsaState msa_init(const Vector& x0, int k);
FamsaState famsa_init(const Vector& x0, int k);
FamsasState famsas_init(const Vector& x0, int k);

void msa_step(MsaState& state, const MixingMatrix& d, double mu,
              const SplitProblem& problem);
void famsa_step(FamsaState& state, const MixingMatrix& d, double mu,
                const SplitProblem& problem);
void famsas_step(FamsasState& state, double mu, const SplitProblem& problem);

/// Classical gradient step x - tau * sum_j grad f_j(x).
Vector grad_step(const Vector& x, double tau, const SplitProblem& problem);

/// Accelerated gradient step (iteration index k >= 1):
///   x = y_prev - tau * sum_j grad f_j(y_prev)
///   y = x + (k - 1)/(k + 2) * (x - x_prev)
std::pair<Vector, Vector> nest_step(const Vector& x_prev, const Vector& y_prev,
                                    long k, double tau, const SplitProblem& problem);

// ---------------------------------------------------------------------------
// Run loop.
// ---------------------------------------------------------------------------

enum class Algorithm { kMsa, kFamsa, kFamsaS, kGrad, kNest };
enum class MixingChoice { kUniform, kIdentity, kCustom };
enum class RunStatus { kConverged, kIterLimit, kDiverged };

const char* algorithm_name(Algorithm algo);
std::optional<Algorithm> algorithm_from_name(const std::string& name);

struct RunConfig {
  Algorithm algo = Algorithm::kMsa;
  Vector x0;
  double mu = 0.0;   // splitting step parameter (MSA / FaMSA / FaMSA-s)
  double tau = 0.0;  // gradient step size (Grad / Nest)
  MixingChoice mixing = MixingChoice::kUniform;
  std::optional<MixingMatrix> custom_mixing;
  long max_iter = 500;
  double tol = 0.0;                  // relerr threshold; active when reference is set
  std::optional<double> reference;   // F^* for relerr reporting
  // Objective used for the relerr column; defaults to the problem objective.
  // Applications minimizing a smoothed surrogate report against the original
  // nonsmooth objective here.
  std::function<double(const Vector&)> report_objective;
  // Optional extra per-iteration metric (e.g. ISNR), evaluated at the block
  // with the smallest problem objective.
  std::function<double(const Vector&)> aux_metric;
  // Optional batched subproblem solver for shared-anchor algorithms
  // (MSA with uniform mixing, FaMSA-s); must return the K block minimizers.
  std::function<std::vector<Vector>(const Vector& w, double mu)> shared_solver;
};

struct RunRow {
  long iter = 0;
  double obj_min = 0.0;
  double obj_sum = 0.0;
  double relerr = 0.0;  // NaN when no reference was supplied
  double aux = 0.0;     // NaN when no aux metric was supplied
  double elapsed_ms = 0.0;
};

struct RunRecord {
  std::vector<RunRow> rows;
  RunStatus status = RunStatus::kIterLimit;
  long iterations = 0;
  Vector best;  // block with the smallest problem objective at termination
  bool has_aux = false;
};

RunRecord run(const SplitProblem& problem, const RunConfig& config);

}  // namespace msplit
