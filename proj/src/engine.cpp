#include "msplit/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msplit {

double default_mu(const SplitProblem& problem) {
  double top = 0.0;
  for (int i = 0; i < problem.size(); ++i) {
    const double l = problem.function(i).lipschitz();
    if (!std::isfinite(l) || l <= 0.0) {
      throw std::invalid_argument("default_mu: Lipschitz constants must be finite and positive");
    }
    top = std::max(top, l);
  }
  return 1.0 / top;
}

double t_next(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

Vector subproblem_point(int i, const Vector& w, double mu, const SplitProblem& problem) {
  const int k = problem.size();
  if (k < 2) throw std::invalid_argument("subproblem_point: need K >= 2");
  if (!(mu > 0.0)) throw std::invalid_argument("subproblem_point: mu must be positive");
  const double lambda = mu / (k - 1);
  Vector drift = Vector::Zero(problem.dim());
  for (int j = 0; j < k; ++j) {
    if (j == i) continue;
    drift += problem.function(j).grad(w);
  }
  return problem.function(i).prox(lambda, w - lambda * drift);
}

std::vector<Vector> subproblem_points_shared(const Vector& w, double mu,
                                             const SplitProblem& problem) {
  const int k = problem.size();
  if (k < 2) throw std::invalid_argument("subproblem_points_shared: need K >= 2");
  const double lambda = mu / (k - 1);
  std::vector<Vector> grads(k);
  Vector total = Vector::Zero(problem.dim());
  for (int j = 0; j < k; ++j) {
    grads[j] = problem.function(j).grad(w);
    total += grads[j];
  }
  std::vector<Vector> blocks(k);
  for (int i = 0; i < k; ++i) {
    blocks[i] = problem.function(i).prox(lambda, w - lambda * (total - grads[i]));
  }
  return blocks;
}

double surrogate_value(int i, const Vector& v, const Vector& p, double mu,
                       const SplitProblem& problem) {
  const int k = problem.size();
  const Vector diff = p - v;
  const double quad = diff.squaredNorm() / (2.0 * mu);
  double total = problem.function(i).value(p);
  for (int j = 0; j < k; ++j) {
    if (j == i) continue;
    const auto& f = problem.function(j);
    total += f.value(v) + f.grad(v).dot(diff) + quad;
  }
  return total;
}

// ---------------------------------------------------------------------------
// States and steps.
// ---------------------------------------------------------------------------

MsaState msa_init(const Vector& x0, int k) {
  MsaState s;
  s.blocks.assign(k, x0);
  s.anchors.assign(k, x0);
  return s;
}

FamsaState famsa_init(const Vector& x0, int k) {
  FamsaState s;
  s.blocks.assign(k, x0);
  s.anchors.assign(k, x0);  // the anchors used by the first iteration
  s.hats.assign(k, x0);     // mixing output of the (virtual) iteration 0
  s.hats_prev.assign(k, x0);
  s.t = 1.0;
  s.t_prev = 1.0;
  return s;
}

FamsasState famsas_init(const Vector& x0, int k) {
  FamsasState s;
  s.blocks.assign(k, x0);
  s.anchor = x0;
  s.hat = x0;
  s.hat_prev = x0;
  s.t = 1.0;
  s.t_prev = 1.0;
  return s;
}

void msa_step(MsaState& state, const MixingMatrix& d, double mu,
              const SplitProblem& problem) {
  const int k = problem.size();
  for (int i = 0; i < k; ++i) {
    state.blocks[i] = subproblem_point(i, state.anchors[i], mu, problem);
  }
  state.anchors = mix(state.blocks, d);
  ++state.iter;
}

void famsa_step(FamsaState& state, const MixingMatrix& d, double mu,
                const SplitProblem& problem) {
  const int k = problem.size();
  for (int i = 0; i < k; ++i) {
    state.blocks[i] = subproblem_point(i, state.anchors[i], mu, problem);
  }
  std::vector<Vector> new_hats = mix(state.blocks, d);
  const double t_new = t_next(state.t);
  for (int i = 0; i < k; ++i) {
    state.anchors[i] =
        new_hats[i] + (state.t * (state.blocks[i] - state.hats[i]) -
                       (new_hats[i] - state.hats[i])) /
                          t_new;
  }
  state.hats_prev = std::move(state.hats);
  state.hats = std::move(new_hats);
  state.t_prev = state.t;
  state.t = t_new;
  ++state.iter;
}

namespace {

// Momentum update shared by famsas_step and the run loop: consumes freshly
// solved blocks and advances (hat, anchor, t).
void famsas_advance(FamsasState& state, std::vector<Vector> blocks) {
  const int k = static_cast<int>(blocks.size());
  state.blocks = std::move(blocks);
  Vector new_hat = Vector::Zero(state.blocks.front().size());
  for (int i = 0; i < k; ++i) new_hat += state.blocks[i];
  new_hat /= static_cast<double>(k);
  const double t_new = t_next(state.t);
  state.anchor = new_hat + ((state.t - 1.0) / t_new) * (new_hat - state.hat);
  state.hat_prev = std::move(state.hat);
  state.hat = std::move(new_hat);
  state.t_prev = state.t;
  state.t = t_new;
  ++state.iter;
}

}  // namespace

void famsas_step(FamsasState& state, double mu, const SplitProblem& problem) {
  famsas_advance(state, subproblem_points_shared(state.anchor, mu, problem));
}

Vector grad_step(const Vector& x, double tau, const SplitProblem& problem) {
  if (!(tau > 0.0)) throw std::invalid_argument("grad_step: tau must be positive");
  return x - tau * problem.grad_sum(x);
}

std::pair<Vector, Vector> nest_step(const Vector& x_prev, const Vector& y_prev,
                                    long k, double tau, const SplitProblem& problem) {
  if (k < 1) throw std::invalid_argument("nest_step: iteration index starts at 1");
  if (!(tau > 0.0)) throw std::invalid_argument("nest_step: tau must be positive");
  Vector x = y_prev - tau * problem.grad_sum(y_prev);
  const double momentum = static_cast<double>(k - 1) / static_cast<double>(k + 2);
  Vector y = x + momentum * (x - x_prev);
  return {std::move(x), std::move(y)};
}

// ---------------------------------------------------------------------------
// Run loop.
// ---------------------------------------------------------------------------

const char* algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kMsa: return "msa";
    case Algorithm::kFamsa: return "famsa";
    case Algorithm::kFamsaS: return "famsa-s";
    case Algorithm::kGrad: return "grad";
    case Algorithm::kNest: return "nest";
  }
  return "unknown";
}

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
  if (name == "msa") return Algorithm::kMsa;
  if (name == "famsa") return Algorithm::kFamsa;
  if (name == "famsa-s") return Algorithm::kFamsaS;
  if (name == "grad") return Algorithm::kGrad;
  if (name == "nest") return Algorithm::kNest;
  return std::nullopt;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class RunLoop {
 public:
  RunLoop(const SplitProblem& problem, const RunConfig& config)
      : problem_(problem), config_(config), start_(std::chrono::steady_clock::now()) {
    record_.has_aux = static_cast<bool>(config.aux_metric);
  }

  // Returns false when the run should stop (converged or diverged).
  bool observe(const std::vector<Vector>& blocks, long iter) {
    RunRow row;
    row.iter = iter;
    double obj_min = std::numeric_limits<double>::infinity();
    double obj_sum = 0.0;
    int best = 0;
    for (int i = 0; i < static_cast<int>(blocks.size()); ++i) {
      const double v = problem_.value(blocks[i]);
      obj_sum += v;
      if (v < obj_min) {
        obj_min = v;
        best = i;
      }
    }
    row.obj_min = obj_min;
    row.obj_sum = obj_sum;
    row.relerr = kNaN;
    if (config_.reference) {
      double rep_min = std::numeric_limits<double>::infinity();
      for (const auto& b : blocks) rep_min = std::min(rep_min, report_value(b));
      const double fstar = *config_.reference;
      const double denom = fstar != 0.0 ? std::abs(fstar) : 1.0;
      row.relerr = std::abs(rep_min - fstar) / denom;
    }
    row.aux = config_.aux_metric ? config_.aux_metric(blocks[best]) : kNaN;
    row.elapsed_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start_)
                         .count();
    record_.rows.push_back(row);
    best_ = blocks[best];

    if (!std::isfinite(obj_sum)) {
      record_.status = RunStatus::kDiverged;
      return false;
    }
    if (config_.reference && iter > 0 && row.relerr < config_.tol) {
      record_.status = RunStatus::kConverged;
      return false;
    }
    return true;
  }

  RunRecord finish() {
    record_.iterations = record_.rows.empty() ? 0 : record_.rows.back().iter;
    record_.best = std::move(best_);
    return std::move(record_);
  }

 private:
  double report_value(const Vector& x) const {
    return config_.report_objective ? config_.report_objective(x) : problem_.value(x);
  }

  const SplitProblem& problem_;
  const RunConfig& config_;
  std::chrono::steady_clock::time_point start_;
  RunRecord record_;
  Vector best_;
};

MixingMatrix resolve_mixing(const RunConfig& config, int k) {
  switch (config.mixing) {
    case MixingChoice::kUniform: return MixingMatrix::uniform(k);
    case MixingChoice::kIdentity: return MixingMatrix::identity(k);
    case MixingChoice::kCustom:
      if (!config.custom_mixing) {
        throw std::invalid_argument("run: custom mixing selected but no matrix supplied");
      }
      if (config.custom_mixing->size() != k) {
        throw std::invalid_argument("run: custom mixing matrix has the wrong size");
      }
      return *config.custom_mixing;
  }
  throw std::invalid_argument("run: unknown mixing choice");
}

std::vector<Vector> solve_blocks_shared(const Vector& w, double mu,
                                        const SplitProblem& problem,
                                        const RunConfig& config) {
  if (config.shared_solver) return config.shared_solver(w, mu);
  return subproblem_points_shared(w, mu, problem);
}

}  // namespace

RunRecord run(const SplitProblem& problem, const RunConfig& config) {
  if (config.x0.size() != problem.dim()) {
    throw std::invalid_argument("run: starting point has the wrong dimension");
  }
  const int k = problem.size();
  const bool splitting = config.algo == Algorithm::kMsa ||
                         config.algo == Algorithm::kFamsa ||
                         config.algo == Algorithm::kFamsaS;
  if (splitting && !(config.mu > 0.0)) {
    throw std::invalid_argument("run: mu must be positive for splitting algorithms");
  }
  if (!splitting && !(config.tau > 0.0)) {
    throw std::invalid_argument("run: tau must be positive for gradient algorithms");
  }

  RunLoop loop(problem, config);

  switch (config.algo) {
    case Algorithm::kMsa: {
      if (config.mixing == MixingChoice::kUniform) {
        // With uniform mixing every anchor equals the block mean, so a single
        // anchor vector and the shared-anchor solver suffice.
        Vector w = config.x0;
        std::vector<Vector> blocks(k, config.x0);
        if (!loop.observe(blocks, 0)) break;
        for (long n = 1; n <= config.max_iter; ++n) {
          blocks = solve_blocks_shared(w, config.mu, problem, config);
          w = Vector::Zero(problem.dim());
          for (const auto& b : blocks) w += b;
          w /= static_cast<double>(k);
          if (!loop.observe(blocks, n)) break;
        }
      } else {
        MsaState state = msa_init(config.x0, k);
        const MixingMatrix d = resolve_mixing(config, k);
        if (!loop.observe(state.blocks, 0)) break;
        for (long n = 1; n <= config.max_iter; ++n) {
          msa_step(state, d, config.mu, problem);
          if (!loop.observe(state.blocks, state.iter)) break;
        }
      }
      break;
    }
    case Algorithm::kFamsa: {
      FamsaState state = famsa_init(config.x0, k);
      const MixingMatrix d = resolve_mixing(config, k);
      if (!loop.observe(state.blocks, 0)) break;
      for (long n = 1; n <= config.max_iter; ++n) {
        famsa_step(state, d, config.mu, problem);
        if (!loop.observe(state.blocks, state.iter)) break;
      }
      break;
    }
    case Algorithm::kFamsaS: {
      FamsasState state = famsas_init(config.x0, k);
      if (!loop.observe(state.blocks, 0)) break;
      for (long n = 1; n <= config.max_iter; ++n) {
        famsas_advance(state,
                       solve_blocks_shared(state.anchor, config.mu, problem, config));
        if (!loop.observe(state.blocks, state.iter)) break;
      }
      break;
    }
    case Algorithm::kGrad: {
      Vector x = config.x0;
      if (!loop.observe({x}, 0)) break;
      for (long n = 1; n <= config.max_iter; ++n) {
        x = grad_step(x, config.tau, problem);
        if (!loop.observe({x}, n)) break;
      }
      break;
    }
    case Algorithm::kNest: {
      Vector x = config.x0;
      Vector y = config.x0;
      if (!loop.observe({x}, 0)) break;
      for (long n = 1; n <= config.max_iter; ++n) {
        auto [x_new, y_new] = nest_step(x, y, n, config.tau, problem);
        x = std::move(x_new);
        y = std::move(y_new);
        if (!loop.observe({x}, n)) break;
      }
      break;
    }
  }

  return loop.finish();
}

}  // namespace msplit
