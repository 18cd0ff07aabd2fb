#include "msplit/fermat_weber.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

#include "msplit/smoothing.hpp"

namespace msplit::fw {

FwInstance random_instance(int n, int k, std::uint64_t seed) {
  if (n < 1 || k < 1) throw std::invalid_argument("random_instance: n, K must be >= 1");
  FwInstance instance;
  instance.seed = seed;
  instance.points.resize(n, k);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(static_cast<double>(n)));
  for (int i = 0; i < k; ++i) {
    for (int d = 0; d < n; ++d) instance.points(d, i) = gauss(rng);
  }
  return instance;
}

double objective(const Vector& x, const FwInstance& instance) {
  double total = 0.0;
  for (int i = 0; i < instance.count(); ++i) {
    total += (x - instance.points.col(i)).norm();
  }
  return total;
}

double objective_smoothed(const Vector& x, const FwInstance& instance, double rho) {
  double total = 0.0;
  for (int i = 0; i < instance.count(); ++i) {
    total += huber_value((x - instance.points.col(i)).norm(), rho);
  }
  return total;
}

Vector initial_point(const FwInstance& instance) {
  return instance.points.rowwise().mean();
}

Vector prox_closed_form(int i, const Vector& z, double mu, double rho, int k,
                        const FwInstance& instance) {
  if (k < 2) throw std::invalid_argument("prox_closed_form: need K >= 2");
  const Vector c = instance.points.col(i);
  const Vector diff = z - c;
  const double r = diff.norm();
  if (r <= rho + mu / (k - 1)) {
    return c + (rho * (k - 1) / (mu + rho * (k - 1))) * diff;
  }
  return c + (((k - 1) * r - mu) / ((k - 1) * r)) * diff;
}

std::vector<Vector> batch_step(const Vector& w, const FwInstance& instance,
                               double mu, double rho) {
  const int k = instance.count();
  if (k < 2) throw std::invalid_argument("batch_step: need K >= 2");
  const int n = instance.dim();

  // zhat accumulates the K saturation-clipped direction terms; each term is
  // reused below, so one pass over the points covers the whole ensemble.
  Eigen::MatrixXd dirs(n, k);
  Vector zhat = Vector::Zero(n);
  for (int j = 0; j < k; ++j) {
    const Vector diff = w - instance.points.col(j);
    dirs.col(j) = diff / std::max(rho, diff.norm());
    zhat += dirs.col(j);
  }

  const double lambda = mu / (k - 1);
  std::vector<Vector> blocks(k);
  for (int i = 0; i < k; ++i) {
    const Vector z = w - lambda * (zhat - dirs.col(i));
    const Vector diff = z - instance.points.col(i);
    const double denom = std::max((k - 1) * diff.norm(), mu + rho * (k - 1));
    blocks[i] = instance.points.col(i) + (1.0 - mu / denom) * diff;
  }
  return blocks;
}

FwReference weiszfeld_reference(const FwInstance& instance, double tol, long max_iter) {
  const int k = instance.count();
  const int n = instance.dim();
  constexpr double kAnchorRadius = 1e-14;

  // Subgradient test at an anchor point: optimal iff the summed unit
  // directions of the remaining points have norm <= 1.
  const auto anchored_direction = [&](const Vector& x) {
    Vector r = Vector::Zero(n);
    double inv_dist_sum = 0.0;
    for (int j = 0; j < k; ++j) {
      const Vector diff = x - instance.points.col(j);
      const double dist = diff.norm();
      if (dist <= kAnchorRadius) continue;
      r += diff / dist;
      inv_dist_sum += 1.0 / dist;
    }
    return std::pair<Vector, double>(r, inv_dist_sum);
  };

  Vector x = initial_point(instance);
  long iter = 0;
  for (; iter < max_iter; ++iter) {
    // Anchor safeguard: resolve an iterate sitting on a data point before
    // the plain update divides by its zero distance.
    double nearest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      nearest = std::min(nearest, (x - instance.points.col(j)).norm());
    }
    if (nearest <= kAnchorRadius) {
      auto [r, inv_sum] = anchored_direction(x);
      const double rn = r.norm();
      if (rn <= 1.0 || inv_sum == 0.0) break;  // anchor is optimal
      // Push off along the descent direction (Vardi-Zhang step length).
      x -= ((rn - 1.0) / (rn * inv_sum)) * r;
      continue;
    }

    Vector numer = Vector::Zero(n);
    double denom = 0.0;
    for (int j = 0; j < k; ++j) {
      const double dist = (x - instance.points.col(j)).norm();
      numer += instance.points.col(j) / dist;
      denom += 1.0 / dist;
    }
    Vector next = numer / denom;
    const double step = (next - x).norm();
    x = std::move(next);
    if (step <= tol) break;
  }
  if (iter >= max_iter) {
    throw std::runtime_error("weiszfeld_reference: no convergence within the iteration cap");
  }

  // When the iteration stalls next to a data point whose subgradient
  // condition certifies optimality, the point itself is the exact answer.
  {
    int nearest_idx = 0;
    double nearest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      const double dist = (x - instance.points.col(j)).norm();
      if (dist < nearest) {
        nearest = dist;
        nearest_idx = j;
      }
    }
    const double scale = 1.0 + instance.points.col(nearest_idx).norm();
    if (nearest <= 1e-8 * scale) {
      const Vector anchor = instance.points.col(nearest_idx);
      auto [r, inv_sum] = anchored_direction(anchor);
      (void)inv_sum;
      if (r.norm() <= 1.0) x = anchor;
    }
  }

  FwReference ref;
  ref.x_star = x;
  ref.f_star = objective(x, instance);
  ref.iterations = iter;
  // Residual: either the smooth optimality residual away from the anchors or
  // the violation of the anchored subgradient condition.
  double nearest = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    nearest = std::min(nearest, (x - instance.points.col(j)).norm());
  }
  auto [r, inv_sum] = anchored_direction(x);
  (void)inv_sum;
  ref.residual = nearest <= kAnchorRadius ? std::max(0.0, r.norm() - 1.0) : r.norm();
  return ref;
}

SplitProblem split_problem(const FwInstance& instance, double rho) {
  std::vector<std::shared_ptr<const ProxOracle>> functions;
  functions.reserve(instance.count());
  for (int i = 0; i < instance.count(); ++i) {
    functions.push_back(std::make_shared<SmoothedNorm>(instance.points.col(i), rho));
  }
  return SplitProblem(std::move(functions));
}

std::vector<FwExperimentRow> experiment(const FwExperimentConfig& config) {
  const FwInstance instance = random_instance(config.n, config.k, config.seed);
  const FwReference ref = weiszfeld_reference(instance, 1e-13);
  const SplitProblem problem = split_problem(instance, config.rho);
  const Vector x0 = initial_point(instance);
  const double mu = config.tau * (config.k - 1);

  std::vector<FwExperimentRow> rows;
  rows.reserve(config.algos.size());
  for (Algorithm algo : config.algos) {
    RunConfig rc;
    rc.algo = algo;
    rc.x0 = x0;
    rc.mu = mu;
    rc.tau = config.tau;
    rc.max_iter = config.max_iter;
    rc.tol = config.tol;
    rc.reference = ref.f_star;
    rc.report_objective = [&instance](const Vector& x) { return objective(x, instance); };
    rc.shared_solver = [&instance, &config](const Vector& w, double m) {
      return batch_step(w, instance, m, config.rho);
    };
    const auto start = std::chrono::steady_clock::now();
    const RunRecord record = run(problem, rc);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    FwExperimentRow row;
    row.algo = algo;
    row.iterations = record.iterations;
    row.relerr = record.rows.back().relerr;
    row.seconds = seconds;
    rows.push_back(row);
  }
  return rows;
}

void save_instance(const FwInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_instance: cannot open " + path);
  out.precision(17);
  out << instance.dim() << ' ' << instance.count() << ' ' << instance.seed << '\n';
  for (int i = 0; i < instance.count(); ++i) {
    for (int d = 0; d < instance.dim(); ++d) {
      out << instance.points(d, i) << (d + 1 == instance.dim() ? '\n' : ' ');
    }
  }
  if (!out) throw std::runtime_error("save_instance: write failed for " + path);
}

FwInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_instance: cannot open " + path);
  int n = 0, k = 0;
  std::uint64_t seed = 0;
  if (!(in >> n >> k >> seed) || n < 1 || k < 1) {
    throw std::runtime_error("load_instance: bad header in " + path);
  }
  FwInstance instance;
  instance.seed = seed;
  instance.points.resize(n, k);
  for (int i = 0; i < k; ++i) {
    for (int d = 0; d < n; ++d) {
      if (!(in >> instance.points(d, i))) {
        throw std::runtime_error("load_instance: truncated data in " + path);
      }
    }
  }
  return instance;
}

}  // namespace msplit::fw
