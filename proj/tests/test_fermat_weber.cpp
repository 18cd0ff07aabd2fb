#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "msplit/engine.hpp"
#include "msplit/fermat_weber.hpp"
#include "msplit/smoothing.hpp"
#include "support.hpp"

using namespace msplit;
namespace fw = msplit::fw;
using testing::random_vector;

namespace {

// Reduced block objective huber(||u - c_i||, rho) + (K-1)/(2 mu) ||u - z||^2.
double reduced_objective(const Vector& u, const Vector& c, const Vector& z,
                         double mu, double rho, int k) {
  return huber_value((u - c).norm(), rho) +
         (k - 1) * (u - z).squaredNorm() / (2.0 * mu);
}

// Long gradient-descent oracle for the reduced block objective.
Vector minimize_reduced(const Vector& c, const Vector& z, double mu, double rho,
                        int k, long iters) {
  const double lipschitz = 1.0 / rho + (k - 1) / mu;
  const double step = 1.0 / lipschitz;
  Vector u = z;
  for (long it = 0; it < iters; ++it) {
    const Vector grad = norm_smooth_grad(u, c, rho) + (k - 1) * (u - z) / mu;
    u -= step * grad;
  }
  return u;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

fw::FwInstance instance_from_columns(const std::vector<Vector>& cols) {
  fw::FwInstance instance;
  instance.points.resize(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    instance.points.col(static_cast<Eigen::Index>(i)) = cols[i];
  }
  return instance;
}

using fw::FwInstance;

}  // namespace

TEST_CASE("random_instance is seeded and matches the target variance") {
  const FwInstance a = fw::random_instance(50, 50, 0);
  const FwInstance b = fw::random_instance(50, 50, 0);
  CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);

  const FwInstance c = fw::random_instance(50, 50, 1);
  CHECK((a.points - c.points).cwiseAbs().maxCoeff() > 0.0);

  const double mean = a.points.mean();
  const double var =
      (a.points.array() - mean).square().sum() / (a.points.size() - 1.0);
  CHECK(std::abs(var - 50.0) <= 0.15 * 50.0);
  CHECK(std::abs(mean) <= 1.0);

  const FwInstance single = fw::random_instance(3, 1, 7);
  CHECK(single.count() == 1);
  CHECK(single.points.allFinite());
}

TEST_CASE("objectives") {
  SUBCASE("coincident points vanish at the common center") {
    const Vector c = vec2(1.5, -2.0);
    const FwInstance instance = instance_from_columns({c, c, c});
    CHECK(fw::objective(c, instance) == 0.0);
    CHECK(fw::objective_smoothed(c, instance, 0.1) == 0.0);
  }

  SUBCASE("two symmetric points in one dimension") {
    Vector left(1), right(1), origin(1);
    left << -1.0;
    right << 1.0;
    origin << 0.0;
    const FwInstance instance = instance_from_columns({left, right});
    CHECK(fw::objective(origin, instance) == doctest::Approx(2.0));
  }

  SUBCASE("smoothed objective sandwich") {
    auto rng = testing::make_rng(3);
    const FwInstance instance = fw::random_instance(6, 9, 5);
    const double rho = 0.2;
    for (int trial = 0; trial < 200; ++trial) {
      const Vector x = random_vector(rng, 6, 3.0);
      const double smooth = fw::objective_smoothed(x, instance, rho);
      const double exact = fw::objective(x, instance);
      CHECK(smooth <= exact + 1e-12);
      CHECK(exact <= smooth + instance.count() * rho / 2.0 + 1e-12);
    }
  }
}

TEST_CASE("prox_closed_form") {
  auto rng = testing::make_rng(7);

  SUBCASE("zero displacement returns the center") {
    const FwInstance instance = fw::random_instance(4, 5, 2);
    const Vector c = instance.points.col(2);
    CHECK((fw::prox_closed_form(2, c, 0.5, 0.1, 5, instance) - c).norm() == 0.0);
  }

  SUBCASE("branch continuity at the threshold radius") {
    const FwInstance instance = fw::random_instance(4, 5, 3);
    const double mu = 0.4, rho = 0.15;
    const int k = 5;
    const Vector c = instance.points.col(1);
    Vector dir = random_vector(rng, 4);
    dir.normalize();
    const Vector z = c + (rho + mu / (k - 1)) * dir;
    const Vector diff = z - c;
    const Vector inner = c + (rho * (k - 1) / (mu + rho * (k - 1))) * diff;
    const Vector outer =
        c + (((k - 1) * diff.norm() - mu) / ((k - 1) * diff.norm())) * diff;
    CHECK((inner - outer).norm() <= 1e-12 * std::max(1.0, inner.norm()));
    CHECK((inner - c).norm() == doctest::Approx(rho).epsilon(1e-12));
  }

  SUBCASE("agrees with a long numerical minimization of the block objective") {
    for (int trial = 0; trial < 20; ++trial) {
      auto local = testing::make_rng(100 + trial);
      const int k = 2 + trial % 5;
      const FwInstance instance = fw::random_instance(5, k, 40 + trial);
      const double mu = 0.2 + 0.3 * (trial % 4);
      const double rho = 0.05 + 0.1 * (trial % 3);
      const int i = trial % k;
      const Vector c = instance.points.col(i);
      // Alternate shifted points near and far from the center so both
      // branches are exercised.
      const Vector z = trial % 2 == 0 ? Vector(c + 0.3 * rho * random_vector(local, 5))
                                      : Vector(c + 5.0 * random_vector(local, 5));
      const Vector closed = fw::prox_closed_form(i, z, mu, rho, k, instance);
      const Vector numeric = minimize_reduced(c, z, mu, rho, k, 60000);
      const double obj_closed = reduced_objective(closed, c, z, mu, rho, k);
      const double obj_numeric = reduced_objective(numeric, c, z, mu, rho, k);
      CHECK(obj_closed <= obj_numeric + 1e-10);

      const Vector residual =
          norm_smooth_grad(closed, c, rho) + (k - 1) * (closed - z) / mu;
      CHECK(residual.norm() <= 1e-8);

      for (int p = 0; p < 5; ++p) {
        Vector dir = random_vector(local, 5);
        dir *= 1e-4 / dir.norm();
        CHECK(obj_closed <= reduced_objective(closed + dir, c, z, mu, rho, k) + 1e-14);
      }
    }
  }
}

TEST_CASE("batch_step") {
  auto rng = testing::make_rng(11);

  SUBCASE("symmetric pair stays symmetric about the anchor") {
    Vector left(1), right(1);
    left << -1.0;
    right << 1.0;
    const FwInstance instance = instance_from_columns({left, right});
    Vector w(1);
    w << 0.0;
    const auto blocks = fw::batch_step(w, instance, 0.3, 0.05);
    CHECK(blocks[0][0] == doctest::Approx(-blocks[1][0]).epsilon(1e-14));
  }

  SUBCASE("matches the generic engine subproblem path") {
    for (int trial = 0; trial < 20; ++trial) {
      const int k = 3 + trial % 4;
      const FwInstance instance = fw::random_instance(6, k, 70 + trial);
      const double mu = 0.1 + 0.25 * (trial % 4);
      const double rho = 0.02 + 0.04 * (trial % 3);
      const SplitProblem problem = fw::split_problem(instance, rho);
      const Vector w = random_vector(rng, 6, 4.0);
      const auto batch = fw::batch_step(w, instance, mu, rho);
      for (int i = 0; i < k; ++i) {
        const Vector generic = subproblem_point(i, w, mu, problem);
        CHECK((batch[i] - generic).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
}

TEST_CASE("weiszfeld_reference") {
  SUBCASE("identical points collapse immediately") {
    const Vector c = vec2(3.0, -1.0);
    const FwInstance instance = instance_from_columns({c, c, c, c});
    const auto ref = fw::weiszfeld_reference(instance, 1e-12);
    CHECK((ref.x_star - c).norm() == 0.0);
    CHECK(ref.f_star == 0.0);
  }

  SUBCASE("equilateral triangle has its median at the centroid") {
    const FwInstance instance = instance_from_columns(
        {vec2(0, 0), vec2(1, 0), vec2(0.5, std::sqrt(3.0) / 2.0)});
    const auto ref = fw::weiszfeld_reference(instance, 1e-12);
    const Vector centroid = vec2(0.5, std::sqrt(3.0) / 6.0);
    CHECK((ref.x_star - centroid).norm() <= 1e-10);
    CHECK(ref.residual <= 1e-6);
  }

  SUBCASE("square corners against a dense grid search") {
    const FwInstance instance = instance_from_columns(
        {vec2(-1, -1), vec2(1, -1), vec2(-1, 1), vec2(1, 1)});
    const auto ref = fw::weiszfeld_reference(instance, 1e-12);
    CHECK(ref.x_star.norm() <= 1e-10);  // center of the square
    CHECK(ref.f_star == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-10));

    // Refined grid search oracle.
    Vector best = vec2(0, 0);
    double best_val = std::numeric_limits<double>::infinity();
    double center_x = 0.0, center_y = 0.0, span = 1.5;
    for (int level = 0; level < 3; ++level) {
      for (int a = -40; a <= 40; ++a) {
        for (int b = -40; b <= 40; ++b) {
          const Vector p = vec2(center_x + span * a / 40.0, center_y + span * b / 40.0);
          const double v = fw::objective(p, instance);
          if (v < best_val) {
            best_val = v;
            best = p;
          }
        }
      }
      center_x = best[0];
      center_y = best[1];
      span /= 20.0;
    }
    CHECK((best - ref.x_star).norm() <= 1e-2);
    CHECK(best_val >= ref.f_star - 1e-12);
    CHECK(best_val <= ref.f_star + 1e-4);
  }

  SUBCASE("random planar instance against the grid oracle") {
    const FwInstance instance = fw::random_instance(2, 7, 21);
    const auto ref = fw::weiszfeld_reference(instance, 1e-13);
    CHECK(ref.residual <= 1e-6);
    double best_val = std::numeric_limits<double>::infinity();
    Vector best = vec2(0, 0);
    double cx = ref.x_star[0], cy = ref.x_star[1], span = 0.5;
    for (int level = 0; level < 3; ++level) {
      for (int a = -40; a <= 40; ++a) {
        for (int b = -40; b <= 40; ++b) {
          const Vector p = vec2(cx + span * a / 40.0, cy + span * b / 40.0);
          const double v = fw::objective(p, instance);
          if (v < best_val) {
            best_val = v;
            best = p;
          }
        }
      }
      cx = best[0];
      cy = best[1];
      span /= 20.0;
    }
    CHECK(best_val >= ref.f_star - 1e-10);
  }

  SUBCASE("accepts a data point when its subgradient condition holds") {
    const FwInstance instance = instance_from_columns(
        {vec2(0, 0), vec2(4, 0), vec2(4, 3), vec2(5, -3)});
    const auto ref = fw::weiszfeld_reference(instance, 1e-13);
    CHECK((ref.x_star - vec2(4, 0)).norm() <= 1e-9);
    CHECK(ref.f_star == doctest::Approx(7.0 + std::sqrt(10.0)).epsilon(1e-9));
    CHECK(ref.residual <= 1e-6);
  }
}

TEST_CASE("experiment harness") {
  SUBCASE("tau = 0.1 grid point reproduces the qualitative orderings") {
    fw::FwExperimentConfig config;
    config.n = 50;
    config.k = 50;
    config.tau = 0.1;
    config.rho = 1e-3;
    config.tol = 1e-6;
    config.seed = 0;
    const auto rows = fw::experiment(config);
    REQUIRE(rows.size() == 4);
    long msa = 0, famsas = 0, grad = 0;
    for (const auto& row : rows) {
      CHECK(row.relerr < 1e-6);
      if (row.algo == Algorithm::kMsa) msa = row.iterations;
      if (row.algo == Algorithm::kFamsaS) famsas = row.iterations;
      if (row.algo == Algorithm::kGrad) grad = row.iterations;
    }
    CHECK(msa == grad);
    CHECK(famsas <= msa);
    CHECK(msa >= 5);
    CHECK(msa <= 60);
  }

  SUBCASE("unreachable tolerance reports the relerr at the cap") {
    fw::FwExperimentConfig config;
    config.n = 10;
    config.k = 8;
    config.tau = 1e-5;
    config.tol = 1e-16;
    config.max_iter = 40;
    config.seed = 3;
    config.algos = {Algorithm::kMsa};
    const auto rows = fw::experiment(config);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].iterations == 40);
    CHECK(rows[0].relerr > 1e-16);
    CHECK(std::isfinite(rows[0].relerr));
  }

  SUBCASE("accelerated baseline needs fewer iterations than plain gradient") {
    fw::FwExperimentConfig config;
    config.n = 50;
    config.k = 100;
    config.tau = 0.01;
    config.rho = 1e-3;
    config.tol = 1e-6;
    config.seed = 0;
    config.algos = {Algorithm::kGrad, Algorithm::kNest};
    const auto rows = fw::experiment(config);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].iterations < rows[0].iterations);
  }
}

TEST_CASE("bound envelopes on a small smoothed instance") {
  const FwInstance instance = fw::random_instance(10, 5, 17);
  const double rho = 1e-2;
  const SplitProblem problem = fw::split_problem(instance, rho);
  const double mu = default_mu(problem);
  const Vector x0 = fw::initial_point(instance);

  const Vector x_star = testing::accel_reference(problem, x0, 100000);
  const double f_star = problem.value(x_star);
  const double dist_sq = (x0 - x_star).squaredNorm();
  const int k_funcs = problem.size();

  MsaState msa = msa_init(x0, k_funcs);
  FamsasState famsas = famsas_init(x0, k_funcs);
  const MixingMatrix d = MixingMatrix::uniform(k_funcs);
  for (long k = 1; k <= 150; ++k) {
    msa_step(msa, d, mu, problem);
    famsas_step(famsas, mu, problem);
    double msa_best = std::numeric_limits<double>::infinity();
    for (const auto& b : msa.blocks) msa_best = std::min(msa_best, problem.value(b));
    double famsas_best = std::numeric_limits<double>::infinity();
    for (const auto& b : famsas.blocks) {
      famsas_best = std::min(famsas_best, problem.value(b));
    }
    CHECK(msa_best - f_star <=
          (k_funcs - 1) * dist_sq / (2.0 * mu * k) * (1.0 + 1e-8) + 1e-12);
    CHECK(famsas_best - f_star <=
          2.0 * (k_funcs - 1) * dist_sq / (mu * (k + 1) * (k + 1)) * (1.0 + 1e-8) +
              1e-12);
  }
}

TEST_CASE("instance serialization round trip") {
  const FwInstance instance = fw::random_instance(7, 4, 99);
  const std::string path =
      (std::filesystem::temp_directory_path() / "msplit_fw_instance.txt").string();
  fw::save_instance(instance, path);
  const FwInstance loaded = fw::load_instance(path);
  CHECK(loaded.dim() == 7);
  CHECK(loaded.count() == 4);
  CHECK(loaded.seed == 99);
  CHECK((loaded.points - instance.points).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}
