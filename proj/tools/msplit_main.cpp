// Command-line runner for the splitting algorithms: seeded Fermat-Weber and
// deblurring experiments, trace CSV emission, plot data and image output.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "msplit/deblur.hpp"
#include "msplit/engine.hpp"
#include "msplit/fermat_weber.hpp"
#include "msplit/report.hpp"

namespace {

constexpr int kExitDiverged = 3;

struct RunOptions {
  std::string problem = "fermat-weber";
  std::string algo = "msa";
  std::string mixing = "uniform";
  long max_iter = 500;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  double mu = 0.0;
  double tau = 0.0;
  std::string out_csv;
  std::string plot_prefix;

  // Fermat-Weber
  int n = 50;
  int k = 50;
  double rho = 1e-3;
  std::string save_instance;
  std::string load_instance;

  // Deblurring
  int size = 64;
  std::string truth_path;
  std::string recon_path;
  msplit::deblur::DeblurParams deblur_params;
};

void print_summary(const std::string& algo, const msplit::RunRecord& record) {
  std::cout << "algo,iter,relerr,time_s\n";
  const auto& last = record.rows.back();
  std::cout << algo << ',' << record.iterations << ',';
  if (std::isnan(last.relerr)) {
    std::cout << "";
  } else {
    std::cout << last.relerr;
  }
  std::cout << ',' << last.elapsed_ms / 1000.0 << '\n';
}

int finish_run(const RunOptions& opt, const msplit::RunRecord& record) {
  if (!opt.out_csv.empty()) msplit::write_trace_csv(record, opt.out_csv);
  if (!opt.plot_prefix.empty()) msplit::write_plot_data(record, opt.plot_prefix);
  print_summary(opt.algo, record);
  if (record.status == msplit::RunStatus::kDiverged) {
    std::cerr << "run diverged (nonfinite objective) at iteration "
              << record.iterations << "\n";
    return kExitDiverged;
  }
  return 0;
}

int run_fermat_weber(const RunOptions& opt, msplit::Algorithm algo) {
  using namespace msplit;

  fw::FwInstance instance = opt.load_instance.empty()
                                ? fw::random_instance(opt.n, opt.k, opt.seed)
                                : fw::load_instance(opt.load_instance);
  if (!opt.save_instance.empty()) fw::save_instance(instance, opt.save_instance);
  const int k = instance.count();
  if (k < 2) {
    std::cerr << "fermat-weber runs need at least two points\n";
    return 1;
  }

  const double mu = opt.mu > 0.0 ? opt.mu : opt.tau * (k - 1);
  const double tau = opt.tau > 0.0 ? opt.tau : opt.mu / (k - 1);

  RunConfig rc;
  rc.algo = algo;
  rc.x0 = fw::initial_point(instance);
  rc.mu = mu;
  rc.tau = tau;
  rc.max_iter = opt.max_iter;
  rc.mixing = opt.mixing == "identity" ? MixingChoice::kIdentity : MixingChoice::kUniform;
  rc.report_objective = [&instance](const Vector& x) { return fw::objective(x, instance); };
  rc.shared_solver = [&instance, &opt](const Vector& w, double m) {
    return fw::batch_step(w, instance, m, opt.rho);
  };
  if (opt.tol > 0.0) {
    const fw::FwReference ref = fw::weiszfeld_reference(instance, 1e-13);
    rc.reference = ref.f_star;
    rc.tol = opt.tol;
  }

  const SplitProblem problem = fw::split_problem(instance, opt.rho);
  const RunRecord record = run(problem, rc);
  return finish_run(opt, record);
}

int run_deblur(const RunOptions& opt, msplit::Algorithm algo) {
  using namespace msplit;
  using deblur::DeblurModel;
  using deblur::Image;

  Image truth = opt.truth_path.empty() ? deblur::make_test_image(opt.size, opt.size)
                                       : deblur::read_pgm(opt.truth_path);
  deblur::DeblurParams params = opt.deblur_params;
  params.seed = opt.seed;
  DeblurModel model(std::move(truth), params);

  const double mu = opt.mu > 0.0 ? opt.mu : opt.tau * (model.problem().size() - 1);
  const double tau = opt.tau > 0.0 ? opt.tau : opt.mu / (model.problem().size() - 1);

  RunConfig rc;
  rc.algo = algo;
  rc.x0 = Vector::Zero(model.problem().dim());
  rc.mu = mu;
  rc.tau = tau;
  rc.max_iter = opt.max_iter;
  rc.mixing = opt.mixing == "identity" ? MixingChoice::kIdentity : MixingChoice::kUniform;
  rc.aux_metric = [&model](const Vector& x) { return model.isnr_of(model.unflatten(x)); };

  const RunRecord record = run(model.problem(), rc);
  if (!opt.recon_path.empty() && record.best.size() > 0) {
    const std::string tmp = opt.recon_path + ".tmp";
    deblur::write_pgm(model.unflatten(record.best), tmp);
    if (std::rename(tmp.c_str(), opt.recon_path.c_str()) != 0) {
      std::cerr << "cannot rename " << tmp << " to " << opt.recon_path << "\n";
      return 1;
    }
  }
  return finish_run(opt, record);
}

int do_run(const RunOptions& opt) {
  const auto algo = msplit::algorithm_from_name(opt.algo);
  if (!algo) {
    std::cerr << "unknown algorithm: " << opt.algo << "\n";
    return 1;
  }
  if ((opt.mu > 0.0) == (opt.tau > 0.0)) {
    std::cerr << "supply exactly one of --mu and --tau\n";
    return 1;
  }
  if (opt.problem == "fermat-weber") return run_fermat_weber(opt, *algo);
  if (opt.problem == "deblur") return run_deblur(opt, *algo);
  std::cerr << "unknown problem: " << opt.problem << "\n";
  return 1;
}

struct TableOptions {
  std::string out_csv = "table1.csv";
  double rho = 1e-3;
  double tol = 1e-6;
  long max_iter = 500;
  std::uint64_t seed = 0;
  std::vector<double> taus = {0.001, 0.01, 0.1};
};

int do_table(const TableOptions& opt) {
  using namespace msplit;
  static const std::vector<std::pair<int, int>> kGrid = {
      {50, 50},   {50, 100},  {50, 200},  {100, 100}, {100, 200}, {100, 400},
      {200, 200}, {200, 400}, {200, 800}, {300, 300}, {300, 600}, {300, 1200}};

  std::ostringstream out;
  out << "tau,n,K,algo,iter,relerr,time_s\n";
  for (double tau : opt.taus) {
    for (const auto& [n, k] : kGrid) {
      fw::FwExperimentConfig config;
      config.n = n;
      config.k = k;
      config.tau = tau;
      config.rho = opt.rho;
      config.tol = opt.tol;
      config.max_iter = opt.max_iter;
      config.seed = opt.seed;
      for (const auto& row : fw::experiment(config)) {
        out << tau << ',' << n << ',' << k << ',' << algorithm_name(row.algo) << ','
            << row.iterations << ',' << row.relerr << ',' << row.seconds << '\n';
      }
      std::cerr << "table1: finished tau=" << tau << " n=" << n << " K=" << k << "\n";
    }
  }
  std::ofstream file(opt.out_csv);
  if (!file) {
    std::cerr << "cannot open " << opt.out_csv << "\n";
    return 1;
  }
  file << out.str();
  std::cout << "wrote " << opt.out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-splitting first-order methods"};
  app.require_subcommand(1);

  RunOptions ropt;
  auto* run_cmd = app.add_subcommand("run", "Run one algorithm on one problem");
  run_cmd->add_option("--problem", ropt.problem, "fermat-weber or deblur")
      ->check(CLI::IsMember({"fermat-weber", "deblur"}));
  run_cmd->add_option("--algo", ropt.algo, "msa, famsa, famsa-s, grad or nest")
      ->check(CLI::IsMember({"msa", "famsa", "famsa-s", "grad", "nest"}));
  run_cmd->add_option("--mixing", ropt.mixing, "uniform or identity")
      ->check(CLI::IsMember({"uniform", "identity"}));
  run_cmd->add_option("--max-iter", ropt.max_iter, "iteration cap");
  run_cmd->add_option("--tol", ropt.tol, "relerr stopping tolerance (0 disables)");
  run_cmd->add_option("--seed", ropt.seed, "PRNG seed");
  run_cmd->add_option("--mu", ropt.mu, "splitting step parameter");
  run_cmd->add_option("--tau", ropt.tau, "gradient step size; mu = tau*(K-1)");
  run_cmd->add_option("--out", ropt.out_csv, "trace CSV path");
  run_cmd->add_option("--plot-prefix", ropt.plot_prefix, "prefix for plot data files");
  run_cmd->add_option("--n", ropt.n, "space dimension (fermat-weber)");
  run_cmd->add_option("--k", ropt.k, "number of points (fermat-weber)");
  run_cmd->add_option("--rho", ropt.rho, "smoothing parameter (fermat-weber)");
  run_cmd->add_option("--save-instance", ropt.save_instance, "write the instance as text");
  run_cmd->add_option("--load-instance", ropt.load_instance, "read the instance from text");
  run_cmd->add_option("--size", ropt.size, "synthetic image side length (deblur)");
  run_cmd->add_option("--truth", ropt.truth_path, "ground-truth PGM (deblur)");
  run_cmd->add_option("--recon", ropt.recon_path, "reconstructed PGM output (deblur)");
  run_cmd->add_option("--alpha", ropt.deblur_params.alpha, "TV weight");
  run_cmd->add_option("--beta", ropt.deblur_params.beta, "wavelet-l1 weight");
  run_cmd->add_option("--delta", ropt.deblur_params.delta, "TV smoothing");
  run_cmd->add_option("--sigma", ropt.deblur_params.sigma, "l1 smoothing");
  run_cmd->add_option("--noise-sd", ropt.deblur_params.noise_sd, "Gaussian noise sd");
  run_cmd->add_option("--kernel", ropt.deblur_params.kernel_size, "blur kernel side");
  run_cmd->add_option("--inner-iters", ropt.deblur_params.tv_inner_iters,
                      "TV denoising inner iterations");

  TableOptions topt;
  auto* table_cmd =
      app.add_subcommand("table1", "Sweep the (n, K, tau) grid into one merged CSV");
  table_cmd->add_option("--out", topt.out_csv, "output CSV path");
  table_cmd->add_option("--rho", topt.rho, "smoothing parameter");
  table_cmd->add_option("--tol", topt.tol, "relerr stopping tolerance");
  table_cmd->add_option("--max-iter", topt.max_iter, "iteration cap");
  table_cmd->add_option("--seed", topt.seed, "PRNG seed");
  table_cmd->add_option("--tau", topt.taus, "step sizes to sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(ropt);
    if (table_cmd->parsed()) return do_table(topt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
