#include "msplit/deblur.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "msplit/smoothing.hpp"

namespace msplit::deblur {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Forward differences with zero difference on the last row/column.
void forward_diffs(const Image& x, Image& dv, Image& dh) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  dv.setZero(rows, cols);
  dh.setZero(rows, cols);
  dv.topRows(rows - 1) = x.bottomRows(rows - 1) - x.topRows(rows - 1);
  dh.leftCols(cols - 1) = x.rightCols(cols - 1) - x.leftCols(cols - 1);
}

// Negative adjoint of forward_diffs.
Image divergence(const Image& p1, const Image& p2) {
  const Eigen::Index rows = p1.rows();
  const Eigen::Index cols = p1.cols();
  Image div = p1 + p2;
  div.bottomRows(rows - 1) -= p1.topRows(rows - 1);
  div.rightCols(cols - 1) -= p2.leftCols(cols - 1);
  return div;
}

}  // namespace

// ---------------------------------------------------------------------------
// Total variation.
// ---------------------------------------------------------------------------

double tv_value(const Image& x) {
  Image dv, dh;
  forward_diffs(x, dv, dh);
  return (dv.square() + dh.square()).sqrt().sum();
}

double tv_smooth_value(const Image& x, double delta) {
  Image dv, dh;
  forward_diffs(x, dv, dh);
  return (dv.square() + dh.square() + delta).sqrt().sum();
}

Image tv_smooth_grad(const Image& x, double delta) {
  Image dv, dh;
  forward_diffs(x, dv, dh);
  const Image scale = (dv.square() + dh.square() + delta).sqrt();
  // d/dx of sum_ij sqrt(dv^2 + dh^2 + delta): push the normalized differences
  // back through the difference operators.
  return -divergence(dv / scale, dh / scale);
}

Image chambolle_tv_denoise(const Image& g, double weight, int inner_iters) {
  DualField dual;
  return chambolle_tv_denoise(g, weight, inner_iters, dual);
}

Image chambolle_tv_denoise(const Image& g, double weight, int inner_iters,
                           DualField& dual_out) {
  if (inner_iters < 1) throw std::invalid_argument("chambolle_tv_denoise: inner_iters >= 1");
  if (!(weight > 0.0)) throw std::invalid_argument("chambolle_tv_denoise: weight > 0");
  constexpr double kDualStep = 0.25;
  const Eigen::Index rows = g.rows();
  const Eigen::Index cols = g.cols();
  Image p1 = Image::Zero(rows, cols);
  Image p2 = Image::Zero(rows, cols);
  Image d1, d2;
  for (int n = 0; n < inner_iters; ++n) {
    const Image u = divergence(p1, p2) - g / weight;
    forward_diffs(u, d1, d2);
    const Image denom = 1.0 + kDualStep * (d1.square() + d2.square()).sqrt();
    p1 = (p1 + kDualStep * d1) / denom;
    p2 = (p2 + kDualStep * d2) / denom;
  }
  dual_out.p1 = p1;
  dual_out.p2 = p2;
  return g - weight * divergence(p1, p2);
}

// ---------------------------------------------------------------------------
// Haar wavelets.
// ---------------------------------------------------------------------------

int WaveletTransform::max_levels(int rows, int cols) {
  int levels = 0;
  int m = std::min(rows, cols);
  while (m > 1) {
    m >>= 1;
    ++levels;
  }
  return levels;
}

WaveletTransform::WaveletTransform(int rows, int cols, int levels)
    : rows_(rows), cols_(cols), levels_(levels) {
  if (!is_power_of_two(rows) || !is_power_of_two(cols)) {
    throw std::invalid_argument("WaveletTransform: dimensions must be powers of two");
  }
  if (levels < 1 || levels > max_levels(rows, cols)) {
    throw std::invalid_argument("WaveletTransform: bad level count");
  }
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void haar_rows_forward(Image& a, int m, int n) {
  Eigen::ArrayXd tmp(n);
  for (int i = 0; i < m; ++i) {
    for (int t = 0; t < n / 2; ++t) {
      const double lo = a(i, 2 * t), hi = a(i, 2 * t + 1);
      tmp(t) = (lo + hi) * kInvSqrt2;
      tmp(n / 2 + t) = (lo - hi) * kInvSqrt2;
    }
    for (int t = 0; t < n; ++t) a(i, t) = tmp(t);
  }
}

void haar_cols_forward(Image& a, int m, int n) {
  Eigen::ArrayXd tmp(m);
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < m / 2; ++t) {
      const double lo = a(2 * t, j), hi = a(2 * t + 1, j);
      tmp(t) = (lo + hi) * kInvSqrt2;
      tmp(m / 2 + t) = (lo - hi) * kInvSqrt2;
    }
    for (int t = 0; t < m; ++t) a(t, j) = tmp(t);
  }
}

void haar_rows_inverse(Image& a, int m, int n) {
  Eigen::ArrayXd tmp(n);
  for (int i = 0; i < m; ++i) {
    for (int t = 0; t < n / 2; ++t) {
      const double s = a(i, t), d = a(i, n / 2 + t);
      tmp(2 * t) = (s + d) * kInvSqrt2;
      tmp(2 * t + 1) = (s - d) * kInvSqrt2;
    }
    for (int t = 0; t < n; ++t) a(i, t) = tmp(t);
  }
}

void haar_cols_inverse(Image& a, int m, int n) {
  Eigen::ArrayXd tmp(m);
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < m / 2; ++t) {
      const double s = a(t, j), d = a(m / 2 + t, j);
      tmp(2 * t) = (s + d) * kInvSqrt2;
      tmp(2 * t + 1) = (s - d) * kInvSqrt2;
    }
    for (int t = 0; t < m; ++t) a(t, j) = tmp(t);
  }
}

}  // namespace

Image WaveletTransform::forward(const Image& x) const {
  if (x.rows() != rows_ || x.cols() != cols_) {
    throw std::invalid_argument("WaveletTransform::forward: wrong shape");
  }
  Image a = x;
  for (int l = 0; l < levels_; ++l) {
    const int m = rows_ >> l;
    const int n = cols_ >> l;
    haar_rows_forward(a, m, n);
    haar_cols_forward(a, m, n);
  }
  return a;
}

Image WaveletTransform::inverse(const Image& coeffs) const {
  if (coeffs.rows() != rows_ || coeffs.cols() != cols_) {
    throw std::invalid_argument("WaveletTransform::inverse: wrong shape");
  }
  Image a = coeffs;
  for (int l = levels_ - 1; l >= 0; --l) {
    const int m = rows_ >> l;
    const int n = cols_ >> l;
    haar_cols_inverse(a, m, n);
    haar_rows_inverse(a, m, n);
  }
  return a;
}

Image l1_wavelet_smooth_grad(const Image& x, const WaveletTransform& wavelet,
                             double sigma, double beta) {
  Image coeffs = wavelet.forward(x);
  coeffs = (coeffs / sigma).max(-1.0).min(1.0);
  return beta * wavelet.inverse(coeffs);
}

Image wavelet_prox_step(const Image& wbar, const WaveletTransform& wavelet,
                        double mu, double beta, double sigma) {
  const Image coeffs = wavelet.forward(wbar);
  const Image clipped = (2.0 * coeffs / (2.0 * sigma + beta * mu)).max(-1.0).min(1.0);
  return wavelet.inverse(coeffs - (mu * beta / 2.0) * clipped);
}

// ---------------------------------------------------------------------------
// Blur.
// ---------------------------------------------------------------------------

BlurOperator::BlurOperator(int rows, int cols, int kernel_size)
    : rows_(rows), cols_(cols), kernel_size_(kernel_size),
      fft_(std::make_shared<Fft2D>(rows, cols)) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw std::invalid_argument("BlurOperator: kernel size must be odd and positive");
  }
  // Embed the centered kernel in the periodic grid; taps that wrap onto the
  // same cell accumulate.
  Image kernel = Image::Zero(rows, cols);
  const int half = kernel_size / 2;
  const double w = 1.0 / (static_cast<double>(kernel_size) * kernel_size);
  for (int di = -half; di <= half; ++di) {
    for (int dj = -half; dj <= half; ++dj) {
      const int i = ((di % rows) + rows) % rows;
      const int j = ((dj % cols) + cols) % cols;
      kernel(i, j) += w;
    }
  }
  spectrum_ = fft_->forward(kernel);
}

Image BlurOperator::apply(const Image& x) const {
  auto spec = fft_->forward(x);
  for (std::size_t idx = 0; idx < spec.size(); ++idx) spec[idx] *= spectrum_[idx];
  return fft_->inverse(spec);
}

Image BlurOperator::apply_adjoint(const Image& x) const {
  auto spec = fft_->forward(x);
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    spec[idx] *= std::conj(spectrum_[idx]);
  }
  return fft_->inverse(spec);
}

Image BlurOperator::solve_normal_shifted(const Image& rhs, double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("solve_normal_shifted: shift must be positive");
  auto spec = fft_->forward(rhs);
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    spec[idx] /= std::norm(spectrum_[idx]) + c;
  }
  return fft_->inverse(spec);
}

double BlurOperator::norm_bound() const {
  double top = 0.0;
  for (const auto& s : spectrum_) top = std::max(top, std::abs(s));
  return top;
}

Image data_solve(const Image& w, const Image& grad_tv, const Image& grad_wavelet,
                 const BlurOperator& blur, const Image& b, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("data_solve: mu must be positive");
  const Image rhs = blur.apply_adjoint(b) - grad_tv - grad_wavelet + (2.0 / mu) * w;
  return blur.solve_normal_shifted(rhs, 2.0 / mu);
}

double isnr(const Image& x, const Image& b, const Image& truth) {
  const double num = (b - truth).matrix().squaredNorm();
  const double den = (x - truth).matrix().squaredNorm();
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / den);
}

// ---------------------------------------------------------------------------
// Oracles.
// ---------------------------------------------------------------------------

namespace {

Vector flatten_image(const Image& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Image unflatten_vector(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Image>(v.data(), rows, cols);
}

class TvOracle final : public ProxOracle {
 public:
  TvOracle(Eigen::Index rows, Eigen::Index cols, double alpha, double delta,
           int inner_iters)
      : rows_(rows), cols_(cols), alpha_(alpha), delta_(delta),
        inner_iters_(inner_iters) {}

  Eigen::Index dim() const override { return rows_ * cols_; }

  double value(const Vector& x) const override {
    return alpha_ * tv_smooth_value(unflatten_vector(x, rows_, cols_), delta_);
  }

  Vector grad(const Vector& x) const override {
    return alpha_ * flatten_image(tv_smooth_grad(unflatten_vector(x, rows_, cols_), delta_));
  }

  // Hessian bound of the perturbed TV: ||grad^T grad|| / sqrt(delta) <= 8/sqrt(delta).
  double lipschitz() const override { return 8.0 * alpha_ / std::sqrt(delta_); }

  // Nonsmooth TV prox, solved approximately by the dual projection iteration.
  Vector prox(double lambda, const Vector& y) const override {
    const Image g = unflatten_vector(y, rows_, cols_);
    return flatten_image(chambolle_tv_denoise(g, lambda * alpha_, inner_iters_));
  }

 private:
  Eigen::Index rows_, cols_;
  double alpha_, delta_;
  int inner_iters_;
};

class WaveletL1Oracle final : public ProxOracle {
 public:
  WaveletL1Oracle(std::shared_ptr<const WaveletTransform> wavelet, double beta,
                  double sigma)
      : wavelet_(std::move(wavelet)), beta_(beta), sigma_(sigma) {}

  Eigen::Index dim() const override {
    return static_cast<Eigen::Index>(wavelet_->rows()) * wavelet_->cols();
  }

  double value(const Vector& x) const override {
    const Image coeffs =
        wavelet_->forward(unflatten_vector(x, wavelet_->rows(), wavelet_->cols()));
    double total = 0.0;
    for (Eigen::Index idx = 0; idx < coeffs.size(); ++idx) {
      total += huber_value(coeffs(idx), sigma_);
    }
    return beta_ * total;
  }

  Vector grad(const Vector& x) const override {
    return flatten_image(l1_wavelet_smooth_grad(
        unflatten_vector(x, wavelet_->rows(), wavelet_->cols()), *wavelet_, sigma_, beta_));
  }

  double lipschitz() const override { return beta_ / sigma_; }

  Vector prox(double lambda, const Vector& y) const override {
    const Image coeffs =
        wavelet_->forward(unflatten_vector(y, wavelet_->rows(), wavelet_->cols()));
    const double shrink = beta_ * lambda;
    const Image clipped = (coeffs / (sigma_ + shrink)).max(-1.0).min(1.0);
    return flatten_image(wavelet_->inverse(coeffs - shrink * clipped));
  }

 private:
  std::shared_ptr<const WaveletTransform> wavelet_;
  double beta_, sigma_;
};

class DataOracle final : public ProxOracle {
 public:
  DataOracle(std::shared_ptr<const BlurOperator> blur, Image observed)
      : blur_(std::move(blur)), observed_(std::move(observed)),
        atb_(blur_->apply_adjoint(observed_)),
        norm_sq_(blur_->norm_bound() * blur_->norm_bound()) {}

  Eigen::Index dim() const override {
    return static_cast<Eigen::Index>(blur_->rows()) * blur_->cols();
  }

  double value(const Vector& x) const override {
    const Image res =
        blur_->apply(unflatten_vector(x, blur_->rows(), blur_->cols())) - observed_;
    return 0.5 * res.matrix().squaredNorm();
  }

  Vector grad(const Vector& x) const override {
    const Image img = unflatten_vector(x, blur_->rows(), blur_->cols());
    return flatten_image(blur_->apply_adjoint(blur_->apply(img) - observed_));
  }

  double lipschitz() const override { return norm_sq_; }

  Vector prox(double lambda, const Vector& y) const override {
    const Image img = unflatten_vector(y, blur_->rows(), blur_->cols());
    return flatten_image(blur_->solve_normal_shifted(atb_ + img / lambda, 1.0 / lambda));
  }

 private:
  std::shared_ptr<const BlurOperator> blur_;
  Image observed_;
  Image atb_;
  double norm_sq_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Model.
// ---------------------------------------------------------------------------

DeblurModel::DeblurModel(Image truth, const DeblurParams& params)
    : truth_(std::move(truth)), params_(params) {
  const int rows = static_cast<int>(truth_.rows());
  const int cols = static_cast<int>(truth_.cols());
  blur_ = std::make_shared<BlurOperator>(rows, cols, params.kernel_size);
  const int levels = params.wavelet_levels > 0 ? params.wavelet_levels
                                               : WaveletTransform::max_levels(rows, cols);
  wavelet_ = std::make_shared<WaveletTransform>(rows, cols, levels);

  observed_ = blur_->apply(truth_);
  if (params.noise_sd != 0.0) {
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> gauss(0.0, params.noise_sd);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) observed_(i, j) += gauss(rng);
    }
  }

  std::vector<std::shared_ptr<const ProxOracle>> functions;
  functions.push_back(std::make_shared<TvOracle>(rows, cols, params.alpha, params.delta,
                                                 params.tv_inner_iters));
  functions.push_back(std::make_shared<WaveletL1Oracle>(wavelet_, params.beta, params.sigma));
  functions.push_back(std::make_shared<DataOracle>(blur_, observed_));
  problem_ = std::make_unique<SplitProblem>(std::move(functions));
}

double DeblurModel::objective(const Image& x) const {
  return problem_->value(flatten(x));
}

double DeblurModel::isnr_of(const Image& x) const { return isnr(x, observed_, truth_); }

Vector DeblurModel::flatten(const Image& x) const { return flatten_image(x); }

Image DeblurModel::unflatten(const Vector& v) const {
  return unflatten_vector(v, truth_.rows(), truth_.cols());
}

void deblur_step(MsaState& state, const DeblurModel& model, double mu) {
  msa_step(state, MixingMatrix::uniform(model.problem().size()), mu, model.problem());
}

void deblur_step(FamsaState& state, const DeblurModel& model, double mu) {
  famsa_step(state, MixingMatrix::uniform(model.problem().size()), mu, model.problem());
}

void deblur_step(FamsasState& state, const DeblurModel& model, double mu) {
  famsas_step(state, mu, model.problem());
}

Image make_test_image(int rows, int cols) {
  Image img = Image::Constant(rows, cols, 30.0);
  // Bright rectangle.
  for (int i = rows / 8; i < rows / 2; ++i) {
    for (int j = cols / 8; j < cols / 2; ++j) img(i, j) = 200.0;
  }
  // Mid-gray disk.
  const double ci = 5.0 * rows / 8.0;
  const double cj = 5.0 * cols / 8.0;
  const double radius = std::min(rows, cols) / 5.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double di = i - ci, dj = j - cj;
      if (di * di + dj * dj <= radius * radius) img(i, j) = 120.0;
    }
  }
  // Vertical stripe.
  for (int i = rows / 16; i < rows - rows / 16; ++i) {
    for (int j = 3 * cols / 4; j < 7 * cols / 8; ++j) img(i, j) = 90.0;
  }
  return img;
}

// ---------------------------------------------------------------------------
// Image I/O.
// ---------------------------------------------------------------------------

void write_pgm(const Image& x, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << x.cols() << ' ' << x.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double v = std::clamp(std::round(x(i, j)), 0.0, 255.0);
      out.put(static_cast<char>(static_cast<unsigned char>(v)));
    }
  }
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path);
}

namespace {

int next_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments, then parses one integer.
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = 0;
  if (!(in >> value)) throw std::runtime_error("read_pgm: malformed header");
  return value;
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("read_pgm: not a binary PGM: " + path);
  const int cols = next_pnm_token(in);
  const int rows = next_pnm_token(in);
  const int maxval = next_pnm_token(in);
  if (cols < 1 || rows < 1 || maxval != 255) {
    throw std::runtime_error("read_pgm: unsupported PGM variant in " + path);
  }
  in.get();  // single whitespace after maxval
  Image img(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int c = in.get();
      if (c == EOF) throw std::runtime_error("read_pgm: truncated data in " + path);
      img(i, j) = static_cast<double>(static_cast<unsigned char>(c));
    }
  }
  return img;
}

void write_text_grid(const Image& x, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_text_grid: cannot open " + path);
  out.precision(17);
  out << x.rows() << ' ' << x.cols() << '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out << x(i, j) << (j + 1 == x.cols() ? '\n' : ' ');
    }
  }
  if (!out) throw std::runtime_error("write_text_grid: write failed for " + path);
}

Image read_text_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_text_grid: cannot open " + path);
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1) {
    throw std::runtime_error("read_text_grid: bad header in " + path);
  }
  Image img(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> img(i, j))) {
        throw std::runtime_error("read_text_grid: truncated data in " + path);
      }
    }
  }
  return img;
}

}  // namespace msplit::deblur
