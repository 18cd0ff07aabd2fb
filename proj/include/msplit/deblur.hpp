#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "msplit/engine.hpp"
#include "msplit/fft2d.hpp"
#include "msplit/problem.hpp"

namespace msplit::deblur {

using msplit::Image;

// ---------------------------------------------------------------------------
// Total variation.
// ---------------------------------------------------------------------------

/// Discrete TV with forward differences and replicate boundary
/// (zero forward difference on the last row/column):
///   sum_ij sqrt((x_{i+1,j} - x_{ij})^2 + (x_{i,j+1} - x_{ij})^2).
double tv_value(const Image& x);

/// Perturbed smooth TV, sum_ij sqrt(dv^2 + dh^2 + delta), and its gradient.
double tv_smooth_value(const Image& x, double delta);
Image tv_smooth_grad(const Image& x, double delta);

/// Dual field for the TV denoising iteration (one 2-vector per pixel).
struct DualField {
  Image p1;  // vertical component
  Image p2;  // horizontal component
};

/// Approximately solves min_x weight * TV(x) + (1/2)||x - g||^2 by the dual
/// projection iteration (dual step 0.25), starting from a zero dual field.
Image chambolle_tv_denoise(const Image& g, double weight, int inner_iters);
Image chambolle_tv_denoise(const Image& g, double weight, int inner_iters,
                           DualField& dual_out);

// ---------------------------------------------------------------------------
// Orthonormal multilevel Haar wavelet transform.
// ---------------------------------------------------------------------------

class WaveletTransform {
 public:
  /// Dimensions must be powers of two, 1 <= levels <= log2(min(rows, cols)).
  WaveletTransform(int rows, int cols, int levels);

  Image forward(const Image& x) const;
  Image inverse(const Image& coeffs) const;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int levels() const { return levels_; }

  static int max_levels(int rows, int cols);

 private:
  int rows_;
  int cols_;
  int levels_;
};

/// Gradient of the smoothed wavelet-l1 term beta * sum_j huber((Phi x)_j, sigma):
/// beta * Phi^T clamp(Phi x / sigma, -1, 1).
Image l1_wavelet_smooth_grad(const Image& x, const WaveletTransform& wavelet,
                             double sigma, double beta);

/// Exact minimizer of  (mu/2) f2^sigma(y) + (1/2)||y - wbar||^2  with
/// f2^sigma(y) = beta * sum_j huber((Phi y)_j, sigma):
///   Phi^T( Phi wbar - (mu beta / 2) clamp(2 Phi wbar / (2 sigma + beta mu), -1, 1) ).
Image wavelet_prox_step(const Image& wbar, const WaveletTransform& wavelet,
                        double mu, double beta, double sigma);

// ---------------------------------------------------------------------------
// Uniform blur with periodic boundary.
// ---------------------------------------------------------------------------

/// Convolution with a kernel_size x kernel_size uniform kernel (entries
/// 1/kernel_size^2) under periodic boundary conditions.  The operator is
/// circulant, hence diagonalized by the DFT, and symmetric for this kernel.
class BlurOperator {
 public:
  BlurOperator(int rows, int cols, int kernel_size = 9);

  Image apply(const Image& x) const;
  Image apply_adjoint(const Image& x) const;

  /// Exact spectral solve of (A^T A + c I) z = rhs.
  Image solve_normal_shifted(const Image& rhs, double c) const;

  /// Operator norm, max |spectrum|.
  double norm_bound() const;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int kernel_size() const { return kernel_size_; }

 private:
  int rows_;
  int cols_;
  int kernel_size_;
  std::shared_ptr<Fft2D> fft_;
  std::vector<std::complex<double>> spectrum_;
};

/// Solves the data-fidelity block subproblem
///   (A^T A + (2/mu) I) z = A^T b - grad_tv - grad_wavelet + (2/mu) w
/// exactly in the DFT domain.
Image data_solve(const Image& w, const Image& grad_tv, const Image& grad_wavelet,
                 const BlurOperator& blur, const Image& b, double mu);

/// Improvement in signal-to-noise ratio of the reconstruction x over the
/// observation b: 10 log10(||b - truth||^2 / ||x - truth||^2).  Zero at x = b,
/// positive when x is closer to the truth than b is, +infinity at x = truth.
double isnr(const Image& x, const Image& b, const Image& truth);

// ---------------------------------------------------------------------------
// Model assembly.
// ---------------------------------------------------------------------------

struct DeblurParams {
  double alpha = 0.001;   // TV weight
  double beta = 0.035;    // wavelet-l1 weight
  double delta = 1e-4;    // TV smoothing
  double sigma = 1e-4;    // l1 smoothing
  double noise_sd = 0.56;
  std::uint64_t seed = 0;
  int kernel_size = 9;
  int wavelet_levels = 0;  // 0: full depth
  int tv_inner_iters = 10;
};

/// The three-function deblurring model: observation, operators and the
/// split problem {alpha TV (smoothed delta), beta ||Phi x||_1 (smoothed sigma),
/// (1/2)||A x - b||^2} wired for the splitting engine.
class DeblurModel {
 public:
  DeblurModel(Image truth, const DeblurParams& params);

  const Image& truth() const { return truth_; }
  const Image& observed() const { return observed_; }
  const BlurOperator& blur() const { return *blur_; }
  const WaveletTransform& wavelet() const { return *wavelet_; }
  const DeblurParams& params() const { return params_; }
  const SplitProblem& problem() const { return *problem_; }

  int rows() const { return static_cast<int>(truth_.rows()); }
  int cols() const { return static_cast<int>(truth_.cols()); }

  /// Smoothed objective at an image (all three terms).
  double objective(const Image& x) const;
  double isnr_of(const Image& x) const;

  Vector flatten(const Image& x) const;
  Image unflatten(const Vector& v) const;

 private:
  Image truth_;
  Image observed_;
  DeblurParams params_;
  std::shared_ptr<BlurOperator> blur_;
  std::shared_ptr<WaveletTransform> wavelet_;
  std::unique_ptr<SplitProblem> problem_;
};

/// One iteration of the three-block scheme under each recombination rule.
void deblur_step(MsaState& state, const DeblurModel& model, double mu);
void deblur_step(FamsaState& state, const DeblurModel& model, double mu);
void deblur_step(FamsasState& state, const DeblurModel& model, double mu);

/// Deterministic piecewise-constant test image with a few blocks and a disk,
/// intensities in [0, 255].
Image make_test_image(int rows, int cols);

// ---------------------------------------------------------------------------
// Image I/O.
// ---------------------------------------------------------------------------

/// Binary PGM (P5, maxval 255); values are clamped and rounded on write.
void write_pgm(const Image& x, const std::string& path);
Image read_pgm(const std::string& path);

/// Lossless plain-text grid: "rows cols" header then one row per line.
void write_text_grid(const Image& x, const std::string& path);
Image read_text_grid(const std::string& path);

}  // namespace msplit::deblur
