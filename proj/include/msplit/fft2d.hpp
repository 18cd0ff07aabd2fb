#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>
#include <fftw3.h>

namespace msplit {

using Image = Eigen::ArrayXXd;  // rows x cols grid of intensities

/// Thin RAII wrapper around FFTW's complex 2-D transforms for one fixed grid
/// size.  Instances own their plans and staging buffers and are not safe to
/// share across threads; create one per worker.
class Fft2D {
 public:
  Fft2D(int rows, int cols);
  ~Fft2D();

  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  /// DFT of a real image; output is rows*cols complex values, row-major.
  std::vector<std::complex<double>> forward(const Image& in) const;

  /// Inverse DFT (normalized by 1/(rows*cols)); returns the real part.
  Image inverse(const std::vector<std::complex<double>>& in) const;

 private:
  int rows_;
  int cols_;
  mutable fftw_complex* buf_in_;
  mutable fftw_complex* buf_out_;
  fftw_plan plan_fwd_;
  fftw_plan plan_inv_;
};

}  // namespace msplit
