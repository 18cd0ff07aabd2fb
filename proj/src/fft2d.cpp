#include "msplit/fft2d.hpp"

#include <stdexcept>

namespace msplit {

Fft2D::Fft2D(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("Fft2D: bad dimensions");
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  buf_in_ = fftw_alloc_complex(count);
  buf_out_ = fftw_alloc_complex(count);
  if (!buf_in_ || !buf_out_) throw std::bad_alloc();
  plan_fwd_ = fftw_plan_dft_2d(rows, cols, buf_in_, buf_out_, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_2d(rows, cols, buf_in_, buf_out_, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft2D::~Fft2D() {
  fftw_destroy_plan(plan_fwd_);
  fftw_destroy_plan(plan_inv_);
  fftw_free(buf_in_);
  fftw_free(buf_out_);
}

std::vector<std::complex<double>> Fft2D::forward(const Image& in) const {
  if (in.rows() != rows_ || in.cols() != cols_) {
    throw std::invalid_argument("Fft2D::forward: image has the wrong shape");
  }
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * cols_ + j;
      buf_in_[idx][0] = in(i, j);
      buf_in_[idx][1] = 0.0;
    }
  }
  fftw_execute(plan_fwd_);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(rows_) * cols_);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    out[idx] = {buf_out_[idx][0], buf_out_[idx][1]};
  }
  return out;
}

Image Fft2D::inverse(const std::vector<std::complex<double>>& in) const {
  if (in.size() != static_cast<std::size_t>(rows_) * cols_) {
    throw std::invalid_argument("Fft2D::inverse: spectrum has the wrong size");
  }
  for (std::size_t idx = 0; idx < in.size(); ++idx) {
    buf_in_[idx][0] = in[idx].real();
    buf_in_[idx][1] = in[idx].imag();
  }
  fftw_execute(plan_inv_);
  Image out(rows_, cols_);
  const double scale = 1.0 / (static_cast<double>(rows_) * cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      out(i, j) = buf_out_[static_cast<std::size_t>(i) * cols_ + j][0] * scale;
    }
  }
  return out;
}

}  // namespace msplit
