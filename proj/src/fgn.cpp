#include "hermite/fgn.h"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fftw3.h>

#include "hermite/errors.h"

namespace hermite {

double fgn_autocovariance(double hurst, double lag) {
  const double k = std::abs(lag);
  const double two_h = 2.0 * hurst;
  if (k < 2.0) {
    return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(std::abs(k - 1.0), two_h));
  }
  // k^2H [ (1+x)^2H - 2 + (1-x)^2H ] / 2 with x = 1/k, both halves via expm1
  // so the O(x) terms cancel without losing digits.
  const double x = 1.0 / k;
  const double up = std::expm1(two_h * std::log1p(x));
  const double down = std::expm1(two_h * std::log1p(-x));
  return 0.5 * std::pow(k, two_h) * (up + down);
}

struct FgnGenerator::FftState {
  std::size_t size = 0;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit FftState(std::size_t m) : size(m) {
    in = fftw_alloc_complex(m);
    out = fftw_alloc_complex(m);
    // FFTW_ESTIMATE keeps the plan, and so the output bits, independent of
    // timing measurements.
    plan = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~FftState() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  FftState(const FftState&) = delete;
  FftState& operator=(const FftState&) = delete;
};

FgnGenerator::FgnGenerator(double hurst, std::size_t n, bool force_dense) : hurst_(hurst), n_(n) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw ValidationError("fGn Hurst index must lie in (0, 1), got " + std::to_string(hurst));
  }
  if (n < 2) {
    throw ValidationError("fGn length must be at least 2");
  }
  std::size_t half = 1;
  while (half < n - 1) half <<= 1;
  const std::size_t m = 2 * half;
  fft_ = std::make_unique<FftState>(m);

  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t lag = k <= half ? k : m - k;
    fft_->in[k][0] = fgn_autocovariance(hurst, static_cast<double>(lag));
    fft_->in[k][1] = 0.0;
  }
  fftw_execute(fft_->plan);

  sqrt_eigen_.resize(m);
  bool negative = false;
  for (std::size_t k = 0; k < m; ++k) {
    const double lambda = fft_->out[k][0];
    if (lambda < -1e-10) negative = true;
    sqrt_eigen_[k] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
  }

  if (negative || force_dense) {
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            fgn_autocovariance(hurst, static_cast<double>(i) - static_cast<double>(j));
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("fGn covariance is not positive definite at H=" + std::to_string(hurst));
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    cholesky_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cholesky_[i * n + j] = lower(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
}

FgnGenerator::~FgnGenerator() = default;
FgnGenerator::FgnGenerator(FgnGenerator&&) noexcept = default;
FgnGenerator& FgnGenerator::operator=(FgnGenerator&&) noexcept = default;

std::vector<double> FgnGenerator::draw(Engine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n_);
  if (uses_cholesky()) {
    std::vector<double> z(n_);
    for (double& x : z) x = normal(rng);
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += cholesky_[i * n_ + j] * z[j];
      out[i] = acc;
    }
    return out;
  }
  const std::size_t m = fft_->size;
  for (std::size_t k = 0; k < m; ++k) {
    const double a = normal(rng);
    const double b = normal(rng);
    fft_->in[k][0] = sqrt_eigen_[k] * a;
    fft_->in[k][1] = sqrt_eigen_[k] * b;
  }
  fftw_execute(fft_->plan);
  for (std::size_t k = 0; k < n_; ++k) out[k] = fft_->out[k][0];
  return out;
}

}  // namespace hermite
