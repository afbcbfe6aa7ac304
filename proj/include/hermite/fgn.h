#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "hermite/rng.h"

namespace hermite {

/// Autocovariance of unit-step fractional Gaussian noise at lag k:
/// (|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2. Stable for large k.
double fgn_autocovariance(double hurst, double lag);

/// Exact sampler for n consecutive fGn values by circulant embedding
/// (Davies-Harte). Falls back to a dense Cholesky factor when the embedding
/// has a negative eigenvalue; `uses_cholesky()` reports which route is live.
///
/// Not thread-safe: FFTW planning happens in the constructor and each
/// instance owns its scratch buffers. Use one instance per thread.
class FgnGenerator {
 public:
  /// `force_dense` selects the Cholesky route unconditionally.
  FgnGenerator(double hurst, std::size_t n, bool force_dense = false);
  ~FgnGenerator();
  FgnGenerator(FgnGenerator&&) noexcept;
  FgnGenerator& operator=(FgnGenerator&&) noexcept;
  FgnGenerator(const FgnGenerator&) = delete;
  FgnGenerator& operator=(const FgnGenerator&) = delete;

  std::vector<double> draw(Engine& rng);

  double hurst() const { return hurst_; }
  std::size_t size() const { return n_; }
  bool uses_cholesky() const { return !cholesky_.empty(); }

 private:
  struct FftState;

  double hurst_;
  std::size_t n_;
  std::vector<double> sqrt_eigen_;  // sqrt(lambda_j / M)
  std::vector<double> cholesky_;    // row-major lower factor, fallback only
  std::unique_ptr<FftState> fft_;
};

}  // namespace hermite
