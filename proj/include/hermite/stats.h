#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hermite/kernel.h"
#include "hermite/simulate.h"

namespace hermite {

/// Centered quadratic variation over blocks of length `block_length`.
/// `n_blocks` counts the increments summed.
struct QVReport {
  double v_stat = 0.0;
  std::size_t n_blocks = 0;
  double block_length = 0.0;
  double normalizer = 1.0;
  double normalized = 0.0;
};

/// sum over blocks of (increment^2 - block^(2 hurst)). The block must be a
/// whole number of grid steps and the blocks must tile the path. The report
/// carries normalizer 1; use with_normalizer to attach an estimate.
QVReport centered_qv(const SamplePath& path, double hurst_for_centering, double block);

QVReport with_normalizer(QVReport report, double normalizer);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct QVConfig {
  std::size_t mc_paths = 500;
  /// Grid steps per block. Order 1 uses the exact simulator, where 1 is exact;
  /// higher orders use the invariance principle inside each block.
  std::size_t substeps = 4;
};

/// sqrt(E[V^2]) for N blocks of length `block`, by Monte Carlo. Paths with
/// unit blocks are simulated and V is rescaled by block^(2H), which is exact
/// by self-similarity.
MonteCarloEstimate qv_normalizer(const HermiteSpec& spec, std::size_t n_blocks, double block,
                                 std::uint64_t seed, const QVConfig& config = {});

/// Samples of V for `replications` independent paths (same construction as
/// qv_normalizer).
std::vector<double> qv_samples(const HermiteSpec& spec, std::size_t n_blocks, double block,
                               std::size_t replications, std::uint64_t seed,
                               std::size_t substeps = 4);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};

/// Ordinary least squares of y on x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct ScalingFit {
  LinearFit fit;
  std::vector<double> log_n;
  std::vector<double> log_delta;
  std::vector<double> delta_std_error;
};

/// Slope of log delta^(N) on log N. Needs at least 3 distinct N spanning a
/// factor of at least 8.
ScalingFit qv_scaling_exponent(const HermiteSpec& spec, std::span<const std::size_t> n_list,
                               double block, std::uint64_t seed, const QVConfig& config = {});

/// Limit slope of log delta^(N): 1/2 for order 1 and H <= 3/4, 2H - 1 for
/// order 1 and H > 3/4 (up to a log factor), 1 - 2(1-H)/order otherwise.
double qv_regime_exponent(const HermiteSpec& spec);

struct HurstEstimate {
  double h_hat = 0.0;
  double std_error = 0.0;
  std::vector<std::size_t> scales_used;
  std::optional<std::string> warning;
};

/// Regression of log mean squared increment on log lag. Scales are lags in
/// grid steps; each must leave at least 8 non-overlapping increments.
HurstEstimate estimate_hurst(const SamplePath& path, std::span<const std::size_t> scales);

/// Dyadic lags 1, 2, 4, ... keeping at least 64 increments per lag.
std::vector<std::size_t> default_hurst_scales(std::size_t path_steps);

/// n^(2-2H) rho(n) for n = 1..max_lag, rho the unit-increment autocovariance.
std::vector<double> lrd_coefficient(double hurst, std::size_t max_lag);

/// H(2H-1).
double lrd_limit(double hurst);

/// sum_{n=1}^{N} rho(n) in closed form.
double lrd_partial_sum(double hurst, std::size_t n);

/// Sample autocovariance of unit increments at lags 0..max_lag pooled over
/// paths, using the known zero mean. Paths must have whole-unit grids.
std::vector<MonteCarloEstimate> empirical_increment_autocovariance(std::span<const SamplePath> paths,
                                                                   std::size_t max_lag);

struct NormalityTest {
  double statistic = 0.0;
  double p_value = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Jarque-Bera test with its asymptotic chi-square(2) p-value.
NormalityTest jarque_bera(std::span<const double> sample);

}  // namespace hermite
