#include "hermite/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hermite/errors.h"
#include "hermite/fgn.h"
#include "hermite/rng.h"

namespace hermite {

namespace {

std::size_t steps_in(double length, double step, const char* what) {
  const double ratio = length / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ValidationError(std::string(what) + " is not a whole number of grid steps");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

QVReport centered_qv(const SamplePath& path, double hurst_for_centering, double block) {
  if (!(block > 0.0)) throw ValidationError("block length must be positive");
  const std::size_t stride = steps_in(block, path.step(), "block length");
  const std::size_t intervals = path.size() - 1;
  if (intervals % stride != 0) {
    throw ValidationError("blocks of " + std::to_string(stride) + " steps do not tile a path of " +
                          std::to_string(intervals) + " steps");
  }
  const double centering = std::pow(block, 2.0 * hurst_for_centering);
  QVReport report;
  report.block_length = block;
  report.n_blocks = intervals / stride;
  for (std::size_t k = 0; k < intervals; k += stride) {
    const double d = path.values[k + stride] - path.values[k];
    report.v_stat += d * d - centering;
  }
  report.normalized = report.v_stat;
  return report;
}

QVReport with_normalizer(QVReport report, double normalizer) {
  if (!(normalizer > 0.0)) throw ValidationError("QV normalizer must be positive");
  report.normalizer = normalizer;
  report.normalized = report.v_stat / normalizer;
  return report;
}

std::vector<double> qv_samples(const HermiteSpec& spec, std::size_t n_blocks, double block,
                               std::size_t replications, std::uint64_t seed, std::size_t substeps) {
  if (n_blocks < 1) throw ValidationError("need at least one block");
  if (!(block > 0.0)) throw ValidationError("block length must be positive");
  const bool exact = spec.order() == 1;
  const std::size_t per_block = exact ? 1 : std::max<std::size_t>(substeps, 1);
  PathSimulator sim(spec, per_block, static_cast<double>(n_blocks),
                    exact ? PathMethod::exact_fbm : PathMethod::invariance_principle);
  const double scale = std::pow(block, 2.0 * spec.hurst());
  const std::uint64_t stream = mix64(seed ^ mix64(n_blocks));
  std::vector<double> out;
  out.reserve(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    SamplePath path = sim.draw(stream, r);
    out.push_back(scale * centered_qv(path, spec.hurst(), 1.0).v_stat);
  }
  return out;
}

MonteCarloEstimate qv_normalizer(const HermiteSpec& spec, std::size_t n_blocks, double block,
                                 std::uint64_t seed, const QVConfig& config) {
  if (config.mc_paths < 100) throw ValidationError("qv_normalizer needs at least 100 paths");
  const std::vector<double> v = qv_samples(spec, n_blocks, block, config.mc_paths, seed, config.substeps);
  const double m = static_cast<double>(v.size());
  double mean_sq = 0.0;
  for (double x : v) mean_sq += x * x;
  mean_sq /= m;
  double var_sq = 0.0;
  for (double x : v) var_sq += (x * x - mean_sq) * (x * x - mean_sq);
  var_sq /= (m - 1.0);
  const double delta = std::sqrt(mean_sq);
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw NumericalError("quadratic-variation normalizer is not positive and finite");
  }
  return MonteCarloEstimate{delta, std::sqrt(var_sq / m) / (2.0 * delta), v.size()};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("line fit needs two or more paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("line fit needs distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      ssr += r * r;
    }
    fit.slope_std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

ScalingFit qv_scaling_exponent(const HermiteSpec& spec, std::span<const std::size_t> n_list,
                               double block, std::uint64_t seed, const QVConfig& config) {
  std::vector<std::size_t> sorted(n_list.begin(), n_list.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() < 3 || sorted.front() == 0 || sorted.back() < 8 * sorted.front()) {
    throw ValidationError("scaling fit needs at least 3 distinct block counts spanning a factor of 8");
  }
  ScalingFit out;
  for (std::size_t n : sorted) {
    const MonteCarloEstimate delta = qv_normalizer(spec, n, block, seed, config);
    out.log_n.push_back(std::log(static_cast<double>(n)));
    out.log_delta.push_back(std::log(delta.value));
    out.delta_std_error.push_back(delta.std_error);
  }
  out.fit = fit_line(out.log_n, out.log_delta);
  return out;
}

double qv_regime_exponent(const HermiteSpec& spec) {
  const double h = spec.hurst();
  if (spec.order() == 1) return h <= 0.75 ? 0.5 : 2.0 * h - 1.0;
  return 1.0 - 2.0 * (1.0 - h) / spec.order();
}

HurstEstimate estimate_hurst(const SamplePath& path, std::span<const std::size_t> scales) {
  if (scales.size() < 3) throw ValidationError("Hurst estimation needs at least 3 scales");
  const std::size_t intervals = path.size() - 1;
  std::vector<double> log_lag;
  std::vector<double> log_var;
  HurstEstimate est;
  for (std::size_t m : scales) {
    if (m == 0 || intervals / m < 8) {
      throw ValidationError("scale " + std::to_string(m) + " leaves fewer than 8 increments");
    }
    const std::size_t count = intervals / m;
    double ms = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double d = path.values[(k + 1) * m] - path.values[k * m];
      ms += d * d;
    }
    ms /= static_cast<double>(count);
    if (!(ms > 0.0)) throw ValidationError("path is constant at scale " + std::to_string(m));
    log_lag.push_back(std::log(static_cast<double>(m) * path.step()));
    log_var.push_back(std::log(ms));
    est.scales_used.push_back(m);
  }
  const LinearFit fit = fit_line(log_lag, log_var);
  est.h_hat = 0.5 * fit.slope;
  est.std_error = 0.5 * fit.slope_std_error;
  if (!(est.h_hat > 0.5 && est.h_hat < 1.0)) {
    est.warning = "estimated Hurst index " + std::to_string(est.h_hat) +
                  " lies outside (1/2, 1), where no Hermite process is defined";
  }
  return est;
}

std::vector<std::size_t> default_hurst_scales(std::size_t path_steps) {
  std::vector<std::size_t> scales;
  for (std::size_t m = 1; path_steps / m >= 64; m *= 2) scales.push_back(m);
  return scales;
}

std::vector<double> lrd_coefficient(double hurst, std::size_t max_lag) {
  if (max_lag < 1) throw ValidationError("max_lag must be at least 1");
  std::vector<double> out(max_lag);
  for (std::size_t n = 1; n <= max_lag; ++n) {
    const double x = static_cast<double>(n);
    out[n - 1] = std::pow(x, 2.0 - 2.0 * hurst) * fgn_autocovariance(hurst, x);
  }
  return out;
}

double lrd_limit(double hurst) { return hurst * (2.0 * hurst - 1.0); }

double lrd_partial_sum(double hurst, std::size_t n) {
  const double x = static_cast<double>(n);
  const double two_h = 2.0 * hurst;
  // (N+1)^2H - N^2H written to avoid cancellation for large N.
  const double diff = std::pow(x, two_h) * std::expm1(two_h * std::log1p(1.0 / x));
  return 0.5 * (diff - 1.0);
}

std::vector<MonteCarloEstimate> empirical_increment_autocovariance(std::span<const SamplePath> paths,
                                                                   std::size_t max_lag) {
  std::vector<std::vector<double>> products(max_lag + 1);
  for (const SamplePath& path : paths) {
    const std::size_t stride = steps_in(1.0, path.step(), "unit time");
    std::vector<double> unit;
    for (std::size_t k = stride; k < path.size(); k += stride) {
      unit.push_back(path.values[k] - path.values[k - stride]);
    }
    if (unit.size() <= max_lag) throw ValidationError("path too short for the requested lags");
    // One average per path and lag; paths are the independent replicates.
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
      double acc = 0.0;
      for (std::size_t i = 0; i + lag < unit.size(); ++i) acc += unit[i] * unit[i + lag];
      products[lag].push_back(acc / static_cast<double>(unit.size() - lag));
    }
  }
  std::vector<MonteCarloEstimate> out;
  for (const std::vector<double>& p : products) {
    const double m = static_cast<double>(p.size());
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / m;
    double var = 0.0;
    for (double x : p) var += (x - mean) * (x - mean);
    const double se = p.size() > 1 ? std::sqrt(var / (m - 1.0) / m) : 0.0;
    out.push_back(MonteCarloEstimate{mean, se, p.size()});
  }
  return out;
}

NormalityTest jarque_bera(std::span<const double> sample) {
  if (sample.size() < 8) throw ValidationError("normality test needs at least 8 observations");
  const double n = static_cast<double>(sample.size());
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : sample) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw ValidationError("normality test on a constant sample");
  NormalityTest out;
  out.skewness = m3 / std::pow(m2, 1.5);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  out.statistic = n / 6.0 * (out.skewness * out.skewness + 0.25 * out.excess_kurtosis * out.excess_kurtosis);
  out.p_value = std::exp(-0.5 * out.statistic);
  return out;
}

}  // namespace hermite
