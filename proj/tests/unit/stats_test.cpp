#include "hermite/stats.h"

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "hermite/errors.h"
#include "hermite/rng.h"

using namespace hermite;

namespace {

SamplePath zero_path(std::size_t steps, std::size_t per_unit) {
  SamplePath path{{}, std::vector<double>(steps + 1, 0.0), HermiteSpec(0.7, 1), PathMethod::exact_fbm, 0};
  for (std::size_t k = 0; k <= steps; ++k) path.times.push_back(static_cast<double>(k) / per_unit);
  return path;
}

SamplePath random_walk(std::size_t steps, std::uint64_t seed) {
  SamplePath path = zero_path(steps, steps);
  Engine rng = substream(seed, "walk");
  std::normal_distribution<double> normal;
  for (std::size_t k = 1; k <= steps; ++k) path.values[k] = path.values[k - 1] + normal(rng);
  return path;
}

}  // namespace

TEST(CenteredQvTest, ZeroPathGivesMinusCentering) {
  SamplePath path = zero_path(64, 64);
  const QVReport r = centered_qv(path, 0.7, 1.0 / 16.0);
  EXPECT_EQ(r.n_blocks, 16u);
  EXPECT_NEAR(r.v_stat, -16.0 * std::pow(1.0 / 16.0, 1.4), 1e-14);
  EXPECT_EQ(r.normalizer, 1.0);
  const QVReport n = with_normalizer(r, 2.0);
  EXPECT_DOUBLE_EQ(n.normalized, r.v_stat / 2.0);
  EXPECT_THROW(with_normalizer(r, 0.0), ValidationError);
}

TEST(CenteredQvTest, RejectsMisalignedBlocks) {
  SamplePath path = zero_path(64, 64);
  EXPECT_THROW(centered_qv(path, 0.7, 0.3 / 64.0), ValidationError);
  EXPECT_THROW(centered_qv(path, 0.7, 3.0 / 64.0), ValidationError);
  EXPECT_THROW(centered_qv(path, 0.7, 0.0), ValidationError);
}

TEST(CenteredQvTest, MeanIsZeroForExactFbm) {
  for (std::size_t n_blocks : {64u, 512u}) {
    const std::vector<double> v = qv_samples(HermiteSpec(0.7, 1), n_blocks, 0.25, 2000, 5, 1);
    const double m = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / m;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (m - 1.0) / m);
    EXPECT_LT(std::abs(mean), 3.0 * se) << n_blocks;
  }
}

TEST(CenteredQvTest, BlockRescalingMatchesDirectComputation) {
  SamplePath path = simulate_fbm_exact(0.65, 8, 4.0, 3);
  const QVReport fine = centered_qv(path, 0.65, 0.125);
  const QVReport coarse = centered_qv(path, 0.65, 0.5);
  EXPECT_EQ(fine.n_blocks, 32u);
  EXPECT_EQ(coarse.n_blocks, 8u);
  double direct = 0.0;
  for (std::size_t k = 0; k < 32; k += 4) {
    const double d = path.values[k + 4] - path.values[k];
    direct += d * d - std::pow(0.5, 1.3);
  }
  EXPECT_NEAR(coarse.v_stat, direct, 1e-13);
}

TEST(QvNormalizerTest, PositiveWithErrorBar) {
  const MonteCarloEstimate d = qv_normalizer(HermiteSpec(0.6, 1), 128, 0.01, 1);
  EXPECT_GT(d.value, 0.0);
  EXPECT_GT(d.std_error, 0.0);
  EXPECT_LT(d.std_error, 0.2 * d.value);
  QVConfig too_few;
  too_few.mc_paths = 50;
  EXPECT_THROW(qv_normalizer(HermiteSpec(0.6, 1), 128, 0.01, 1, too_few), ValidationError);
}

TEST(QvNormalizerTest, ScalesWithBlockPower) {
  const HermiteSpec spec(0.7, 2);
  const MonteCarloEstimate a = qv_normalizer(spec, 64, 1.0, 9);
  const MonteCarloEstimate b = qv_normalizer(spec, 64, 0.5, 9);
  EXPECT_NEAR(b.value / a.value, std::pow(0.5, 1.4), 1e-12);
}

TEST(QvScalingTest, RegimeOracle) {
  EXPECT_DOUBLE_EQ(qv_regime_exponent(HermiteSpec(0.6, 1)), 0.5);
  EXPECT_DOUBLE_EQ(qv_regime_exponent(HermiteSpec(0.75, 1)), 0.5);
  EXPECT_NEAR(qv_regime_exponent(HermiteSpec(0.85, 1)), 0.7, 1e-15);
  EXPECT_NEAR(qv_regime_exponent(HermiteSpec(0.7, 2)), 0.7, 1e-15);
  EXPECT_NEAR(qv_regime_exponent(HermiteSpec(0.7, 3)), 0.8, 1e-15);
}

TEST(QvScalingTest, RegimesSeparate) {
  const std::size_t ns[] = {128, 256, 512, 1024};
  QVConfig config;
  config.mc_paths = 400;
  config.substeps = 2;
  const ScalingFit one = qv_scaling_exponent(HermiteSpec(0.6, 1), ns, 0.01, 3, config);
  const ScalingFit two = qv_scaling_exponent(HermiteSpec(0.7, 2), ns, 0.01, 3, config);
  EXPECT_NEAR(one.fit.slope, 0.5, 0.1);
  EXPECT_NEAR(two.fit.slope, 0.7, 0.12);
  EXPECT_EQ(one.log_n.size(), 4u);
}

TEST(QvScalingTest, RejectsNarrowSpan) {
  const std::size_t narrow[] = {100, 200, 400};
  const std::size_t too_few[] = {100, 1000};
  EXPECT_THROW(qv_scaling_exponent(HermiteSpec(0.6, 1), narrow, 1.0, 1), ValidationError);
  EXPECT_THROW(qv_scaling_exponent(HermiteSpec(0.6, 1), too_few, 1.0, 1), ValidationError);
}

TEST(QvGaussianityTest, RegimeOneLooksNormal) {
  const std::vector<double> v = qv_samples(HermiteSpec(0.6, 1), 2048, 1.0, 1000, 11, 1);
  EXPECT_GT(jarque_bera(v).p_value, 0.01);
}

TEST(FitLineTest, ExactLineHasZeroError) {
  const double x[] = {0.0, 1.0, 2.0, 3.0};
  const double y[] = {1.0, 3.0, 5.0, 7.0};
  const LinearFit fit = fit_line(x, y);
  EXPECT_DOUBLE_EQ(fit.slope, 2.0);
  EXPECT_DOUBLE_EQ(fit.intercept, 1.0);
  EXPECT_NEAR(fit.slope_std_error, 0.0, 1e-15);
  const double same[] = {1.0, 1.0, 1.0, 1.0};
  EXPECT_THROW(fit_line(same, y), ValidationError);
}

TEST(HurstEstimateTest, RecoversExactFbm) {
  const auto scales = default_hurst_scales(1 << 14);
  ASSERT_GE(scales.size(), 3u);
  double mean = 0.0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const HurstEstimate est = estimate_hurst(simulate_fbm_exact(0.7, 1 << 14, 1.0, 4, r), scales);
    EXPECT_FALSE(est.warning.has_value());
    EXPECT_GT(est.std_error, 0.0);
    mean += est.h_hat / 10.0;
  }
  EXPECT_NEAR(mean, 0.7, 0.05);
}

TEST(HurstEstimateTest, RosenblattWithinWideBand) {
  const auto scales = default_hurst_scales(1 << 14);
  double mean = 0.0;
  for (std::uint64_t r = 0; r < 5; ++r) {
    mean += estimate_hurst(simulate_hermite_path(HermiteSpec(0.8, 2), 1 << 14, 1.0, 6, r), scales).h_hat / 5.0;
  }
  EXPECT_GT(mean, 0.72);
  EXPECT_LT(mean, 0.88);
}

TEST(HurstEstimateTest, WhiteNoiseWarns) {
  const auto scales = default_hurst_scales(1 << 14);
  double mean = 0.0;
  int warnings = 0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const HurstEstimate est = estimate_hurst(random_walk(1 << 14, r), scales);
    mean += est.h_hat / 10.0;
    if (est.warning) ++warnings;
  }
  EXPECT_GT(mean, 0.45);
  EXPECT_LT(mean, 0.55);
  EXPECT_GE(warnings, 3);
}

TEST(HurstEstimateTest, DegenerateInputs) {
  const std::size_t scales[] = {1, 2, 4};
  EXPECT_THROW(estimate_hurst(zero_path(256, 256), scales), ValidationError);
  const std::size_t two[] = {1, 2};
  EXPECT_THROW(estimate_hurst(random_walk(256, 1), two), ValidationError);
  const std::size_t big[] = {1, 2, 64};
  EXPECT_THROW(estimate_hurst(random_walk(256, 1), big), ValidationError);
}

TEST(HurstEstimateTest, ErrorShrinksWithLength) {
  const std::size_t scales[] = {1, 2, 4, 8, 16};
  double previous = INFINITY;
  for (std::size_t n = 1 << 10; n <= (1 << 13); n *= 2) {
    double mae = 0.0;
    for (std::uint64_t r = 0; r < 50; ++r) {
      mae += std::abs(estimate_hurst(simulate_fbm_exact(0.7, n, 1.0, 8, r), scales).h_hat - 0.7) / 50.0;
    }
    EXPECT_LT(mae, previous) << n;
    previous = mae;
  }
}

TEST(LrdTest, CoefficientApproachesLimit) {
  EXPECT_NEAR(lrd_limit(0.7), 0.28, 1e-15);
  const std::vector<double> c = lrd_coefficient(0.7, 10000);
  ASSERT_EQ(c.size(), 10000u);
  EXPECT_NEAR(c.back(), 0.28, 0.01 * 0.28);
  EXPECT_NEAR(c.front(), 0.5 * (std::pow(2.0, 1.4) - 2.0), 1e-15);
  EXPECT_THROW(lrd_coefficient(0.7, 0), ValidationError);
}

TEST(LrdTest, PartialSumsDiverge) {
  double direct = 0.0;
  for (std::size_t n = 1; n <= 1000; ++n) direct += fgn_autocovariance(0.7, static_cast<double>(n));
  EXPECT_NEAR(lrd_partial_sum(0.7, 1000), direct, 1e-9 * direct);
  double previous = 0.0;
  for (std::size_t n = 100; n <= 100000; n *= 10) {
    const double s = lrd_partial_sum(0.7, n);
    EXPECT_GT(s, previous);
    EXPECT_GT(s, 2.0 * previous);
    previous = s;
  }
}

TEST(LrdTest, EmpiricalMatchesAnalytic) {
  std::vector<SamplePath> paths;
  for (std::uint64_t r = 0; r < 200; ++r) paths.push_back(simulate_fbm_exact(0.7, 1, 256.0, 13, r));
  const auto emp = empirical_increment_autocovariance(paths, 8);
  ASSERT_EQ(emp.size(), 9u);
  for (std::size_t lag = 0; lag <= 8; ++lag) {
    const double expected = fgn_autocovariance(0.7, static_cast<double>(lag));
    EXPECT_LT(std::abs(emp[lag].value - expected), 3.0 * emp[lag].std_error + 1e-3) << lag;
  }
}

TEST(JarqueBeraTest, DetectsSkew) {
  Engine rng = substream(3, "jb");
  std::normal_distribution<double> normal;
  std::vector<double> gauss;
  std::vector<double> chi;
  for (int i = 0; i < 5000; ++i) {
    const double z = normal(rng);
    gauss.push_back(z);
    chi.push_back(z * z);
  }
  EXPECT_GT(jarque_bera(gauss).p_value, 0.01);
  EXPECT_LT(jarque_bera(chi).p_value, 1e-6);
}
