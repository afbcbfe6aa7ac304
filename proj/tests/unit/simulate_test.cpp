#include "hermite/simulate.h"

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "hermite/errors.h"

using namespace hermite;

namespace {

double sample_variance(const std::vector<double>& x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

double sample_skewness(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : x) {
    m2 += (v - mean) * (v - mean);
    m3 += (v - mean) * (v - mean) * (v - mean);
  }
  m2 /= n;
  m3 /= n;
  return m3 / std::pow(m2, 1.5);
}

// Golub-Welsch nodes and weights for the standard normal weight.
void gauss_hermite_rule(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
    const double first = solver.eigenvectors()(0, k);
    weights[static_cast<std::size_t>(k)] = first * first;
  }
}

std::size_t index_of(const SamplePath& path, double t) {
  return static_cast<std::size_t>(std::llround(t / path.step()));
}

}  // namespace

TEST(HermitePolynomialTest, LowOrders) {
  for (double x : {-2.5, -0.3, 0.0, 1.7}) {
    EXPECT_EQ(hermite_polynomial(0, x), 1.0);
    EXPECT_EQ(hermite_polynomial(1, x), x);
    EXPECT_NEAR(hermite_polynomial(2, x), x * x - 1.0, 1e-14);
    EXPECT_NEAR(hermite_polynomial(3, x), x * x * x - 3.0 * x, 1e-13);
    EXPECT_NEAR(hermite_polynomial(4, x), x * x * x * x - 6.0 * x * x + 3.0, 1e-12);
  }
  EXPECT_THROW(hermite_polynomial(-1, 0.0), ValidationError);
}

TEST(HermitePolynomialTest, OrthogonalUnderGaussianWeight) {
  std::vector<double> nodes;
  std::vector<double> weights;
  gauss_hermite_rule(24, nodes, weights);
  double factorial = 1.0;
  for (int l = 0; l <= 6; ++l) {
    if (l > 0) factorial *= l;
    for (int m = 0; m <= 6; ++m) {
      double sum = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        sum += weights[k] * hermite_polynomial(l, nodes[k]) * hermite_polynomial(m, nodes[k]);
      }
      const double expected = l == m ? factorial : 0.0;
      EXPECT_NEAR(sum, expected, 1e-8 * std::max(1.0, expected)) << l << "," << m;
    }
  }
}

TEST(FgnTest, AutocovarianceValues) {
  EXPECT_DOUBLE_EQ(fgn_autocovariance(0.7, 0.0), 1.0);
  EXPECT_NEAR(fgn_autocovariance(0.7, 1.0), 0.5 * (std::pow(2.0, 1.4) - 2.0), 1e-15);
  for (double h : {0.6, 0.75, 0.9}) {
    const double k = 1e5;
    EXPECT_NEAR(fgn_autocovariance(h, k) * std::pow(k, 2.0 - 2.0 * h), h * (2.0 * h - 1.0), 1e-4);
  }
}

TEST(FgnTest, MeanOverManyShortSequences) {
  // One long LRD sequence has a mean with sd n^(H-1); 10^6 draws split into
  // short independent blocks give sd about 1.3e-3.
  FgnGenerator generator(0.7, 4);
  Engine rng = substream(98, "mean");
  double sum = 0.0;
  const int blocks = 250000;
  for (int r = 0; r < blocks; ++r) {
    for (double x : generator.draw(rng)) sum += x;
  }
  EXPECT_NEAR(sum / (4.0 * blocks), 0.0, 3e-3);
}

TEST(FgnTest, LagOneCorrelation) {
  const std::size_t n = 1 << 16;
  GaussianSequence seq = gen_fgn(0.7, n, 99);
  EXPECT_FALSE(seq.used_cholesky);
  double lag1 = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    var += seq.values[i] * seq.values[i];
    if (i + 1 < n) lag1 += seq.values[i] * seq.values[i + 1];
  }
  EXPECT_NEAR(var / n, 1.0, 0.05);
  EXPECT_NEAR(lag1 / (n - 1), 0.5 * (std::pow(2.0, 1.4) - 2.0), 0.01);
}

TEST(FgnTest, DenseFallbackMatchesCovariance) {
  FgnGenerator dense(0.8, 6, true);
  EXPECT_TRUE(dense.uses_cholesky());
  Engine rng = substream(5, "dense");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(6, 6);
  const int reps = 40000;
  for (int r = 0; r < reps; ++r) {
    const std::vector<double> x = dense.draw(rng);
    Eigen::Map<const Eigen::VectorXd> v(x.data(), 6);
    acc += v * v.transpose();
  }
  acc /= reps;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      EXPECT_NEAR(acc(i, j), fgn_autocovariance(0.8, std::abs(i - j)), 0.04);
    }
  }
}

TEST(FgnTest, Deterministic) {
  GaussianSequence a = gen_fgn(0.65, 1000, 7, 3);
  GaussianSequence b = gen_fgn(0.65, 1000, 7, 3);
  GaussianSequence c = gen_fgn(0.65, 1000, 7, 4);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(SimulateTest, BaseHurstMapping) {
  EXPECT_DOUBLE_EQ(base_hurst(HermiteSpec(0.7, 1)), 0.7);
  EXPECT_DOUBLE_EQ(base_hurst(HermiteSpec(0.8, 2)), 0.9);
  const HermiteSpec spec(0.7, 3);
  EXPECT_NEAR(2.0 * base_hurst(spec) - 2.0, (2.0 * 0.7 - 2.0) / 3.0, 1e-15);
}

TEST(SimulateTest, PathShapeAndDeterminism) {
  const HermiteSpec spec(0.7, 2);
  SamplePath a = simulate_hermite_path(spec, 128, 1.5, 11, 2);
  SamplePath b = simulate_hermite_path(spec, 128, 1.5, 11, 2);
  SamplePath c = simulate_hermite_path(spec, 128, 1.5, 11, 3);
  ASSERT_EQ(a.size(), 193u);
  EXPECT_EQ(a.values[0], 0.0);
  EXPECT_EQ(a.times[0], 0.0);
  EXPECT_DOUBLE_EQ(a.horizon(), 1.5);
  EXPECT_EQ(a.method, PathMethod::invariance_principle);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  for (std::size_t k = 1; k < a.size(); ++k) EXPECT_GT(a.times[k], a.times[k - 1]);
}

TEST(SimulateTest, RejectsBadGrid) {
  const HermiteSpec spec(0.7, 1);
  EXPECT_THROW(simulate_hermite_path(spec, 0, 1.0, 1), ValidationError);
  EXPECT_THROW(simulate_hermite_path(spec, 64, 0.0, 1), ValidationError);
  EXPECT_THROW(simulate_hermite_path(spec, 64, -1.0, 1), ValidationError);
  EXPECT_THROW(PathSimulator(HermiteSpec(0.7, 2), 64, 1.0, PathMethod::exact_fbm), ValidationError);
}

TEST(SimulateTest, PartialSumSdOrderOne) {
  // For order 1 the partial sum of n fGn terms has variance n^(2H).
  const HermiteSpec spec(0.7, 1);
  EXPECT_NEAR(partial_sum_sd(spec, 256), std::pow(256.0, 0.7), 1e-9 * std::pow(256.0, 0.7));
}

TEST(SimulateTest, VarianceLawRosenblatt) {
  const HermiteSpec spec(0.7, 2);
  PathSimulator sim(spec, 256, 2.0);
  const int paths = 3000;
  const double ts[] = {0.25, 0.5, 1.0, 2.0};
  std::vector<std::vector<double>> samples(4);
  for (int p = 0; p < paths; ++p) {
    SamplePath path = sim.draw(2024, static_cast<std::uint64_t>(p));
    for (int i = 0; i < 4; ++i) samples[i].push_back(path.values[index_of(path, ts[i])]);
  }
  std::vector<double> log_t;
  std::vector<double> log_v;
  for (int i = 0; i < 4; ++i) {
    const double ratio = sample_variance(samples[i]) / std::pow(ts[i], 1.4);
    EXPECT_NEAR(ratio, 1.0, 0.12) << "t=" << ts[i];
    log_t.push_back(std::log(ts[i]));
    log_v.push_back(std::log(sample_variance(samples[i])));
  }
  const double mt = std::accumulate(log_t.begin(), log_t.end(), 0.0) / 4.0;
  const double mv = std::accumulate(log_v.begin(), log_v.end(), 0.0) / 4.0;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int i = 0; i < 4; ++i) {
    sxy += (log_t[i] - mt) * (log_v[i] - mv);
    sxx += (log_t[i] - mt) * (log_t[i] - mt);
  }
  EXPECT_NEAR(sxy / sxx, 1.4, 0.1);
  // Rosenblatt marginals are right-skewed.
  EXPECT_GT(sample_skewness(samples[2]), 0.3);
}

TEST(SimulateTest, ExactFbmCovariance) {
  const double h = 0.65;
  PathSimulator sim(HermiteSpec(h, 1), 64, 1.0, PathMethod::exact_fbm);
  const int paths = 4000;
  double s11 = 0.0;
  double s22 = 0.0;
  double s12 = 0.0;
  double inc = 0.0;
  for (int p = 0; p < paths; ++p) {
    SamplePath path = sim.draw(77, static_cast<std::uint64_t>(p));
    const double a = path.values[32];
    const double b = path.values[64];
    s11 += a * a;
    s22 += b * b;
    s12 += a * b;
    const double d = path.values[20] - path.values[4];
    inc += d * d;
  }
  const HermiteSpec spec(h, 1);
  EXPECT_NEAR(s11 / paths, covariance(spec, 0.5, 0.5), 0.05 * covariance(spec, 0.5, 0.5));
  EXPECT_NEAR(s22 / paths, 1.0, 0.05);
  EXPECT_NEAR(s12 / paths, covariance(spec, 0.5, 1.0), 0.05 * covariance(spec, 0.5, 1.0));
  EXPECT_NEAR(inc / paths, std::pow(0.25, 2 * h), 0.05 * std::pow(0.25, 2 * h));
}

TEST(SimulateTest, IncrementsPositivelyCorrelated) {
  const HermiteSpec spec(0.75, 2);
  PathSimulator sim(spec, 4, 512.0);
  int votes[33] = {};
  for (int rep = 0; rep < 100; ++rep) {
    SamplePath path = sim.draw(31, static_cast<std::uint64_t>(rep));
    std::vector<double> unit;
    for (std::size_t k = 4; k < path.size(); k += 4) unit.push_back(path.values[k] - path.values[k - 4]);
    // Increments have mean zero by construction; demeaning would bias long lags.
    for (int lag = 1; lag <= 32; ++lag) {
      double acc = 0.0;
      for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < unit.size(); ++i) {
        acc += unit[i] * unit[i + static_cast<std::size_t>(lag)];
      }
      if (acc > 0.0) ++votes[lag];
    }
  }
  for (int lag = 1; lag <= 32; ++lag) EXPECT_GT(votes[lag], 50) << "lag " << lag;
}

TEST(SubordinateTest, VarianceIsLinearInTime) {
  const HermiteSpec spec(0.7, 1);
  const int paths = 3000;
  std::vector<double> at1;
  std::vector<double> at2;
  std::vector<double> inc;
  for (int p = 0; p < paths; ++p) {
    SamplePath s = subordinate(spec, 32, 2.0, 8, static_cast<std::uint64_t>(p));
    ASSERT_EQ(s.method, PathMethod::subordinated);
    ASSERT_EQ(s.values[0], 0.0);
    at1.push_back(s.values[32]);
    at2.push_back(s.values[64]);
    inc.push_back(s.values[64] - s.values[32]);
  }
  EXPECT_NEAR(sample_variance(at1), 1.0, 0.1);
  EXPECT_NEAR(sample_variance(at2), 2.0, 0.2);
  const double expected_inc = std::pow(std::pow(2.0, 1.0 / 1.4) - 1.0, 1.4);
  EXPECT_NEAR(sample_variance(inc), expected_inc, 0.1 * expected_inc);
  EXPECT_GT(std::abs(expected_inc - 1.0), 0.3);
}

TEST(SubordinateTest, ReadsDriverAtWarpedTimes) {
  const HermiteSpec spec(0.75, 2);
  SamplePath driver = simulate_hermite_path(spec, 1000, 2.0, 4);
  SamplePath s = subordinate(driver, 10, 2.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double tau = std::pow(s.times[k], 1.0 / 1.5);
    EXPECT_EQ(s.values[k], driver.values[static_cast<std::size_t>(std::llround(tau * 1000))]);
  }
  SamplePath short_driver = simulate_hermite_path(spec, 1000, 1.0, 4);
  EXPECT_THROW(subordinate(short_driver, 10, 2.0), ValidationError);
}

TEST(StratonovichTest, ConstantIntegrandTelescopes) {
  SamplePath path = simulate_fbm_exact(0.7, 512, 1.0, 3);
  std::vector<double> ones(path.size(), 1.0);
  EXPECT_NEAR(stratonovich_integral(ones, path), path.values.back(), 1e-12);
  StratonovichConfig mid{0.5, 64};
  EXPECT_NEAR(stratonovich_integral(ones, path, mid), path.values.back(), 1e-12);
}

TEST(StratonovichTest, GridMismatchRejected) {
  SamplePath path = simulate_fbm_exact(0.7, 64, 1.0, 3);
  std::vector<double> wrong(path.size() - 1, 1.0);
  EXPECT_THROW(stratonovich_integral(wrong, path), ValidationError);
  std::vector<double> ones(path.size(), 1.0);
  EXPECT_THROW(stratonovich_integral(ones, path, {0.5, 0}), ValidationError);
  EXPECT_THROW(stratonovich_integral(ones, path, {0.0, 48}), ValidationError);
  EXPECT_THROW(stratonovich_integral(ones, path, {1.5, 32}), ValidationError);
}

TEST(StratonovichTest, SelfIntegralApproachesHalfSquare) {
  SamplePath path = simulate_fbm_exact(0.75, 1 << 14, 1.0, 12);
  const double target = 0.5 * path.values.back() * path.values.back();
  const double left = stratonovich_integral(path.values, path, {0.0, 1 << 13});
  const double mid = stratonovich_integral(path.values, path, {0.5, 1 << 13});
  EXPECT_NEAR(left, target, 0.05);
  EXPECT_NEAR(mid, target, 0.05);
}

TEST(StratonovichTest, EvaluationPointDifferenceShrinks) {
  for (std::uint64_t idx = 0; idx < 5; ++idx) {
    SamplePath path = simulate_fbm_exact(0.8, 1 << 13, 1.0, 21, idx);
    double previous = INFINITY;
    for (std::size_t n = 1 << 8; n <= (1 << 12); n *= 2) {
      const double diff = std::abs(stratonovich_integral(path.values, path, {0.0, n}) -
                                   stratonovich_integral(path.values, path, {0.5, n}));
      EXPECT_LT(diff, previous) << "path " << idx << " n " << n;
      previous = diff;
    }
  }
}

TEST(ChainRuleTest, IdentityFunctionHasZeroResidual) {
  SamplePath path = simulate_hermite_path(HermiteSpec(0.7, 2), 256, 1.0, 9);
  SmoothFunction g{[](double x, double) { return x; }, [](double, double) { return 1.0; },
                   [](double, double) { return 0.0; }};
  EXPECT_LT(chain_rule_residual(g, path), 1e-12);
}

TEST(ChainRuleTest, TimeDependentFunctionExactForLinearT) {
  SamplePath path = simulate_fbm_exact(0.7, 256, 1.0, 9);
  SmoothFunction g{[](double x, double t) { return x + 3.0 * t; }, [](double, double) { return 1.0; },
                   [](double, double) { return 3.0; }};
  EXPECT_LT(chain_rule_residual(g, path), 1e-12);
}

TEST(ChainRuleTest, QuadraticAndExponentialResidualsShrink) {
  SmoothFunction square{[](double x, double) { return 0.5 * x * x; },
                        [](double x, double) { return x; }, [](double, double) { return 0.0; }};
  SmoothFunction expo{[](double x, double) { return std::exp(x); },
                      [](double x, double) { return std::exp(x); }, [](double, double) { return 0.0; }};
  for (std::uint64_t idx = 0; idx < 4; ++idx) {
    SamplePath fine = simulate_fbm_exact(0.7, 1 << 12, 1.0, 17, idx);
    for (const SmoothFunction* g : {&square, &expo}) {
      double previous = INFINITY;
      for (std::size_t n = 1 << 8; n <= (1 << 12); n *= 2) {
        const double r = chain_rule_residual(*g, fine, {0.0, n});
        EXPECT_LT(r, previous) << "path " << idx << " n " << n;
        previous = r;
      }
    }
  }
}
