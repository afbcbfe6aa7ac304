#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hermite/kernel.h"
#include "hermite/simulate.h"

namespace hermite {

/// Continuous bounded rate function of time: a constant, a polynomial
/// sum c_i t^i, or a piecewise-linear table held flat outside its knots.
class BasicRate {
 public:
  enum class Kind { constant, polynomial, table };

  static BasicRate constant(double value);
  static BasicRate polynomial(std::vector<double> coefficients);
  static BasicRate table(std::vector<double> times, std::vector<double> values);

  BasicRate() : BasicRate(constant(0.0)) {}

  double operator()(double t) const;
  /// Exact for constant and polynomial kinds; the slope of the active
  /// segment for tables (one-sided at knots).
  double derivative(double t) const;

  Kind kind() const { return kind_; }
  bool is_zero() const;
  /// Minimum and maximum over [0, horizon]; exact for constants and tables,
  /// sampled on 4097 points for polynomials.
  std::pair<double, double> bounds(double horizon) const;
  /// Round-trippable text form, e.g. "constant 0.05" or "table 0:0.03 1:0.04".
  std::string describe() const;

  const std::vector<double>& coefficients() const { return coefficients_; }
  const std::vector<double>& knots() const { return knots_; }

 private:
  BasicRate(Kind kind, std::vector<double> coefficients, std::vector<double> knots)
      : kind_(kind), coefficients_(std::move(coefficients)), knots_(std::move(knots)) {}

  Kind kind_;
  std::vector<double> coefficients_;  // polynomial coefficients or table values
  std::vector<double> knots_;         // table times
};

/// Parses the text form produced by BasicRate::describe. A bare number is a constant.
BasicRate parse_rate(const std::string& text);

/// Dense row-major d x d matrix.
struct SquareMatrix {
  std::size_t dim = 0;
  std::vector<double> data;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t d) : dim(d), data(d * d, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * dim + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * dim + j]; }
};

/// Volatility matrix, constant or interpolated linearly between knots.
class Volatility {
 public:
  Volatility() = default;
  explicit Volatility(SquareMatrix constant);
  Volatility(std::vector<double> times, std::vector<SquareMatrix> matrices);

  SquareMatrix at(double t) const;
  bool is_constant() const { return times_.empty(); }
  std::size_t dim() const { return matrices_.empty() ? 0 : matrices_.front().dim; }

 private:
  std::vector<double> times_;
  std::vector<SquareMatrix> matrices_;
};

/// Market description. Construction validates the shapes and positivity
/// requirements and computes the rate constant D once.
class MarketSpec {
 public:
  MarketSpec(HermiteSpec spec, BasicRate riskless, std::vector<BasicRate> drifts,
             std::vector<BasicRate> dividends, Volatility volatility, std::vector<double> initial_prices,
             double horizon = 10.0);

  const HermiteSpec& spec() const { return spec_; }
  const BasicRate& riskless() const { return riskless_; }
  const std::vector<BasicRate>& drifts() const { return drifts_; }
  const std::vector<BasicRate>& dividends() const { return dividends_; }
  const Volatility& volatility() const { return volatility_; }
  const std::vector<double>& initial_prices() const { return initial_prices_; }
  std::size_t assets() const { return initial_prices_.size(); }
  double d_const() const { return d_const_; }
  double horizon() const { return horizon_; }

 private:
  HermiteSpec spec_;
  BasicRate riskless_;
  std::vector<BasicRate> drifts_;
  std::vector<BasicRate> dividends_;
  Volatility volatility_;
  std::vector<double> initial_prices_;
  double horizon_;
  double d_const_;
};

/// D = ||K_1|| / sqrt(order!) for the spec, cached per spec (thread-safe).
double rate_constant(const HermiteSpec& spec);

/// D rate(t) t^(2H).
double cumulative_rate(const HermiteSpec& spec, const BasicRate& rate, double t);
double cumulative_rate(const MarketSpec& market, const BasicRate& rate, double t);

/// Time derivative of cumulative_rate; 0 at t = 0. At table knots the
/// right-hand slope is used.
double instantaneous_rate(const HermiteSpec& spec, const BasicRate& rate, double t);
double instantaneous_rate(const MarketSpec& market, const BasicRate& rate, double t);

/// exp(cumulative riskless rate).
double riskless_price(const HermiteSpec& spec, const BasicRate& r, double t);
double riskless_price(const MarketSpec& market, double t);

struct PricePath {
  std::vector<double> times;
  std::vector<double> values;
};

/// S_j(t) = S_j(0) exp(mu_j^cum - delta_j^cum + sum_m sigma_jm X_m(t)).
/// Requires constant volatility and drivers on one grid.
std::vector<PricePath> stock_paths(const MarketSpec& market, std::span<const SamplePath> drivers);

/// Same dynamics integrated as dS = S (d mu^cum - d delta^cum + sigma dX)
/// with left-point Riemann sums over `refinement` coarse intervals of the
/// driver grid (0 = every interval). Accepts time-dependent volatility.
std::vector<PricePath> stock_paths_sde(const MarketSpec& market, std::span<const SamplePath> drivers,
                                       std::size_t refinement = 0);

/// Riskless asset on a time grid.
PricePath riskless_path(const MarketSpec& market, std::span<const double> times);

/// Each path divided by the riskless price at its times.
std::vector<PricePath> deflate(std::span<const PricePath> paths, const MarketSpec& market);

/// Solves sigma(t) z = (mu(t) - r(t)) K_t(v). Throws ValidationError naming t
/// when sigma(t) is singular.
std::vector<double> solve_market_price_of_risk(const MarketSpec& market, double t,
                                               std::span<const double> v);

struct RiskPriceConsistency {
  std::vector<double> times;
  std::vector<std::vector<double>> z;
  /// max_t |z(t) - mean z| / |mean z|; 0 when z vanishes identically.
  double relative_spread = 0.0;
};

RiskPriceConsistency risk_price_time_consistency(const MarketSpec& market, std::span<const double> times,
                                                 std::span<const double> v);

struct CombinedDriver {
  double sigma = 0.0;
  std::vector<double> weights;  // sigma_k / sigma, unit Euclidean norm
  GaussianSequence base;
};

/// Collapses a volatility row acting on independent drivers into one
/// driver: the base Gaussian sequences are mixed with weights sigma_k / sigma.
CombinedDriver combine_drivers(std::span<const double> sigma_row, std::span<const GaussianSequence> bases);

}  // namespace hermite
