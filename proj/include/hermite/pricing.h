#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hermite/market.h"

namespace hermite {

/// Terminal payoff as a function of the price vector.
class Payoff {
 public:
  enum class Kind { power_product, table, callable };

  /// scale * prod_j x_j^alpha_j.
  static Payoff power_product(std::vector<double> alpha, double scale = 1.0);
  /// One-asset payoff tabulated at increasing positive prices; log-linear
  /// interpolation inside, linear-in-log-price extrapolation outside.
  static Payoff table(std::vector<double> prices, std::vector<double> values);
  static Payoff callable(std::function<double(std::span<const double>)> f);

  double operator()(std::span<const double> x) const;
  double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

  Kind kind() const { return kind_; }
  const std::vector<double>& alpha() const { return alpha_; }

 private:
  Kind kind_ = Kind::callable;
  std::vector<double> alpha_;
  double scale_ = 1.0;
  std::vector<double> log_prices_;
  std::vector<double> values_;
  std::function<double(std::span<const double>)> f_;
};

/// Candidate solution g(t, x) with its partial derivatives.
struct PricingFunction {
  std::function<double(double t, std::span<const double> x)> value;
  std::function<double(double t, std::span<const double> x)> dt;
  std::function<double(double t, std::span<const double> x, std::size_t j)> dx;
};

struct SamplePoint {
  double t;
  std::vector<double> x;
};

/// g_t + sum_j x_j (r(t) - delta_j(t)) g_{x_j} - r(t) g at each point, with
/// r and delta_j the instantaneous Hermite rates.
std::vector<double> perpetual_pde_residual(const PricingFunction& g, const MarketSpec& market,
                                           std::span<const SamplePoint> points);

/// Lambda(t,T) = exp(-(r^cum(T) - r^cum(t))). Requires T >= t >= 0.
double bond_price(const MarketSpec& market, double t, double T);

/// M(u) / M(T) for any u, the bond price continued past maturity.
double bond_price_extended(const MarketSpec& market, double u, double T);

/// Lambda(t,T) payoff(x_j exp(int_t^T (r - delta_j))), exact in cumulative rates.
double price_characteristics(const Payoff& payoff, const MarketSpec& market, double t, double T,
                             std::span<const double> x);

/// Rectangular grid for one asset: log-uniform prices in [x_min, x_max]
/// with nx intervals, uniform times in [t0, T] with nt intervals.
struct PricingGrid {
  double x_min = 50.0;
  double x_max = 200.0;
  std::size_t nx = 256;
  double t0 = 0.0;
  double T = 1.0;
  std::size_t nt = 256;
  std::size_t asset = 0;
  /// Maximum number of times the time step may be halved to meet the CFL bound.
  int max_adjustments = 20;
};

struct PricingField {
  std::vector<double> xs;
  std::vector<double> ts;
  std::vector<std::vector<double>> values;  // values[n][i] at (ts[n], xs[i])
  std::size_t substeps = 1;                  // time substeps per grid step actually used
};

/// First-order upwind solution of the pricing PDE in log-price, marched
/// backward from the payoff at T. Inflow boundary values come from the
/// payoff transported along characteristics. Other assets (if any) must be
/// absent from the payoff; the market is read at asset `grid.asset`.
PricingField price_fd(const Payoff& payoff, const MarketSpec& market, const PricingGrid& grid);

struct PowerBeta {
  std::function<double(double)> beta;
  bool time_invariant = false;  // constant ratio of dividend to riskless rates
  double constant_value = 0.0;  // valid when time_invariant
};

/// beta(t) with d[beta r^cum]/dt = r - sum_j alpha_j (r - delta_j) and zero
/// initial product: beta(t) = (1 - sum alpha) + sum alpha_j delta_j(t) / r(t).
PowerBeta power_derivative_beta(std::span<const double> alpha, const MarketSpec& market);

/// g(t,x) = prod x_j^alpha_j exp(beta(t) r^cum(t)) with analytic partials
/// (beta' by central difference when beta varies).
PricingFunction power_derivative_field(std::span<const double> alpha, std::function<double(double)> beta,
                                       const MarketSpec& market);

struct TermStructure {
  std::vector<double> anchors;
  std::vector<double> maturities;
  std::vector<std::vector<double>> discount;  // discount[a][m] = Lambda(anchors[a], maturities[m]); 0 when T < t
  std::vector<double> rates;                  // instantaneous riskless rate at each maturity
};

TermStructure term_structure(const MarketSpec& market, std::span<const double> anchors,
                             std::span<const double> maturities);

/// F(t,T) = S(t) / Lambda(t,T).
double forward_price(const MarketSpec& market, double spot, double t, double T);

/// -S(u) + F(t,T) Lambda(u,T), continued past T with Lambda extended. The
/// product F Lambda collapses to S(t) exp(r^cum(u) - r^cum(t)), which is what
/// gets evaluated, so the inception value is exactly zero. The path must
/// have nodes at t and u.
double forward_value(const MarketSpec& market, const PricePath& stock, double t, double T, double u);

/// Same value assembled from the hedge: short one share, long S(t)/Lambda(t,T) bonds.
double forward_portfolio_value(const MarketSpec& market, const PricePath& stock, double t, double T, double u);

struct FuturesGrid {
  double x_min = 0.0;
  double x_max = 2.0;
  std::size_t nx = 256;
  double horizon = 1.0;
  std::size_t nt = 256;
  double zero_threshold = 1e-8;
};

struct FuturesField {
  std::vector<double> xs;
  std::vector<double> ts;
  std::vector<std::vector<double>> psi;  // psi[n][i] at (ts[n], xs[i])
  std::vector<double> path;              // x(t) at ts
  std::vector<double> integral;          // I(t) = int_0^t psi(x(u), u) du
  std::vector<double> residual;          // futures_residual of the field
  double residual_sup = 0.0;
};

/// R(t) = I(t) - psi psi_x - (1/r(t)) psi psi_t along the path. I by the
/// trapezoid rule, psi_x by central differences after linear interpolation in
/// x, and psi_t / r(t) as a difference quotient in the cumulative rate, which
/// stays finite at t = 0.
std::vector<double> futures_residual(const FuturesField& field, const MarketSpec& market);

/// Marches psi_t = r(t) (I(t) - psi psi_x) / psi forward from `initial` on the
/// grid, with the path x(t) sampled at the grid times. In the cumulative-rate
/// clock the equation is transport at unit speed with source I / psi, so
/// psi^2 - 2 int_0^tau I is carried unchanged along x - tau = const. Each
/// step advances that integral by the trapezoid rule (predictor-corrector,
/// since I depends on psi along the path) and reads psi off the initial
/// profile at the characteristic foot; `initial` must accept x below x_min.
FuturesField futures_march(const std::function<double(double)>& initial, std::span<const double> path,
                           const MarketSpec& market, const FuturesGrid& grid);

}  // namespace hermite
