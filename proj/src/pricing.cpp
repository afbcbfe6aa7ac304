#include "hermite/pricing.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "hermite/errors.h"

namespace hermite {

namespace {

double log_growth(const MarketSpec& market, std::size_t asset, double t, double T) {
  const BasicRate& div = market.dividends()[asset];
  return (cumulative_rate(market, market.riskless(), T) - cumulative_rate(market, market.riskless(), t)) -
         (cumulative_rate(market, div, T) - cumulative_rate(market, div, t));
}

double characteristic_value(const Payoff& payoff, const MarketSpec& market, double t, double T,
                            std::span<const double> x, std::size_t first_asset) {
  if (T < t) throw ValidationError("maturity precedes valuation time");
  if (first_asset + x.size() > market.assets()) {
    throw ValidationError("price vector has more coordinates than the market has assets");
  }
  std::vector<double> moved(x.begin(), x.end());
  for (std::size_t j = 0; j < moved.size(); ++j) {
    if (!(moved[j] > 0.0)) {
      throw ValidationError("price coordinate " + std::to_string(j + 1) + " must be positive");
    }
    moved[j] *= std::exp(log_growth(market, first_asset + j, t, T));
  }
  return bond_price(market, t, T) * payoff(moved);
}

double interp_uniform(const std::vector<double>& values, double x0, double dx, double x) {
  const double pos = (x - x0) / dx;
  const auto last = static_cast<double>(values.size() - 1);
  if (pos <= 0.0) return values.front() + pos * (values[1] - values[0]);
  if (pos >= last) return values.back() + (pos - last) * (values.back() - values[values.size() - 2]);
  const auto i = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(i);
  return values[i] + w * (values[i + 1] - values[i]);
}

std::size_t node_index(const PricePath& path, double t) {
  auto it = std::lower_bound(path.times.begin(), path.times.end(), t - 1e-9 * std::max(1.0, t));
  if (it == path.times.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, t)) {
    throw ValidationError("price path has no node at t = " + std::to_string(t));
  }
  return static_cast<std::size_t>(it - path.times.begin());
}

}  // namespace

Payoff Payoff::power_product(std::vector<double> alpha, double scale) {
  if (alpha.empty()) throw ValidationError("power payoff needs at least one exponent");
  Payoff p;
  p.kind_ = Kind::power_product;
  p.alpha_ = std::move(alpha);
  p.scale_ = scale;
  return p;
}

Payoff Payoff::table(std::vector<double> prices, std::vector<double> values) {
  if (prices.size() < 2 || prices.size() != values.size()) {
    throw ValidationError("payoff table needs two or more (price, value) pairs");
  }
  Payoff p;
  p.kind_ = Kind::table;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0)) throw ValidationError("payoff table prices must be positive");
    if (i > 0 && !(prices[i] > prices[i - 1])) throw ValidationError("payoff table prices must increase");
    p.log_prices_.push_back(std::log(prices[i]));
  }
  p.values_ = std::move(values);
  return p;
}

Payoff Payoff::callable(std::function<double(std::span<const double>)> f) {
  if (!f) throw ValidationError("payoff callable is empty");
  Payoff p;
  p.kind_ = Kind::callable;
  p.f_ = std::move(f);
  return p;
}

double Payoff::operator()(std::span<const double> x) const {
  switch (kind_) {
    case Kind::power_product: {
      if (x.size() != alpha_.size()) {
        throw ValidationError("power payoff has " + std::to_string(alpha_.size()) + " exponents but " +
                              std::to_string(x.size()) + " prices were given");
      }
      double v = scale_;
      for (std::size_t j = 0; j < x.size(); ++j) v *= std::pow(x[j], alpha_[j]);
      return v;
    }
    case Kind::table: {
      if (x.size() != 1) throw ValidationError("table payoffs depend on one price");
      const double y = std::log(x[0]);
      const auto& ly = log_prices_;
      std::size_t hi = static_cast<std::size_t>(std::upper_bound(ly.begin(), ly.end(), y) - ly.begin());
      hi = std::clamp<std::size_t>(hi, 1, ly.size() - 1);
      const std::size_t lo = hi - 1;
      const double w = (y - ly[lo]) / (ly[hi] - ly[lo]);
      return (1.0 - w) * values_[lo] + w * values_[hi];
    }
    case Kind::callable:
      return f_(x);
  }
  return 0.0;
}

std::vector<double> perpetual_pde_residual(const PricingFunction& g, const MarketSpec& market,
                                           std::span<const SamplePoint> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const SamplePoint& p : points) {
    if (p.x.size() > market.assets()) {
      throw ValidationError("sample point has more coordinates than the market has assets");
    }
    const double r = instantaneous_rate(market, market.riskless(), p.t);
    double res = g.dt(p.t, p.x) - r * g.value(p.t, p.x);
    for (std::size_t j = 0; j < p.x.size(); ++j) {
      const double delta = instantaneous_rate(market, market.dividends()[j], p.t);
      res += p.x[j] * (r - delta) * g.dx(p.t, p.x, j);
    }
    out.push_back(res);
  }
  return out;
}

double bond_price(const MarketSpec& market, double t, double T) {
  if (t < 0.0) throw ValidationError("valuation time must be nonnegative");
  if (T < t) throw ValidationError("bond maturity T precedes valuation time t");
  return bond_price_extended(market, t, T);
}

double bond_price_extended(const MarketSpec& market, double u, double T) {
  return std::exp(-(cumulative_rate(market, market.riskless(), T) - cumulative_rate(market, market.riskless(), u)));
}

double price_characteristics(const Payoff& payoff, const MarketSpec& market, double t, double T,
                             std::span<const double> x) {
  return characteristic_value(payoff, market, t, T, x, 0);
}

PricingField price_fd(const Payoff& payoff, const MarketSpec& market, const PricingGrid& grid) {
  if (!(grid.x_min > 0.0) || !(grid.x_max > grid.x_min)) {
    throw ValidationError("price grid needs 0 < x_min < x_max");
  }
  if (grid.nx < 2 || grid.nt < 1) throw ValidationError("price grid needs nx >= 2 and nt >= 1");
  if (!(grid.T > grid.t0) || grid.t0 < 0.0) throw ValidationError("price grid needs 0 <= t0 < T");
  if (grid.asset >= market.assets()) throw ValidationError("asset index outside the market");

  const double y0 = std::log(grid.x_min);
  const double dy = (std::log(grid.x_max) - y0) / static_cast<double>(grid.nx);
  PricingField field;
  for (std::size_t i = 0; i <= grid.nx; ++i) field.xs.push_back(std::exp(y0 + dy * static_cast<double>(i)));
  for (std::size_t n = 0; n <= grid.nt; ++n) {
    field.ts.push_back(grid.t0 + (grid.T - grid.t0) * static_cast<double>(n) / static_cast<double>(grid.nt));
  }

  auto advection = [&](double a, double b) { return log_growth(market, grid.asset, a, b); };
  // Halve the step until every substep moves characteristics at most one cell.
  std::size_t substeps = 1;
  for (int attempt = 0;; ++attempt) {
    double worst = 0.0;
    const double h = (grid.T - grid.t0) / static_cast<double>(grid.nt * substeps);
    for (std::size_t k = 0; k < grid.nt * substeps; ++k) {
      const double a = grid.t0 + h * static_cast<double>(k);
      worst = std::max(worst, std::abs(advection(a, a + h)));
    }
    if (worst <= dy) break;
    if (attempt >= grid.max_adjustments) {
      throw NumericalError("upwind scheme violates the CFL bound after " + std::to_string(attempt) +
                           " step halvings");
    }
    substeps *= 2;
  }
  field.substeps = substeps;

  auto ghost = [&](double t, double x) {
    return characteristic_value(payoff, market, t, grid.T, std::span<const double>(&x, 1), grid.asset);
  };

  std::vector<double> g(grid.nx + 1);
  for (std::size_t i = 0; i <= grid.nx; ++i) g[i] = payoff(field.xs[i]);
  field.values.assign(grid.nt + 1, {});
  field.values[grid.nt] = g;
  std::vector<double> next(grid.nx + 1);
  const double h = (grid.T - grid.t0) / static_cast<double>(grid.nt * substeps);
  for (std::size_t k = grid.nt * substeps; k-- > 0;) {
    const double ta = grid.t0 + h * static_cast<double>(k);
    const double tb = ta + h;
    const double shift = advection(ta, tb);
    const double nu = std::abs(shift) / dy;
    const double discount = bond_price(market, ta, tb);
    if (shift >= 0.0) {
      const double right = ghost(tb, std::exp(y0 + dy * static_cast<double>(grid.nx + 1)));
      for (std::size_t i = 0; i <= grid.nx; ++i) {
        const double up = i < grid.nx ? g[i + 1] : right;
        next[i] = discount * ((1.0 - nu) * g[i] + nu * up);
      }
    } else {
      const double left = ghost(tb, std::exp(y0 - dy));
      for (std::size_t i = 0; i <= grid.nx; ++i) {
        const double up = i > 0 ? g[i - 1] : left;
        next[i] = discount * ((1.0 - nu) * g[i] + nu * up);
      }
    }
    g.swap(next);
    if (k % substeps == 0) field.values[k / substeps] = g;
  }
  return field;
}

PowerBeta power_derivative_beta(std::span<const double> alpha, const MarketSpec& market) {
  if (alpha.size() != market.assets()) {
    throw ValidationError("need one exponent per asset (" + std::to_string(market.assets()) + ")");
  }
  double sum = 0.0;
  bool time_invariant = market.riskless().kind() == BasicRate::Kind::constant;
  bool dividends_matter = false;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    sum += alpha[j];
    if (alpha[j] != 0.0 && !market.dividends()[j].is_zero()) {
      dividends_matter = true;
      if (market.dividends()[j].kind() != BasicRate::Kind::constant) time_invariant = false;
    }
  }
  if (!dividends_matter) time_invariant = true;
  std::vector<double> a(alpha.begin(), alpha.end());
  PowerBeta out;
  const double base = 1.0 - sum;
  out.beta = [a, base, riskless = market.riskless(), dividends = market.dividends()](double t) {
    const double r = riskless(t);
    if (!(r != 0.0)) throw ValidationError("riskless basic rate vanishes at t = " + std::to_string(t));
    double b = base;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[j] != 0.0) b += a[j] * dividends[j](t) / r;
    }
    return b;
  };
  out.time_invariant = time_invariant;
  out.constant_value = out.beta(0.0);
  return out;
}

PricingFunction power_derivative_field(std::span<const double> alpha, std::function<double(double)> beta,
                                       const MarketSpec& market) {
  std::vector<double> a(alpha.begin(), alpha.end());
  auto value = [a, beta, market](double t, std::span<const double> x) {
    double v = std::exp(beta(t) * cumulative_rate(market, market.riskless(), t));
    for (std::size_t j = 0; j < a.size(); ++j) v *= std::pow(x[j], a[j]);
    return v;
  };
  PricingFunction f;
  f.value = value;
  f.dt = [value, beta, market](double t, std::span<const double> x) {
    const double h = 1e-6 * std::max(1.0, t);
    const double lo = std::max(0.0, t - h);
    const double slope = (beta(t + h) - beta(lo)) / (t + h - lo);
    const double log_rate = slope * cumulative_rate(market, market.riskless(), t) +
                            beta(t) * instantaneous_rate(market, market.riskless(), t);
    return value(t, x) * log_rate;
  };
  f.dx = [value, a](double t, std::span<const double> x, std::size_t j) { return a[j] * value(t, x) / x[j]; };
  return f;
}

TermStructure term_structure(const MarketSpec& market, std::span<const double> anchors,
                             std::span<const double> maturities) {
  TermStructure ts;
  ts.anchors.assign(anchors.begin(), anchors.end());
  ts.maturities.assign(maturities.begin(), maturities.end());
  for (double t : anchors) {
    std::vector<double> row;
    for (double T : maturities) row.push_back(T >= t ? bond_price(market, t, T) : 0.0);
    ts.discount.push_back(std::move(row));
  }
  for (double T : maturities) ts.rates.push_back(instantaneous_rate(market, market.riskless(), T));
  return ts;
}

double forward_price(const MarketSpec& market, double spot, double t, double T) {
  return spot / bond_price(market, t, T);
}

double forward_value(const MarketSpec& market, const PricePath& stock, double t, double T, double u) {
  if (u < t) throw ValidationError("forward valued before its inception");
  (void)T;
  const double st = stock.values[node_index(stock, t)];
  const double su = stock.values[node_index(stock, u)];
  const double carry = cumulative_rate(market, market.riskless(), u) - cumulative_rate(market, market.riskless(), t);
  return -su + st * std::exp(carry);
}

double forward_portfolio_value(const MarketSpec& market, const PricePath& stock, double t, double T, double u) {
  if (u < t) throw ValidationError("forward valued before its inception");
  const double st = stock.values[node_index(stock, t)];
  const double su = stock.values[node_index(stock, u)];
  const double bonds = st / bond_price(market, t, T);
  return bonds * (riskless_price(market, u) / riskless_price(market, T)) - su;
}

std::vector<double> futures_residual(const FuturesField& field, const MarketSpec& market) {
  const std::size_t nt = field.ts.size();
  if (nt == 0 || field.psi.size() != nt || field.path.size() != nt) {
    throw ValidationError("futures field has inconsistent time dimensions");
  }
  if (field.xs.size() < 2) throw ValidationError("futures field needs at least two x nodes");
  const double x0 = field.xs.front();
  const double dx = field.xs[1] - field.xs[0];
  std::vector<double> tau(nt);
  for (std::size_t n = 0; n < nt; ++n) tau[n] = cumulative_rate(market, market.riskless(), field.ts[n]);

  std::vector<double> out(nt);
  double integral = 0.0;
  double prev_psi = 0.0;
  for (std::size_t n = 0; n < nt; ++n) {
    const double x = field.path[n];
    const double psi = interp_uniform(field.psi[n], x0, dx, x);
    if (n > 0) integral += 0.5 * (field.ts[n] - field.ts[n - 1]) * (prev_psi + psi);
    prev_psi = psi;
    const double xl = std::max(x - dx, field.xs.front());
    const double xr = std::min(x + dx, field.xs.back());
    const double psi_x =
        (interp_uniform(field.psi[n], x0, dx, xr) - interp_uniform(field.psi[n], x0, dx, xl)) / (xr - xl);
    double psi_tau = 0.0;
    if (nt == 2) {
      psi_tau = (interp_uniform(field.psi[1], x0, dx, x) - interp_uniform(field.psi[0], x0, dx, x)) /
                (tau[1] - tau[0]);
    } else if (nt > 2) {
      // Three-point Lagrange derivative, one-sided at the ends.
      const std::size_t c = std::clamp<std::size_t>(n, 1, nt - 2);
      const double t0 = tau[c - 1], t1 = tau[c], t2 = tau[c + 1], s = tau[n];
      const double f0 = interp_uniform(field.psi[c - 1], x0, dx, x);
      const double f1 = interp_uniform(field.psi[c], x0, dx, x);
      const double f2 = interp_uniform(field.psi[c + 1], x0, dx, x);
      psi_tau = (f0 - f1) * (2 * s - t1 - t2) / ((t0 - t1) * (t0 - t2)) +
                (f2 - f1) * (2 * s - t0 - t1) / ((t2 - t0) * (t2 - t1));
    }
    out[n] = integral - psi * psi_x - psi * psi_tau;
  }
  return out;
}

FuturesField futures_march(const std::function<double(double)>& initial, std::span<const double> path,
                           const MarketSpec& market, const FuturesGrid& grid) {
  if (grid.nx < 2 || !(grid.x_max > grid.x_min)) throw ValidationError("futures grid needs nx >= 2 and x_max > x_min");
  if (grid.horizon < 0.0) throw ValidationError("futures horizon must be nonnegative");
  const std::size_t nt = grid.horizon == 0.0 ? 0 : grid.nt;
  if (grid.horizon > 0.0 && nt == 0) throw ValidationError("futures grid needs nt >= 1");
  if (path.size() != nt + 1) {
    throw ValidationError("path has " + std::to_string(path.size()) + " samples; the grid needs " +
                          std::to_string(nt + 1));
  }
  FuturesField field;
  const double dx = (grid.x_max - grid.x_min) / static_cast<double>(grid.nx);
  for (std::size_t i = 0; i <= grid.nx; ++i) field.xs.push_back(grid.x_min + dx * static_cast<double>(i));
  for (std::size_t n = 0; n <= nt; ++n) {
    field.ts.push_back(nt == 0 ? 0.0 : grid.horizon * static_cast<double>(n) / static_cast<double>(nt));
  }
  field.path.assign(path.begin(), path.end());
  for (std::size_t n = 0; n <= nt; ++n) {
    if (path[n] < grid.x_min || path[n] > grid.x_max) {
      throw ValidationError("path leaves the x-domain at t = " + std::to_string(field.ts[n]));
    }
  }

  std::vector<double> psi(grid.nx + 1);
  for (std::size_t i = 0; i <= grid.nx; ++i) {
    psi[i] = initial(field.xs[i]);
    if (!(std::abs(psi[i]) > grid.zero_threshold)) {
      throw NumericalError("initial profile is too close to zero at x = " + std::to_string(field.xs[i]));
    }
  }
  field.psi.push_back(psi);
  field.integral.push_back(0.0);

  auto sign_of = [](double v) { return v < 0.0 ? -1.0 : 1.0; };
  double tau = 0.0;
  double source = 0.0;  // int_0^tau I dtau'
  std::vector<double> next(grid.nx + 1);
  for (std::size_t n = 0; n < nt; ++n) {
    const double t0 = field.ts[n];
    const double t1 = field.ts[n + 1];
    const double tau1 = cumulative_rate(market, market.riskless(), t1);
    const double dtau = tau1 - tau;
    const double dt = t1 - t0;
    const double i0 = field.integral[n];
    const double psi_path0 = interp_uniform(psi, grid.x_min, dx, path[n]);
    double i1 = i0 + dt * psi_path0;
    // Predictor with an Euler integral, then one trapezoid correction.
    for (int pass = 0; pass < 2; ++pass) {
      const double gain = dtau * (i0 + i1);  // 2 * int I dtau over the step
      for (std::size_t i = 0; i <= grid.nx; ++i) {
        // psi^2 - 2 int I dtau is constant along x - tau = const.
        const double p0 = initial(field.xs[i] - tau1);
        const double sq = p0 * p0 + 2.0 * source + gain;
        if (!(sq > grid.zero_threshold * grid.zero_threshold)) {
          throw NumericalError("futures payoff reaches zero at x = " + std::to_string(field.xs[i]) +
                               ", t = " + std::to_string(t1));
        }
        next[i] = sign_of(p0) * std::sqrt(sq);
      }
      i1 = i0 + 0.5 * dt * (psi_path0 + interp_uniform(next, grid.x_min, dx, path[n + 1]));
    }
    source += 0.5 * dtau * (i0 + i1);
    tau = tau1;
    psi.swap(next);
    field.psi.push_back(psi);
    field.integral.push_back(i1);
  }
  field.residual = futures_residual(field, market);
  for (double r : field.residual) field.residual_sup = std::max(field.residual_sup, std::abs(r));
  return field;
}

}  // namespace hermite
