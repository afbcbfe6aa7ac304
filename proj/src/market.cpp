#include "hermite/market.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>

#include "hermite/errors.h"

namespace hermite {

namespace {

std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ValidationError("cannot read number '" + std::string(text) + "' in " + context);
  }
  return value;
}

Eigen::MatrixXd to_eigen(const SquareMatrix& m) {
  Eigen::MatrixXd out(m.dim, m.dim);
  for (std::size_t i = 0; i < m.dim; ++i) {
    for (std::size_t j = 0; j < m.dim; ++j) out(i, j) = m(i, j);
  }
  return out;
}

void check_same_grid(std::span<const SamplePath> drivers, std::size_t expected) {
  if (drivers.size() != expected) {
    throw ValidationError("expected " + std::to_string(expected) + " driver paths, got " +
                          std::to_string(drivers.size()));
  }
  for (const SamplePath& p : drivers) {
    if (p.times != drivers.front().times) throw ValidationError("driver paths do not share one grid");
  }
}

}  // namespace

BasicRate BasicRate::constant(double value) {
  if (!std::isfinite(value)) throw ValidationError("rate value must be finite");
  return BasicRate(Kind::constant, {value}, {});
}

BasicRate BasicRate::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) throw ValidationError("polynomial rate needs at least one coefficient");
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw ValidationError("polynomial coefficients must be finite");
  }
  return BasicRate(Kind::polynomial, std::move(coefficients), {});
}

BasicRate BasicRate::table(std::vector<double> times, std::vector<double> values) {
  if (times.empty() || times.size() != values.size()) {
    throw ValidationError("rate table needs matching, nonempty time and value lists");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
      throw ValidationError("rate table entries must be finite");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ValidationError("rate table times must be strictly increasing");
    }
  }
  return BasicRate(Kind::table, std::move(values), std::move(times));
}

double BasicRate::operator()(double t) const {
  switch (kind_) {
    case Kind::constant:
      return coefficients_[0];
    case Kind::polynomial: {
      double acc = 0.0;
      for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * t + *it;
      return acc;
    }
    case Kind::table: {
      if (t <= knots_.front()) return coefficients_.front();
      if (t >= knots_.back()) return coefficients_.back();
      const auto hi = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin());
      const std::size_t lo = hi - 1;
      const double w = (t - knots_[lo]) / (knots_[hi] - knots_[lo]);
      return (1.0 - w) * coefficients_[lo] + w * coefficients_[hi];
    }
  }
  return 0.0;
}

double BasicRate::derivative(double t) const {
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::polynomial: {
      double acc = 0.0;
      for (std::size_t i = coefficients_.size(); i-- > 1;) acc = acc * t + static_cast<double>(i) * coefficients_[i];
      return acc;
    }
    case Kind::table: {
      if (t < knots_.front() || t >= knots_.back() || knots_.size() < 2) return 0.0;
      const auto hi = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin());
      const std::size_t lo = hi - 1;
      return (coefficients_[hi] - coefficients_[lo]) / (knots_[hi] - knots_[lo]);
    }
  }
  return 0.0;
}

bool BasicRate::is_zero() const {
  return std::all_of(coefficients_.begin(), coefficients_.end(), [](double c) { return c == 0.0; });
}

std::pair<double, double> BasicRate::bounds(double horizon) const {
  switch (kind_) {
    case Kind::constant:
      return {coefficients_[0], coefficients_[0]};
    case Kind::polynomial: {
      double lo = INFINITY;
      double hi = -INFINITY;
      for (int i = 0; i <= 4096; ++i) {
        const double v = (*this)(horizon * i / 4096.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      return {lo, hi};
    }
    case Kind::table: {
      double lo = std::min((*this)(0.0), (*this)(horizon));
      double hi = std::max((*this)(0.0), (*this)(horizon));
      for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (knots_[i] < 0.0 || knots_[i] > horizon) continue;
        lo = std::min(lo, coefficients_[i]);
        hi = std::max(hi, coefficients_[i]);
      }
      return {lo, hi};
    }
  }
  return {0.0, 0.0};
}

std::string BasicRate::describe() const {
  std::string out;
  switch (kind_) {
    case Kind::constant:
      return "constant " + format_double(coefficients_[0]);
    case Kind::polynomial:
      out = "poly";
      for (double c : coefficients_) out += " " + format_double(c);
      return out;
    case Kind::table:
      out = "table";
      for (std::size_t i = 0; i < knots_.size(); ++i) {
        out += " " + format_double(knots_[i]) + ":" + format_double(coefficients_[i]);
      }
      return out;
  }
  return out;
}

BasicRate parse_rate(const std::string& text) {
  std::istringstream in(text);
  std::string head;
  if (!(in >> head)) throw ValidationError("empty rate specification");
  std::vector<std::string> rest;
  for (std::string tok; in >> tok;) rest.push_back(tok);
  const std::string context = "rate '" + text + "'";
  if (head == "constant") {
    if (rest.size() != 1) throw ValidationError("constant rate takes one value: " + context);
    return BasicRate::constant(parse_double(rest[0], context));
  }
  if (head == "poly" || head == "polynomial") {
    std::vector<double> c;
    for (const std::string& tok : rest) c.push_back(parse_double(tok, context));
    return BasicRate::polynomial(std::move(c));
  }
  if (head == "table") {
    std::vector<double> times;
    std::vector<double> values;
    for (const std::string& tok : rest) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ValidationError("table entries are time:value pairs: " + context);
      times.push_back(parse_double(std::string_view(tok).substr(0, colon), context));
      values.push_back(parse_double(std::string_view(tok).substr(colon + 1), context));
    }
    return BasicRate::table(std::move(times), std::move(values));
  }
  if (rest.empty()) return BasicRate::constant(parse_double(head, context));
  throw ValidationError("unknown rate kind '" + head + "' (use constant, poly or table)");
}

Volatility::Volatility(SquareMatrix constant) : matrices_{std::move(constant)} {
  if (matrices_.front().dim == 0) throw ValidationError("volatility matrix is empty");
}

Volatility::Volatility(std::vector<double> times, std::vector<SquareMatrix> matrices)
    : times_(std::move(times)), matrices_(std::move(matrices)) {
  if (times_.empty() || times_.size() != matrices_.size()) {
    throw ValidationError("volatility table needs one matrix per time");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (matrices_[i].dim != matrices_.front().dim || matrices_[i].dim == 0) {
      throw ValidationError("volatility matrices must share one nonzero dimension");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw ValidationError("volatility table times must be strictly increasing");
    }
  }
  if (times_.size() == 1) times_.clear();
}

SquareMatrix Volatility::at(double t) const {
  if (matrices_.empty()) throw ValidationError("volatility is not set");
  if (times_.empty() || t <= times_.front()) return matrices_.front();
  if (t >= times_.back()) return matrices_.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  SquareMatrix out(dim());
  for (std::size_t k = 0; k < out.data.size(); ++k) {
    out.data[k] = (1.0 - w) * matrices_[lo].data[k] + w * matrices_[hi].data[k];
  }
  return out;
}

MarketSpec::MarketSpec(HermiteSpec spec, BasicRate riskless, std::vector<BasicRate> drifts,
                       std::vector<BasicRate> dividends, Volatility volatility,
                       std::vector<double> initial_prices, double horizon)
    : spec_(spec),
      riskless_(std::move(riskless)),
      drifts_(std::move(drifts)),
      dividends_(std::move(dividends)),
      volatility_(std::move(volatility)),
      initial_prices_(std::move(initial_prices)),
      horizon_(horizon),
      d_const_(0.0) {
  const std::size_t d = initial_prices_.size();
  if (d == 0) throw ValidationError("market needs at least one risky asset");
  if (!(horizon_ > 0.0)) throw ValidationError("market horizon must be positive");
  if (drifts_.size() != d) {
    throw ValidationError("market has " + std::to_string(d) + " assets but " + std::to_string(drifts_.size()) +
                          " drift rates");
  }
  if (dividends_.empty()) dividends_.assign(d, BasicRate::constant(0.0));
  if (dividends_.size() != d) {
    throw ValidationError("market has " + std::to_string(d) + " assets but " +
                          std::to_string(dividends_.size()) + " dividend rates");
  }
  if (volatility_.dim() != d) {
    throw ValidationError("volatility matrix must be " + std::to_string(d) + " x " + std::to_string(d));
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (!(initial_prices_[j] > 0.0) || !std::isfinite(initial_prices_[j])) {
      throw ValidationError("initial price of asset " + std::to_string(j + 1) + " must be positive");
    }
  }
  const auto [lo, hi] = riskless_.bounds(horizon_);
  if (!(lo > 0.0)) {
    throw ValidationError("riskless basic rate must stay positive on [0, " + format_double(horizon_) +
                          "]; its minimum is " + format_double(lo));
  }
  (void)hi;
  d_const_ = rate_constant(spec_);
}

double rate_constant(const HermiteSpec& spec) {
  static std::mutex mutex;
  static std::map<std::pair<double, int>, double> cache;
  const auto key = std::make_pair(spec.hurst(), spec.order());
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double d = normalizing_constant(spec).d_const;
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, d);
  return d;
}

namespace {

double cumulative_with(double d, double hurst, const BasicRate& rate, double t) {
  if (t < 0.0) throw ValidationError("time must be nonnegative");
  if (t == 0.0) return 0.0;
  return d * rate(t) * std::pow(t, 2.0 * hurst);
}

double instantaneous_with(double d, double hurst, const BasicRate& rate, double t) {
  if (t < 0.0) throw ValidationError("time must be nonnegative");
  if (t == 0.0) return 0.0;
  const double two_h = 2.0 * hurst;
  return d * (two_h * rate(t) * std::pow(t, two_h - 1.0) + rate.derivative(t) * std::pow(t, two_h));
}

}  // namespace

double cumulative_rate(const HermiteSpec& spec, const BasicRate& rate, double t) {
  return cumulative_with(rate_constant(spec), spec.hurst(), rate, t);
}

double cumulative_rate(const MarketSpec& market, const BasicRate& rate, double t) {
  return cumulative_with(market.d_const(), market.spec().hurst(), rate, t);
}

double instantaneous_rate(const HermiteSpec& spec, const BasicRate& rate, double t) {
  return instantaneous_with(rate_constant(spec), spec.hurst(), rate, t);
}

double instantaneous_rate(const MarketSpec& market, const BasicRate& rate, double t) {
  return instantaneous_with(market.d_const(), market.spec().hurst(), rate, t);
}

double riskless_price(const HermiteSpec& spec, const BasicRate& r, double t) {
  return std::exp(cumulative_rate(spec, r, t));
}

double riskless_price(const MarketSpec& market, double t) {
  return std::exp(cumulative_rate(market, market.riskless(), t));
}

std::vector<PricePath> stock_paths(const MarketSpec& market, std::span<const SamplePath> drivers) {
  const std::size_t d = market.assets();
  check_same_grid(drivers, d);
  if (!market.volatility().is_constant()) {
    throw ValidationError("the explicit price formula needs constant volatility; use stock_paths_sde");
  }
  const SquareMatrix sigma = market.volatility().at(0.0);
  const std::vector<double>& times = drivers.front().times;
  std::vector<PricePath> out(d);
  for (std::size_t j = 0; j < d; ++j) {
    out[j].times = times;
    out[j].values.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      double exponent = cumulative_rate(market, market.drifts()[j], times[k]) -
                        cumulative_rate(market, market.dividends()[j], times[k]);
      for (std::size_t m = 0; m < d; ++m) exponent += sigma(j, m) * drivers[m].values[k];
      out[j].values[k] = market.initial_prices()[j] * std::exp(exponent);
    }
  }
  return out;
}

std::vector<PricePath> stock_paths_sde(const MarketSpec& market, std::span<const SamplePath> drivers,
                                       std::size_t refinement) {
  const std::size_t d = market.assets();
  check_same_grid(drivers, d);
  const std::size_t intervals = drivers.front().size() - 1;
  const std::size_t coarse = refinement == 0 ? intervals : refinement;
  if (coarse == 0 || intervals % coarse != 0) {
    throw ValidationError("refinement " + std::to_string(coarse) + " does not divide the driver grid of " +
                          std::to_string(intervals) + " intervals");
  }
  const std::size_t stride = intervals / coarse;
  const std::vector<double>& times = drivers.front().times;
  std::vector<PricePath> out(d);
  for (std::size_t j = 0; j < d; ++j) {
    out[j].times.push_back(times[0]);
    out[j].values.push_back(market.initial_prices()[j]);
  }
  for (std::size_t k = 0; k < coarse; ++k) {
    const std::size_t a = k * stride;
    const std::size_t b = a + stride;
    const SquareMatrix sigma = market.volatility().at(times[a]);
    for (std::size_t j = 0; j < d; ++j) {
      double growth = cumulative_rate(market, market.drifts()[j], times[b]) -
                      cumulative_rate(market, market.drifts()[j], times[a]) -
                      cumulative_rate(market, market.dividends()[j], times[b]) +
                      cumulative_rate(market, market.dividends()[j], times[a]);
      for (std::size_t m = 0; m < d; ++m) growth += sigma(j, m) * (drivers[m].values[b] - drivers[m].values[a]);
      const double s = out[j].values.back();
      out[j].times.push_back(times[b]);
      out[j].values.push_back(s + s * growth);
    }
  }
  return out;
}

PricePath riskless_path(const MarketSpec& market, std::span<const double> times) {
  PricePath out{{times.begin(), times.end()}, {}};
  for (double t : times) out.values.push_back(riskless_price(market, t));
  return out;
}

std::vector<PricePath> deflate(std::span<const PricePath> paths, const MarketSpec& market) {
  std::vector<PricePath> out(paths.begin(), paths.end());
  for (PricePath& p : out) {
    if (p.times.size() != p.values.size()) throw ValidationError("price path has mismatched lengths");
    for (std::size_t k = 0; k < p.values.size(); ++k) p.values[k] /= riskless_price(market, p.times[k]);
  }
  return out;
}

std::vector<double> solve_market_price_of_risk(const MarketSpec& market, double t, std::span<const double> v) {
  const std::size_t d = market.assets();
  const double kernel = eval_kernel(market.spec(), t, v);
  const Eigen::MatrixXd sigma = to_eigen(market.volatility().at(t));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sigma);
  const double scale = sigma.cwiseAbs().maxCoeff();
  lu.setThreshold(1e-12);
  if (!(scale > 0.0) || !lu.isInvertible()) {
    throw ValidationError("volatility matrix is singular at t = " + format_double(t));
  }
  Eigen::VectorXd rhs(d);
  for (std::size_t j = 0; j < d; ++j) {
    rhs(static_cast<Eigen::Index>(j)) = (market.drifts()[j](t) - market.riskless()(t)) * kernel;
  }
  const Eigen::VectorXd z = lu.solve(rhs);
  return std::vector<double>(z.data(), z.data() + d);
}

RiskPriceConsistency risk_price_time_consistency(const MarketSpec& market, std::span<const double> times,
                                                 std::span<const double> v) {
  if (times.empty()) throw ValidationError("consistency check needs at least one time");
  RiskPriceConsistency out;
  out.times.assign(times.begin(), times.end());
  const std::size_t d = market.assets();
  std::vector<double> mean(d, 0.0);
  for (double t : times) {
    out.z.push_back(solve_market_price_of_risk(market, t, v));
    for (std::size_t j = 0; j < d; ++j) mean[j] += out.z.back()[j] / static_cast<double>(times.size());
  }
  double mean_norm = 0.0;
  for (double m : mean) mean_norm += m * m;
  mean_norm = std::sqrt(mean_norm);
  double spread = 0.0;
  for (const auto& z : out.z) {
    double dist = 0.0;
    for (std::size_t j = 0; j < d; ++j) dist += (z[j] - mean[j]) * (z[j] - mean[j]);
    spread = std::max(spread, std::sqrt(dist));
  }
  if (mean_norm > 0.0) {
    out.relative_spread = spread / mean_norm;
  } else {
    out.relative_spread = spread > 0.0 ? INFINITY : 0.0;
  }
  return out;
}

CombinedDriver combine_drivers(std::span<const double> sigma_row, std::span<const GaussianSequence> bases) {
  if (sigma_row.empty() || sigma_row.size() != bases.size()) {
    throw ValidationError("need one base sequence per volatility entry");
  }
  double norm = 0.0;
  for (double s : sigma_row) norm += s * s;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw ValidationError("volatility row is identically zero");
  const std::size_t n = bases.front().values.size();
  for (const GaussianSequence& b : bases) {
    if (b.values.size() != n || b.hurst_prime != bases.front().hurst_prime) {
      throw ValidationError("base sequences must share length and Hurst index");
    }
  }
  CombinedDriver out;
  out.sigma = norm;
  out.base = GaussianSequence{std::vector<double>(n, 0.0), bases.front().hurst_prime, bases.front().seed,
                              bases.front().used_cholesky};
  for (std::size_t k = 0; k < sigma_row.size(); ++k) {
    const double w = sigma_row[k] / norm;
    out.weights.push_back(w);
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) out.base.values[i] += w * bases[k].values[i];
  }
  return out;
}

}  // namespace hermite
