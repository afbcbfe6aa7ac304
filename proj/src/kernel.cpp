#include "hermite/kernel.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "hermite/errors.h"
#include "hermite/rng.h"

namespace hermite {

namespace {

using boost::math::quadrature::tanh_sinh;

tanh_sinh<double>& integrator() {
  thread_local tanh_sinh<double> instance;
  return instance;
}

// Integrates f over [a, b] as x in [0, b - a]; keeps tanh-sinh abscissas
// distinct from the endpoint when a is large relative to b - a.
template <class F>
double integrate_from_zero(F&& f, double a, double b) {
  const double width = b - a;
  if (!(width > 0.0)) return 0.0;
  return integrator().integrate([&](double x) { return f(a + x); }, 0.0, width);
}

double factorial(int k) { return std::tgamma(k + 1.0); }

}  // namespace

HermiteSpec::HermiteSpec(double hurst, int order) : hurst_(hurst), order_(order) {
  if (!(hurst > 0.5 && hurst < 1.0)) {
    throw ValidationError("Hurst index must lie in the open interval (1/2, 1), got " +
                          std::to_string(hurst));
  }
  if (order < 1) {
    throw ValidationError("Hermite order must be a positive integer, got " + std::to_string(order));
  }
}

double eval_kernel(const HermiteSpec& spec, double t, std::span<const double> v) {
  if (v.size() != static_cast<std::size_t>(spec.order())) {
    throw ValidationError("kernel argument has " + std::to_string(v.size()) +
                          " coordinates, Hermite order is " + std::to_string(spec.order()));
  }
  if (!(t >= 0.0)) {
    throw ValidationError("kernel time must be nonnegative");
  }
  const double g = spec.kernel_exponent();
  const double m = *std::max_element(v.begin(), v.end());
  const double lower = std::max(0.0, m);
  if (lower >= t) {
    return 0.0;
  }

  std::vector<double> rest;
  rest.reserve(v.size());
  for (double vj : v) {
    if (vj < m) rest.push_back(vj);
  }
  const double tied = static_cast<double>(v.size() - rest.size());
  const double e = tied * g;  // exponent of (s - m) in the integrand

  auto others = [&](double s) {
    double p = 1.0;
    for (double vj : rest) p *= std::pow(s - vj, g);
    return p;
  };

  if (e <= -1.0) {
    if (m >= 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    // Singular point lies left of 0; integrand is smooth on [0, t].
    auto f = [&](double s) { return std::pow(s - m, e) * others(s); };
    return integrate_from_zero(f, 0.0, t);
  }

  const double q = 1.0 + e;
  const double u0 = std::pow(lower - m, q);
  const double u1 = std::pow(t - m, q);
  if (rest.empty()) {
    return (u1 - u0) / q;
  }
  auto f = [&](double u) { return others(m + std::pow(u, 1.0 / q)) / q; };
  return integrate_from_zero(f, u0, u1);
}

namespace {

QuadratureResult l2_norm_sq_order1(const HermiteSpec& spec, double t, double rel_tol) {
  std::size_t evaluations = 0;
  auto k2 = [&](double v) {
    ++evaluations;
    const double x[1] = {v};
    const double k = eval_kernel(spec, t, x);
    return k * k;
  };
  const double tol = std::max(rel_tol * 1e-2, 1e-12);
  double err_inner = 0.0;
  double err_tail = 0.0;
  const double inner = integrator().integrate(k2, 0.0, t, tol, &err_inner);
  // (-inf, 0] mapped onto [0, 1) by v = -t y / (1 - y).
  auto tail = [&](double y) {
    const double one_minus = 1.0 - y;
    if (one_minus <= 0.0) return 0.0;
    return k2(-t * y / one_minus) * t / (one_minus * one_minus);
  };
  const double outer = integrator().integrate(tail, 0.0, 1.0, tol, &err_tail);

  QuadratureResult result;
  result.value = inner + outer;
  result.abs_error = (err_inner + err_tail) * result.value;
  result.samples = evaluations;
  result.converged = std::isfinite(result.value) && result.abs_error <= rel_tol * result.value;
  return result;
}

// t * BetaPrime(a, b): density on z > 0 proportional to z^(a-1) (1+z)^-(a+b).
struct BetaPrime {
  double a;
  double b;
  double log_beta;

  BetaPrime(double a_, double b_) : a(a_), b(b_) {
    log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  }

  double sample(double u) const {
    const double x = boost::math::ibeta_inv(a, b, u);
    return x / (1.0 - x);
  }

  double log_density(double z) const {
    return (a - 1.0) * std::log(z) - (a + b) * std::log1p(z) - log_beta;
  }
};

// Proposal over R^order restricted to {v_1 = max_j v_j}, in units of t:
// v_1 = t - w, v_k = v_1 - gap_k. The distance w follows (1 + w)^-2.
// Gaps are drawn from a mixture of
//   - independent BetaPrime(4g + 3, -2g - 1) gaps, matching K^2 near a pair
//     tie (|gap|^(4g+2)) and in the tails (|gap|^(2g)), and
//   - for order >= 3, a cluster component whose largest gap has density
//     ~ rho^(2H-2), matching K^2 ~ rho^(2H-order) where all coordinates
//     collapse onto the maximum.
class KernelProposal {
 public:
  explicit KernelProposal(const HermiteSpec& spec)
      : order_(spec.order()),
        pair_gap_(4.0 * spec.kernel_exponent() + 3.0, -2.0 * spec.kernel_exponent() - 1.0),
        cluster_radius_(2.0 * spec.hurst() - 1.0, -2.0 * spec.kernel_exponent() - 1.0) {}

  // `u_top` and `u_gap` are the stratified coordinates; `rng` supplies the rest.
  // Fills v (unit scale) and returns log q(v).
  double draw(double u_top, double u_gap, Engine& rng, std::vector<double>& v) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double w = u_top / (1.0 - u_top);
    v[0] = 1.0 - w;
    const double log_q_top = -2.0 * std::log1p(w);

    std::vector<double> gaps(static_cast<std::size_t>(order_ - 1));
    const bool mixture = order_ >= 3;
    if (!mixture || unif(rng) < 0.5) {
      for (std::size_t k = 0; k < gaps.size(); ++k) {
        gaps[k] = pair_gap_.sample(k == 0 ? u_gap : unif(rng));
      }
    } else {
      const double rho = cluster_radius_.sample(u_gap);
      const std::size_t pick = std::min(gaps.size() - 1,
                                        static_cast<std::size_t>(unif(rng) * gaps.size()));
      for (std::size_t k = 0; k < gaps.size(); ++k) {
        gaps[k] = k == pick ? rho : rho * unif(rng);
      }
    }
    // A gap below the resolution of v_1 would produce an exact tie; K^2 / q
    // is continuous there, so nudge it to the smallest representable gap.
    const double floor_gap = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(v[0]));
    for (std::size_t k = 0; k < gaps.size(); ++k) {
      gaps[k] = std::max(gaps[k], floor_gap);
      v[k + 1] = v[0] - gaps[k];
    }
    return log_q_top + log_gap_density(gaps);
  }

 private:
  double log_gap_density(const std::vector<double>& gaps) const {
    double log_pair = 0.0;
    for (double z : gaps) log_pair += pair_gap_.log_density(z);
    if (order_ < 3) return log_pair;
    const double rho = *std::max_element(gaps.begin(), gaps.end());
    const double dims = static_cast<double>(gaps.size());
    // Radius density spread uniformly over the face {max gap = rho}, whose
    // area is dims * rho^(dims - 1).
    const double log_cluster = cluster_radius_.log_density(rho) - std::log(dims) -
                               (dims - 1.0) * std::log(rho);
    const double hi = std::max(log_pair, log_cluster);
    return hi + std::log(0.5 * std::exp(log_pair - hi) + 0.5 * std::exp(log_cluster - hi));
  }

  int order_;
  BetaPrime pair_gap_;
  BetaPrime cluster_radius_;
};

QuadratureResult l2_norm_sq_mc(const HermiteSpec& spec, double t, const QuadConfig& config,
                               double rel_tol) {
  const int order = spec.order();
  const KernelProposal proposal(spec);
  const std::size_t replicates = std::max<std::size_t>(config.mc_replicates, 4);
  const double per_rep = static_cast<double>(config.mc_initial_samples) / replicates;
  std::size_t side = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(per_rep)));

  // Sampling in units of t makes K_t(t v) = t^(H - order/2) K_1(v); the
  // estimator still evaluates K_t directly.
  const double log_jacobian = order * std::log(t);

  QuadratureResult result;
  std::vector<double> unit(static_cast<std::size_t>(order));
  std::vector<double> v(static_cast<std::size_t>(order));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (std::uint64_t round = 0;; ++round) {
    std::vector<double> means(replicates, 0.0);
    for (std::size_t r = 0; r < replicates; ++r) {
      Engine rng = substream(config.seed, "kernel-l2", round * 4096 + r);
      double sum = 0.0;
      const double inv_side = 1.0 / static_cast<double>(side);
      // Stratified over (distance of the largest coordinate, first gap).
      for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
          const double u_top = (static_cast<double>(i) + unif(rng)) * inv_side;
          const double u_gap = (static_cast<double>(j) + unif(rng)) * inv_side;
          const double log_q = proposal.draw(u_top, u_gap, rng, unit) - log_jacobian;
          for (std::size_t k = 0; k < unit.size(); ++k) v[k] = t * unit[k];
          const double k_val = eval_kernel(spec, t, v);
          if (k_val > 0.0) {
            sum += std::exp(2.0 * std::log(k_val) - log_q);
          }
        }
      }
      means[r] = order * sum / static_cast<double>(side * side);
    }
    const double mean = std::accumulate(means.begin(), means.end(), 0.0) / replicates;
    double ss = 0.0;
    for (double m : means) ss += (m - mean) * (m - mean);
    const double se = std::sqrt(ss / static_cast<double>(replicates - 1) / replicates);

    result.value = mean;
    result.abs_error = 2.0 * se;
    result.samples += replicates * side * side;
    result.converged = std::isfinite(mean) && result.abs_error <= rel_tol * mean;
    const std::size_t next = side * 2;
    if (result.converged || replicates * next * next > config.mc_max_samples) {
      break;
    }
    side = next;
  }
  return result;
}

}  // namespace

QuadratureResult kernel_l2_norm_sq(const HermiteSpec& spec, double t, const QuadConfig& config) {
  if (!(t > 0.0)) {
    throw ValidationError("kernel L2 norm requires t > 0");
  }
  double rel_tol = config.rel_tol;
  if (rel_tol <= 0.0) {
    rel_tol = spec.order() == 1 ? 1e-6 : 1e-2;
  }
  if (spec.order() == 1) {
    return l2_norm_sq_order1(spec, t, rel_tol);
  }
  return l2_norm_sq_mc(spec, t, config, rel_tol);
}

KernelConstants normalizing_constant(const HermiteSpec& spec, const QuadConfig& config) {
  const double h = spec.hurst();
  const int order = spec.order();
  const double root_fact = std::sqrt(factorial(order));
  KernelConstants out;

  if (order <= 2) {
    // Gram identity: int K_1(v)^2 dv = B(g+1, -2g-1)^order / (H(2H-1)).
    const double g = spec.kernel_exponent();
    const double norm_sq = std::pow(boost::math::beta(g + 1.0, -2.0 * g - 1.0), order) /
                           (h * (2.0 * h - 1.0));
    out.l2_norm_at_1 = std::sqrt(norm_sq);
    out.closed_form = true;
    out.rel_error = 0.0;
  } else {
    const QuadratureResult q = kernel_l2_norm_sq(spec, 1.0, config);
    if (!q.converged) {
      throw NumericalError("kernel L2 norm did not converge within the sample budget (order " +
                           std::to_string(order) + ", relative error " +
                           std::to_string(q.rel_error()) + ")");
    }
    out.l2_norm_at_1 = std::sqrt(q.value);
    out.closed_form = false;
    out.rel_error = 0.5 * q.rel_error();
  }
  out.c_norm = 1.0 / (root_fact * out.l2_norm_at_1);
  out.d_const = out.l2_norm_at_1 / root_fact;
  return out;
}

double published_normalizing_constant(const HermiteSpec& spec) {
  const double h = spec.hurst();
  switch (spec.order()) {
    case 1:
      return std::sqrt(2.0 * h * std::tgamma(1.5 - h) /
                       (std::tgamma(0.5 + h) * std::tgamma(2.0 - 2.0 * h)));
    case 2:
      return std::tgamma(1.0 + h / 2.0) * std::sqrt(h / 2.0 * (2.0 * h - 1.0)) /
             (std::tgamma(h / 2.0) * std::tgamma(1.0 - h));
    default:
      throw ValidationError("published normalizing constants exist only for orders 1 and 2");
  }
}

double covariance(const HermiteSpec& spec, double s, double t) {
  if (s < 0.0 || t < 0.0) {
    throw ValidationError("covariance requires nonnegative times");
  }
  const double two_h = 2.0 * spec.hurst();
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

}  // namespace hermite
