#pragma once

#include <cstdint>
#include <span>

namespace hermite {

/// Hurst index and Hermite order of a Hermite motion. Order 1 is fractional
/// Brownian motion, order 2 the Rosenblatt process.
class HermiteSpec {
 public:
  /// Throws ValidationError unless 1/2 < hurst < 1 and order >= 1.
  HermiteSpec(double hurst, int order);

  double hurst() const { return hurst_; }
  int order() const { return order_; }

  /// Exponent of each factor in the kernel integrand, (H-1)/order - 1/2.
  double kernel_exponent() const { return (hurst_ - 1.0) / order_ - 0.5; }

  bool operator==(const HermiteSpec&) const = default;

 private:
  double hurst_;
  int order_;
};

struct KernelConstants {
  double c_norm = 0.0;        // normalizing constant, E[X(1)^2] = 1
  double d_const = 0.0;       // ||K_1|| / sqrt(order!)
  double l2_norm_at_1 = 0.0;  // ||K_1|| in L2(R^order)
  double rel_error = 0.0;     // 0 for closed forms
  bool closed_form = true;
};

struct QuadConfig {
  double rel_tol = 0.0;  // 0 selects 1e-6 (order 1) or 1e-2 (order >= 2)
  std::size_t mc_initial_samples = 1 << 14;
  std::size_t mc_max_samples = 1 << 22;
  std::size_t mc_replicates = 16;
  std::uint64_t seed = 20141224;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t samples = 0;  // function evaluations (order 1) or MC draws
  bool converged = false;

  double rel_error() const { return value != 0.0 ? abs_error / value : abs_error; }
};

/// K_t(v) = int_0^t prod_j (s - v_j)_+^g ds, g = (H-1)/order - 1/2.
///
/// The integrable singularity at s = max_j v_j is removed by splitting the
/// range there and substituting u = (s - m)^(1 + p*g), where p is the number
/// of coordinates tied at the maximum. Ties at the maximum with p*g <= -1
/// inside [0, t] return +infinity (a measure-zero set).
double eval_kernel(const HermiteSpec& spec, double t, std::span<const double> v);

/// Squared L2 norm of K_t over R^order. Deterministic double-exponential
/// quadrature for order 1; stratified importance-sampled Monte Carlo for
/// order >= 2. Never throws on non-convergence: check `converged`.
QuadratureResult kernel_l2_norm_sq(const HermiteSpec& spec, double t, const QuadConfig& config = {});

/// Normalizing constants. Orders 1 and 2 use exact gamma-function forms
/// for the kernel above; higher orders go through kernel_l2_norm_sq and
/// throw NumericalError if it does not converge.
KernelConstants normalizing_constant(const HermiteSpec& spec, const QuadConfig& config = {});

/// The constants as usually printed in the literature:
///   order 1: sqrt(2H Gamma(3/2-H) / (Gamma(H+1/2) Gamma(2-2H)))
///   order 2: Gamma(1+H/2) sqrt(H(2H-1)/2) / (Gamma(H/2) Gamma(1-H))
/// The order-1 value normalizes the Mandelbrot-Van Ness kernel, which is
/// (H-1/2) K_t; it equals c_norm / (H-1/2). The order-2 value differs from
/// c_norm by Gamma(1+H/2)/Gamma(1-H/2). Throws ValidationError for order > 2.
double published_normalizing_constant(const HermiteSpec& spec);

/// E[X(s) X(t)] = (t^2H + s^2H - |t-s|^2H) / 2.
double covariance(const HermiteSpec& spec, double s, double t);

}  // namespace hermite
