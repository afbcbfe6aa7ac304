#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hermite/fgn.h"
#include "hermite/kernel.h"

namespace hermite {

enum class PathMethod { exact_fbm, invariance_principle, subordinated };

std::string_view to_string(PathMethod method);

/// A simulated trajectory on a uniform grid starting at t = 0 with value 0.
struct SamplePath {
  std::vector<double> times;
  std::vector<double> values;
  HermiteSpec spec;
  PathMethod method;
  std::uint64_t seed;

  std::size_t size() const { return values.size(); }
  double step() const { return times[1] - times[0]; }
  double horizon() const { return times.back(); }
};

struct GaussianSequence {
  std::vector<double> values;
  double hurst_prime;
  std::uint64_t seed;
  bool used_cholesky = false;
};

/// n draws of unit-variance fGn at `hurst_prime` from substream `index`.
GaussianSequence gen_fgn(double hurst_prime, std::size_t n, std::uint64_t seed,
                         std::uint64_t index = 0);

/// Probabilists' Hermite polynomial He_m(x) via He_{k+1} = x He_k - k He_{k-1}.
double hermite_polynomial(int m, double x);

/// Hurst index of the Gaussian sequence whose order-th Hermite transform has
/// the target memory: 2H' - 2 = (2H - 2) / order.
double base_hurst(const HermiteSpec& spec);

/// Reusable simulator for many paths on one grid. Paths are functions of
/// (seed, index) only.
///
/// Invariance-principle route: partial sums of He_order(xi_k) over fGn xi at
/// base_hurst(spec), scaled by the exact standard deviation of the sum of
/// `steps_per_unit` terms so that Var X(1) = 1.
/// Exact route (order 1 only): cumulative fGn scaled by (1/steps)^H.
class PathSimulator {
 public:
  PathSimulator(const HermiteSpec& spec, std::size_t steps_per_unit, double horizon,
                PathMethod method = PathMethod::invariance_principle);

  SamplePath draw(std::uint64_t seed, std::uint64_t index = 0);
  GaussianSequence draw_base(std::uint64_t seed, std::uint64_t index = 0);

  /// Path built from an explicit base sequence (length steps()).
  SamplePath from_base(const GaussianSequence& base) const;

  std::size_t steps() const { return steps_; }
  std::size_t steps_per_unit() const { return steps_per_unit_; }
  double partial_sum_sd() const { return sigma_n_; }
  const HermiteSpec& spec() const { return spec_; }

 private:
  HermiteSpec spec_;
  std::size_t steps_per_unit_;
  std::size_t steps_;
  PathMethod method_;
  double sigma_n_ = 1.0;
  FgnGenerator generator_;
};

/// sqrt(order! * sum_{|i|<n} (n - |i|) rho(i)^order), rho the fGn
/// autocovariance at base_hurst(spec).
double partial_sum_sd(const HermiteSpec& spec, std::size_t n);

SamplePath simulate_hermite_path(const HermiteSpec& spec, std::size_t steps_per_unit, double horizon,
                                 std::uint64_t seed, std::uint64_t index = 0);

SamplePath simulate_fbm_exact(double hurst, std::size_t steps_per_unit, double horizon,
                              std::uint64_t seed, std::uint64_t index = 0);

/// S(t) = X(t^(1/2H)) read off a driver path at the warped times of the
/// uniform grid k/steps_per_unit. The driver must reach horizon^(1/2H);
/// each warped time takes the nearest driver node.
SamplePath subordinate(const SamplePath& driver, std::size_t steps_per_unit, double horizon);

/// Simulates the driver at `oversample` times the resolution and subordinates it.
SamplePath subordinate(const HermiteSpec& spec, std::size_t steps_per_unit, double horizon,
                       std::uint64_t seed, std::uint64_t index = 0, std::size_t oversample = 8);

struct StratonovichConfig {
  double evaluation_point = 0.0;  // delta in [0, 1]
  std::size_t refinement = 0;     // number of coarse intervals; 0 = every driver interval
};

/// sum_k f((1-delta) t_k + delta t_{k+1}) (X(t_{k+1}) - X(t_k)) over a coarse
/// partition of the driver grid. `f` is sampled on the driver grid; each
/// evaluation point must be a driver node.
double stratonovich_integral(std::span<const double> f, const SamplePath& driver,
                             const StratonovichConfig& config = {});

struct SmoothFunction {
  std::function<double(double x, double t)> value;
  std::function<double(double x, double t)> dx;
  std::function<double(double x, double t)> dt;
};

/// |G(X(T),T) - G(X(0),0) - int dG/dx * dX - int dG/dt dt|, both integrals
/// by the same Riemann rule.
double chain_rule_residual(const SmoothFunction& g, const SamplePath& driver,
                           const StratonovichConfig& config = {});

}  // namespace hermite
