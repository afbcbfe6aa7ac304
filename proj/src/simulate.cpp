#include "hermite/simulate.h"

#include <cmath>
#include <string>

#include "hermite/errors.h"

namespace hermite {

namespace {

std::size_t grid_steps(std::size_t steps_per_unit, double horizon) {
  if (steps_per_unit == 0) {
    throw ValidationError("steps per unit time must be positive");
  }
  if (!(horizon > 0.0)) {
    throw ValidationError("horizon must be positive");
  }
  const double raw = static_cast<double>(steps_per_unit) * horizon;
  const auto steps = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::max<std::size_t>(steps, 1);
}

std::vector<double> uniform_times(std::size_t steps, std::size_t steps_per_unit) {
  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    times[k] = static_cast<double>(k) / static_cast<double>(steps_per_unit);
  }
  return times;
}

double factorial(int k) { return std::tgamma(k + 1.0); }

}  // namespace

std::string_view to_string(PathMethod method) {
  switch (method) {
    case PathMethod::exact_fbm:
      return "exact_fbm";
    case PathMethod::invariance_principle:
      return "invariance_principle";
    case PathMethod::subordinated:
      return "subordinated";
  }
  return "unknown";
}

GaussianSequence gen_fgn(double hurst_prime, std::size_t n, std::uint64_t seed, std::uint64_t index) {
  FgnGenerator generator(hurst_prime, n);
  Engine rng = substream(seed, "fgn", index);
  return GaussianSequence{generator.draw(rng), hurst_prime, seed, generator.uses_cholesky()};
}

double hermite_polynomial(int m, double x) {
  if (m < 0) {
    throw ValidationError("Hermite polynomial degree must be nonnegative");
  }
  if (m == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < m; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double base_hurst(const HermiteSpec& spec) { return 1.0 + (spec.hurst() - 1.0) / spec.order(); }

double partial_sum_sd(const HermiteSpec& spec, std::size_t n) {
  const double hp = base_hurst(spec);
  double var = static_cast<double>(n);
  for (std::size_t i = 1; i < n; ++i) {
    const double rho = fgn_autocovariance(hp, static_cast<double>(i));
    var += 2.0 * static_cast<double>(n - i) * std::pow(rho, spec.order());
  }
  return std::sqrt(factorial(spec.order()) * var);
}

PathSimulator::PathSimulator(const HermiteSpec& spec, std::size_t steps_per_unit, double horizon,
                             PathMethod method)
    : spec_(spec),
      steps_per_unit_(steps_per_unit),
      steps_(grid_steps(steps_per_unit, horizon)),
      method_(method),
      generator_(method == PathMethod::exact_fbm ? spec.hurst() : base_hurst(spec),
                 std::max<std::size_t>(grid_steps(steps_per_unit, horizon), 2)) {
  if (method == PathMethod::subordinated) {
    throw ValidationError("use subordinate() for subordinated paths");
  }
  if (method == PathMethod::exact_fbm) {
    if (spec.order() != 1) {
      throw ValidationError("exact simulation is available for order 1 only");
    }
  } else {
    sigma_n_ = hermite::partial_sum_sd(spec, steps_per_unit);
  }
}

GaussianSequence PathSimulator::draw_base(std::uint64_t seed, std::uint64_t index) {
  Engine rng = substream(seed, "hermite-path", index);
  std::vector<double> xi = generator_.draw(rng);
  xi.resize(steps_);
  return GaussianSequence{std::move(xi), generator_.hurst(), seed, generator_.uses_cholesky()};
}

SamplePath PathSimulator::from_base(const GaussianSequence& base) const {
  if (base.values.size() < steps_) {
    throw ValidationError("base sequence shorter than the simulation grid");
  }
  SamplePath path{uniform_times(steps_, steps_per_unit_), std::vector<double>(steps_ + 1, 0.0), spec_,
                  method_, base.seed};
  double acc = 0.0;
  if (method_ == PathMethod::exact_fbm) {
    const double scale = std::pow(1.0 / static_cast<double>(steps_per_unit_), spec_.hurst());
    for (std::size_t k = 0; k < steps_; ++k) {
      acc += base.values[k];
      path.values[k + 1] = scale * acc;
    }
  } else {
    const double inv_sigma = 1.0 / sigma_n_;
    for (std::size_t k = 0; k < steps_; ++k) {
      acc += hermite_polynomial(spec_.order(), base.values[k]);
      path.values[k + 1] = inv_sigma * acc;
    }
  }
  return path;
}

SamplePath PathSimulator::draw(std::uint64_t seed, std::uint64_t index) {
  return from_base(draw_base(seed, index));
}

SamplePath simulate_hermite_path(const HermiteSpec& spec, std::size_t steps_per_unit, double horizon,
                                 std::uint64_t seed, std::uint64_t index) {
  PathSimulator sim(spec, steps_per_unit, horizon, PathMethod::invariance_principle);
  return sim.draw(seed, index);
}

SamplePath simulate_fbm_exact(double hurst, std::size_t steps_per_unit, double horizon,
                              std::uint64_t seed, std::uint64_t index) {
  PathSimulator sim(HermiteSpec(hurst, 1), steps_per_unit, horizon, PathMethod::exact_fbm);
  return sim.draw(seed, index);
}

SamplePath subordinate(const SamplePath& driver, std::size_t steps_per_unit, double horizon) {
  const std::size_t steps = grid_steps(steps_per_unit, horizon);
  const double inv_two_h = 1.0 / (2.0 * driver.spec.hurst());
  const double dtau = driver.step();
  std::vector<double> times = uniform_times(steps, steps_per_unit);
  std::vector<double> values(steps + 1, 0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double tau = std::pow(times[k], inv_two_h);
    const auto idx = static_cast<std::size_t>(std::llround(tau / dtau));
    if (idx >= driver.size()) {
      throw ValidationError("driver path ends before the warped horizon " + std::to_string(tau));
    }
    values[k] = driver.values[idx];
  }
  return SamplePath{std::move(times), std::move(values), driver.spec, PathMethod::subordinated,
                    driver.seed};
}

SamplePath subordinate(const HermiteSpec& spec, std::size_t steps_per_unit, double horizon,
                       std::uint64_t seed, std::uint64_t index, std::size_t oversample) {
  const double warped_horizon = std::pow(horizon, 1.0 / (2.0 * spec.hurst()));
  const PathMethod method =
      spec.order() == 1 ? PathMethod::exact_fbm : PathMethod::invariance_principle;
  // Half a driver step of slack so the last warped time rounds inside.
  const std::size_t fine = steps_per_unit * std::max<std::size_t>(oversample, 1);
  PathSimulator sim(spec, fine, warped_horizon + 0.5 / static_cast<double>(fine), method);
  return subordinate(sim.draw(seed, index), steps_per_unit, horizon);
}

double stratonovich_integral(std::span<const double> f, const SamplePath& driver,
                             const StratonovichConfig& config) {
  const std::size_t intervals = driver.size() - 1;
  if (f.size() != driver.size()) {
    throw ValidationError("integrand has " + std::to_string(f.size()) + " samples, driver has " +
                          std::to_string(driver.size()));
  }
  const double delta = config.evaluation_point;
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw ValidationError("evaluation point must lie in [0, 1]");
  }
  const std::size_t coarse = config.refinement == 0 ? intervals : config.refinement;
  if (coarse == 0 || intervals % coarse != 0) {
    throw ValidationError("refinement " + std::to_string(coarse) +
                          " does not divide the driver grid of " + std::to_string(intervals) +
                          " intervals");
  }
  const std::size_t stride = intervals / coarse;
  const double raw_offset = delta * static_cast<double>(stride);
  const auto offset = static_cast<std::size_t>(std::llround(raw_offset));
  if (std::abs(raw_offset - static_cast<double>(offset)) > 1e-9) {
    throw ValidationError("evaluation point does not fall on a driver node at this refinement");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < coarse; ++k) {
    const std::size_t left = k * stride;
    sum += f[left + offset] * (driver.values[left + stride] - driver.values[left]);
  }
  return sum;
}

double chain_rule_residual(const SmoothFunction& g, const SamplePath& driver,
                           const StratonovichConfig& config) {
  const std::size_t n = driver.size();
  std::vector<double> fx(n);
  std::vector<double> ft(n);
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = g.dx(driver.values[i], driver.times[i]);
    ft[i] = g.dt(driver.values[i], driver.times[i]);
  }
  const double space = stratonovich_integral(fx, driver, config);
  // Same Riemann rule against the clock t.
  SamplePath clock = driver;
  clock.values = driver.times;
  const double time = stratonovich_integral(ft, clock, config);
  const double lhs = g.value(driver.values.back(), driver.times.back()) -
                     g.value(driver.values.front(), driver.times.front());
  return std::abs(lhs - space - time);
}

}  // namespace hermite
