#include "cli.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "hermite/errors.h"
#include "hermite/io.h"
#include "hermite/kernel.h"
#include "hermite/market.h"
#include "hermite/pricing.h"
#include "hermite/simulate.h"
#include "hermite/stats.h"

namespace hermite::cli {

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
};

// Resolved parameters of one run. The digest covers the command, every
// resolved parameter and the config text, but not the output location.
class Run {
 public:
  Run(std::string command, const CommonOptions& common) : command_(std::move(command)), common_(common) {
    if (!common.config_path.empty()) config_ = load_config(common.config_path);
  }

  const RunConfig& config() const { return config_; }

  template <typename T>
  T resolve(const std::string& name, const std::optional<T>& flag, const std::optional<T>& from_config,
            std::optional<T> fallback = std::nullopt) {
    std::optional<T> v = flag ? flag : from_config ? from_config : fallback;
    if (!v) {
      throw ValidationError("missing --" + name + " (no default and not set in the config)");
    }
    record(name, *v);
    return *v;
  }

  template <typename T>
  void record(const std::string& name, const T& value) {
    std::ostringstream s;
    if constexpr (std::is_floating_point_v<T>) {
      s << format_double(value);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      for (double x : value) s << format_double(x) << ' ';
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      for (auto x : value) s << x << ' ';
    } else {
      s << value;
    }
    params_[name] = s.str();
  }

  std::uint64_t seed() {
    if (!seed_) seed_ = resolve<std::uint64_t>("seed", common_.seed, config_.seed, 1);
    return *seed_;
  }

  HermiteSpec spec(const std::optional<double>& hurst, const std::optional<int>& order) {
    const double h = resolve<double>("hurst", hurst, config_.hurst);
    const int k = resolve<int>("order", order, config_.order, 1);
    return HermiteSpec(h, k);
  }

  MarketSpec market() {
    if (common_.config_path.empty()) throw ValidationError("this command needs --config with a market description");
    return config_.market();
  }

  OutputSink& sink() {
    if (!sink_) {
      std::string canonical = "command=" + command_ + "\n";
      for (const auto& [k, v] : params_) canonical += k + "=" + v + "\n";
      canonical += "config:\n" + config_.text;
      sink_ = std::make_unique<OutputSink>(output_directory(), command_, sha256_hex(canonical), seed());
    }
    return *sink_;
  }

  void finish(std::ostream& out) {
    sink().finish();
    out << command_ << ": wrote " << sink_->files().size() << " file(s) to " << sink_->directory().string() << "\n";
  }

 private:
  std::filesystem::path output_directory() const {
    if (!common_.output.empty()) return common_.output;
    if (config_.output_directory) return *config_.output_directory;
    if (const char* env = std::getenv("HERMITE_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
    return "hermite-out";
  }

  std::string command_;
  CommonOptions common_;
  RunConfig config_;
  std::map<std::string, std::string> params_;
  std::optional<std::uint64_t> seed_;
  std::unique_ptr<OutputSink> sink_;
};

void add_common(CLI::App* app, CommonOptions& c) {
  app->add_option("--config", c.config_path, "Run configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Root random seed");
  app->add_option("--output", c.output, "Output directory (default: config, then $HERMITE_OUTPUT_DIR)");
}

PathMethod parse_method(const std::string& name, const HermiteSpec& spec) {
  if (name == "auto") return spec.order() == 1 ? PathMethod::exact_fbm : PathMethod::invariance_principle;
  if (name == "exact") return PathMethod::exact_fbm;
  if (name == "invariance") return PathMethod::invariance_principle;
  throw ValidationError("unknown --method '" + name + "' (use auto, exact or invariance)");
}

json estimate_json(const MonteCarloEstimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}};
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::optional<double> hurst;
  std::optional<int> order;
  std::optional<std::size_t> steps;
  std::optional<double> horizon;
  std::optional<std::size_t> paths;
  std::string method = "auto";
};

void cmd_simulate(const CommonOptions& common, const SimulateOptions& o, std::ostream& out) {
  Run run("simulate", common);
  const HermiteSpec spec = run.spec(o.hurst, o.order);
  const auto steps = run.resolve<std::size_t>("steps", o.steps, run.config().steps, 1024);
  const double horizon = run.resolve<double>("horizon", o.horizon, run.config().horizon, 1.0);
  const auto paths = run.resolve<std::size_t>("paths", o.paths, run.config().paths, 10);
  const PathMethod method = parse_method(o.method, spec);
  run.record("method", std::string(to_string(method)));
  const std::uint64_t seed = run.seed();
  if (paths == 0) throw ValidationError("--paths must be positive");

  PathSimulator sim(spec, steps, horizon, method);
  const double t_ref = std::min(1.0, horizon);
  const std::size_t ref = static_cast<std::size_t>(std::llround(t_ref * static_cast<double>(steps)));
  std::vector<double> squares;
  OutputSink& sink = run.sink();
  for (std::size_t k = 0; k < paths; ++k) {
    const SamplePath p = sim.draw(seed, k);
    Table t{{"t", "value"}, {}};
    for (std::size_t i = 0; i < p.size(); ++i) t.rows.push_back({p.times[i], p.values[i]});
    sink.write_csv("path_" + std::to_string(k) + ".csv", t);
    squares.push_back(p.values[ref] * p.values[ref]);
  }
  MonteCarloEstimate var;
  var.samples = squares.size();
  for (double s : squares) var.value += s;
  var.value /= static_cast<double>(squares.size());
  if (squares.size() > 1) {
    double ss = 0.0;
    for (double s : squares) ss += (s - var.value) * (s - var.value);
    var.std_error = std::sqrt(ss / static_cast<double>(squares.size() - 1) / static_cast<double>(squares.size()));
  }
  const double t_node = static_cast<double>(ref) / static_cast<double>(steps);
  json summary = {{"command", "simulate"},
                  {"hurst", spec.hurst()},
                  {"order", spec.order()},
                  {"method", std::string(to_string(method))},
                  {"steps_per_unit", steps},
                  {"horizon", horizon},
                  {"paths", paths},
                  {"variance_time", t_node},
                  {"variance", estimate_json(var)},
                  {"variance_expected", std::pow(t_node, 2.0 * spec.hurst())}};
  sink.write_json("summary.json", summary);
  run.finish(out);
}

// ------------------------------------------------------------------ kernel

struct KernelOptions {
  std::optional<double> hurst;
  std::optional<int> order;
  double t = 1.0;
};

void cmd_kernel(const CommonOptions& common, const KernelOptions& o, std::ostream& out) {
  Run run("kernel", common);
  const HermiteSpec spec = run.spec(o.hurst, o.order);
  run.record("t", o.t);
  if (!(o.t > 0.0)) throw ValidationError("--t must be positive");
  QuadConfig q;
  q.seed = run.seed();
  const QuadratureResult norm = kernel_l2_norm_sq(spec, o.t, q);
  const KernelConstants c = normalizing_constant(spec, q);
  json j = {{"command", "kernel"},
            {"hurst", spec.hurst()},
            {"order", spec.order()},
            {"t", o.t},
            {"norm_sq", norm.value},
            {"norm_sq_abs_error", norm.abs_error},
            {"norm_sq_converged", norm.converged},
            {"normalizing_constant", c.c_norm},
            {"rate_constant", c.d_const},
            {"norm_at_1", c.l2_norm_at_1},
            {"closed_form", c.closed_form}};
  if (spec.order() <= 2) j["published_constant"] = published_normalizing_constant(spec);
  run.sink().write_json("kernel.json", j);
  run.finish(out);
}

// ---------------------------------------------------------------- estimate

struct EstimateOptions {
  std::optional<double> hurst;
  std::optional<int> order;
  std::optional<std::size_t> steps;
  std::optional<double> horizon;
  std::string input;
};

SamplePath read_path_csv(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open --input " + file);
  std::string line;
  std::getline(in, line);
  if (line.rfind("t,value", 0) != 0) throw ValidationError(file + ":1: expected header 't,value'");
  SamplePath p{{}, {}, HermiteSpec(0.75, 1), PathMethod::exact_fbm, 0};
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("");
      p.times.push_back(std::stod(line.substr(0, comma)));
      p.values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ValidationError(file + ":" + std::to_string(number) + ": expected 't,value'");
    }
  }
  if (p.times.size() < 2) throw ValidationError(file + ": need at least two rows");
  const double h = p.times[1] - p.times[0];
  for (std::size_t i = 1; i < p.times.size(); ++i) {
    if (std::abs(p.times[i] - p.times[i - 1] - h) > 1e-9 * std::max(1.0, p.times[i])) {
      throw ValidationError(file + ": times must be uniformly spaced");
    }
  }
  return p;
}

void cmd_estimate(const CommonOptions& common, const EstimateOptions& o, std::ostream& out) {
  Run run("estimate", common);
  SamplePath path{{}, {}, HermiteSpec(0.75, 1), PathMethod::exact_fbm, 0};
  if (!o.input.empty()) {
    path = read_path_csv(o.input);
    std::ifstream in(o.input, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    run.record("input_sha256", sha256_hex(buf.str()));
  } else {
    const HermiteSpec spec = run.spec(o.hurst, o.order);
    const auto steps = run.resolve<std::size_t>("steps", o.steps, run.config().steps, 1 << 14);
    const double horizon = run.resolve<double>("horizon", o.horizon, run.config().horizon, 1.0);
    PathSimulator sim(spec, steps, horizon, parse_method("auto", spec));
    path = sim.draw(run.seed());
  }
  const auto scales = default_hurst_scales(path.size() - 1);
  const HurstEstimate e = estimate_hurst(path, scales);
  json j = {{"command", "estimate"},
            {"h_hat", e.h_hat},
            {"std_error", e.std_error},
            {"scales", e.scales_used},
            {"points", path.size()}};
  if (e.warning) j["warning"] = *e.warning;
  run.sink().write_json("estimate.json", j);
  run.finish(out);
}

// ---------------------------------------------------------------------- qv

struct QvOptions {
  std::optional<double> hurst;
  std::optional<int> order;
  std::optional<std::size_t> paths;
  std::vector<std::size_t> n_list{256, 512, 1024, 2048, 4096};
  double block = 1.0;
  std::size_t substeps = 4;
};

void cmd_qv(const CommonOptions& common, const QvOptions& o, std::ostream& out) {
  Run run("qv", common);
  const HermiteSpec spec = run.spec(o.hurst, o.order);
  const auto paths = run.resolve<std::size_t>("paths", o.paths, run.config().paths, 200);
  run.record("n_list", o.n_list);
  run.record("block", o.block);
  run.record("substeps", o.substeps);
  QVConfig cfg;
  cfg.mc_paths = paths;
  cfg.substeps = o.substeps;
  const ScalingFit fit = qv_scaling_exponent(spec, o.n_list, o.block, run.seed(), cfg);
  Table t{{"logN", "log_delta"}, {}};
  for (std::size_t i = 0; i < fit.log_n.size(); ++i) t.rows.push_back({fit.log_n[i], fit.log_delta[i]});
  OutputSink& sink = run.sink();
  sink.write_csv("scaling.csv", t);
  sink.write_json("fit.json", {{"command", "qv"},
                               {"hurst", spec.hurst()},
                               {"order", spec.order()},
                               {"slope", fit.fit.slope},
                               {"slope_std_error", fit.fit.slope_std_error},
                               {"intercept", fit.fit.intercept},
                               {"regime_exponent", qv_regime_exponent(spec)},
                               {"mc_paths", paths}});
  run.finish(out);
}

// ------------------------------------------------------------------- price

struct BondOptions {
  double t = 0.0;
  double T = 1.0;
};

void cmd_bond(const CommonOptions& common, const BondOptions& o, std::ostream& out) {
  Run run("price bond", common);
  const MarketSpec m = run.market();
  run.record("t", o.t);
  run.record("T", o.T);
  const double discount = bond_price(m, o.t, o.T);
  run.sink().write_json("bond.json", {{"command", "price bond"},
                                      {"t", o.t},
                                      {"T", o.T},
                                      {"discount", discount},
                                      {"rate", instantaneous_rate(m, m.riskless(), o.T)}});
  run.finish(out);
}

struct PerpetualOptions {
  std::vector<double> alpha;
  std::vector<double> x;
  double t = 0.0;
  double T = 1.0;
  std::size_t nx = 0;
  std::size_t nt = 0;
  double x_min = 0.0;
  double x_max = 0.0;
};

void cmd_perpetual(const CommonOptions& common, const PerpetualOptions& o, std::ostream& out) {
  Run run("price perpetual", common);
  const MarketSpec m = run.market();
  const std::vector<double> alpha = o.alpha.empty() ? std::vector<double>(m.assets(), 1.0) : o.alpha;
  const std::vector<double> x = o.x.empty() ? m.initial_prices() : o.x;
  if (alpha.size() != m.assets() || x.size() != m.assets()) {
    throw ValidationError("--alpha and --x need one entry per asset (" + std::to_string(m.assets()) + ")");
  }
  run.record("alpha", alpha);
  run.record("x", x);
  run.record("t", o.t);
  run.record("T", o.T);
  run.record("nx", o.nx);
  run.record("nt", o.nt);
  const Payoff payoff = Payoff::power_product(alpha);
  const PowerBeta beta = power_derivative_beta(alpha, m);
  const PricingFunction field = power_derivative_field(alpha, beta.beta, m);
  const SamplePoint point{o.t, x};
  const double residual = perpetual_pde_residual(field, m, std::span<const SamplePoint>(&point, 1))[0];
  json j = {{"command", "price perpetual"},
            {"alpha", alpha},
            {"x", x},
            {"t", o.t},
            {"T", o.T},
            {"value", price_characteristics(payoff, m, o.t, o.T, x)},
            {"beta", beta.beta(o.t)},
            {"beta_time_invariant", beta.time_invariant},
            {"admissible_field_value", field.value(o.t, x)},
            {"admissible_field_residual", residual}};
  OutputSink& sink = run.sink();
  if (o.nx > 0) {
    if (m.assets() != 1) throw ValidationError("the finite-difference grid supports one asset");
    PricingGrid g;
    g.nx = o.nx;
    g.nt = o.nt > 0 ? o.nt : o.nx;
    g.x_min = o.x_min > 0.0 ? o.x_min : 0.5 * m.initial_prices()[0];
    g.x_max = o.x_max > 0.0 ? o.x_max : 2.0 * m.initial_prices()[0];
    g.t0 = o.t;
    g.T = o.T;
    run.record("x_min", g.x_min);
    run.record("x_max", g.x_max);
    const PricingField f = price_fd(payoff, m, g);
    Table t{{"t"}, {}};
    for (double xi : f.xs) t.columns.push_back(format_double(xi));
    for (std::size_t n = 0; n < f.ts.size(); ++n) {
      std::vector<double> row{f.ts[n]};
      row.insert(row.end(), f.values[n].begin(), f.values[n].end());
      t.rows.push_back(std::move(row));
    }
    double sup = 0.0;
    for (std::size_t n = 0; n < f.ts.size(); ++n) {
      for (std::size_t i = 0; i < f.xs.size(); ++i) {
        const double exact = price_characteristics(payoff, m, f.ts[n], g.T, std::span<const double>(&f.xs[i], 1));
        sup = std::max(sup, std::abs(exact - f.values[n][i]));
      }
    }
    j["fd_sup_error"] = sup;
    j["fd_substeps"] = f.substeps;
    sink.write_csv("field.csv", t);
  }
  sink.write_json("perpetual.json", j);
  run.finish(out);
}

struct ForwardOptions {
  double t = 0.0;
  double T = 1.0;
  std::optional<double> u;
  std::size_t asset = 1;
  std::optional<std::size_t> steps;
  std::optional<double> horizon;
};

void cmd_forward(const CommonOptions& common, const ForwardOptions& o, std::ostream& out) {
  Run run("price forward", common);
  const MarketSpec m = run.market();
  const double u = o.u.value_or(o.T);
  run.record("t", o.t);
  run.record("T", o.T);
  run.record("u", u);
  run.record("asset", o.asset);
  const auto steps = run.resolve<std::size_t>("steps", o.steps, run.config().steps, 256);
  const double horizon = run.resolve<double>("horizon", o.horizon, run.config().horizon, std::max({1.0, o.T, u}));
  if (o.asset < 1 || o.asset > m.assets()) throw ValidationError("--asset must be between 1 and the number of assets");
  if (!m.volatility().is_constant()) throw ValidationError("forward pricing needs a constant volatility");
  if (u > horizon) throw ValidationError("--u lies beyond the simulated horizon");
  const std::uint64_t seed = run.seed();
  std::vector<SamplePath> drivers;
  for (std::size_t j = 0; j < m.assets(); ++j) {
    drivers.push_back(simulate_hermite_path(m.spec(), steps, horizon, seed, j));
  }
  const PricePath stock = stock_paths(m, drivers)[o.asset - 1];
  const double value = forward_value(m, stock, o.t, o.T, u);
  const double portfolio = forward_portfolio_value(m, stock, o.t, o.T, u);
  Table t{{"t", "stock", "value"}, {}};
  for (std::size_t i = 0; i < stock.times.size(); ++i) {
    if (stock.times[i] < o.t - 1e-12) continue;
    t.rows.push_back({stock.times[i], stock.values[i], forward_value(m, stock, o.t, o.T, stock.times[i])});
  }
  OutputSink& sink = run.sink();
  sink.write_csv("forward.csv", t);
  const std::vector<double> at{o.t, u};
  sink.write_json("forward.json", {{"command", "price forward"},
                                   {"t", o.t},
                                   {"T", o.T},
                                   {"u", u},
                                   {"forward_price", forward_price(m, t.rows.front()[1], o.t, o.T)},
                                   {"value", value},
                                   {"portfolio_value", portfolio}});
  run.finish(out);
}

struct FuturesOptions {
  std::size_t nx = 256;
  std::size_t nt = 256;
  double horizon = 1.0;
  double x_min = 0.0;
  double x_max = 2.0;
  std::vector<double> profile{1.0, 0.5};
  std::string path = "sine";
  double amplitude = 0.3;
};

void cmd_futures(const CommonOptions& common, const FuturesOptions& o, std::ostream& out) {
  Run run("price futures", common);
  const MarketSpec m = run.market();
  run.record("nx", o.nx);
  run.record("nt", o.nt);
  run.record("horizon", o.horizon);
  run.record("x_min", o.x_min);
  run.record("x_max", o.x_max);
  run.record("profile", o.profile);
  run.record("path", o.path);
  run.record("amplitude", o.amplitude);
  if (o.profile.size() != 2) throw ValidationError("--profile takes two numbers a,b for psi(x,0) = a + b x");
  if (o.nt == 0) throw ValidationError("--nt must be positive");
  const double center = 0.5 * (o.x_min + o.x_max);
  std::vector<double> path(o.nt + 1);
  if (o.path == "sine") {
    for (std::size_t n = 0; n <= o.nt; ++n) {
      const double t = o.horizon * static_cast<double>(n) / static_cast<double>(o.nt);
      path[n] = center + o.amplitude * std::sin(3.0 * t);
    }
  } else if (o.path == "hermite") {
    // Unit-horizon draw rescaled by self-similarity onto [0, horizon].
    const SamplePath x = simulate_hermite_path(m.spec(), o.nt, 1.0, run.seed());
    const double scale = std::pow(o.horizon, m.spec().hurst());
    for (std::size_t n = 0; n <= o.nt; ++n) path[n] = center + o.amplitude * scale * x.values[n];
  } else {
    throw ValidationError("unknown --path '" + o.path + "' (use sine or hermite)");
  }
  FuturesGrid g;
  g.nx = o.nx;
  g.nt = o.nt;
  g.horizon = o.horizon;
  g.x_min = o.x_min;
  g.x_max = o.x_max;
  const double a = o.profile[0];
  const double b = o.profile[1];
  const FuturesField f = futures_march([a, b](double x) { return a + b * x; }, path, m, g);
  Table t{{"t", "x", "psi", "integral", "residual"}, {}};
  const double dx = f.xs[1] - f.xs[0];
  for (std::size_t n = 0; n < f.ts.size(); ++n) {
    const double pos = std::clamp((f.path[n] - f.xs.front()) / dx, 0.0, static_cast<double>(f.xs.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(pos), f.xs.size() - 2);
    const double w = pos - static_cast<double>(i);
    const double psi = f.psi[n][i] + w * (f.psi[n][i + 1] - f.psi[n][i]);
    t.rows.push_back({f.ts[n], f.path[n], psi, f.integral[n], f.residual[n]});
  }
  OutputSink& sink = run.sink();
  sink.write_csv("futures.csv", t);
  sink.write_json("futures.json", {{"command", "price futures"},
                                   {"residual_sup", f.residual_sup},
                                   {"integral_at_horizon", f.integral.back()},
                                   {"psi_at_horizon", t.rows.back()[2]},
                                   {"nx", o.nx},
                                   {"nt", o.nt}});
  run.finish(out);
}

// ------------------------------------------------------------------- curve

struct CurveOptions {
  double anchor = 0.0;
  std::vector<double> maturities{0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0};
};

void cmd_curve(const CommonOptions& common, const CurveOptions& o, std::ostream& out) {
  Run run("curve", common);
  const MarketSpec m = run.market();
  run.record("anchor", o.anchor);
  run.record("maturities", o.maturities);
  const std::vector<double> anchors{o.anchor};
  const TermStructure ts = term_structure(m, anchors, o.maturities);
  Table t{{"T", "discount", "rate"}, {}};
  json points = json::array();
  for (std::size_t k = 0; k < ts.maturities.size(); ++k) {
    if (ts.maturities[k] < o.anchor) continue;
    t.rows.push_back({ts.maturities[k], ts.discount[0][k], ts.rates[k]});
    points.push_back(
        {{"t", o.anchor}, {"T", ts.maturities[k]}, {"discount", ts.discount[0][k]}, {"rate", ts.rates[k]}});
  }
  OutputSink& sink = run.sink();
  if (sink.write_csv("curve.csv", t)) sink.write_json("curve.json", {{"command", "curve"}, {"points", points}});
  run.finish(out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Hermite fractional markets: simulation, statistics and pricing"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonOptions common;
  std::function<void()> action;

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Simulate Hermite motion paths");
  add_common(s, common);
  s->add_option("--hurst", sim.hurst, "Hurst index in (1/2, 1)");
  s->add_option("--order", sim.order, "Hermite order (1 = fBm, 2 = Rosenblatt)");
  s->add_option("--steps", sim.steps, "Grid steps per unit time");
  s->add_option("--horizon", sim.horizon, "Time horizon");
  s->add_option("--paths", sim.paths, "Number of paths");
  s->add_option("--method", sim.method, "auto, exact or invariance");
  s->callback([&] { action = [&] { cmd_simulate(common, sim, out); }; });

  KernelOptions ker;
  auto* k = app.add_subcommand("kernel", "Kernel norm and normalizing constants");
  add_common(k, common);
  k->add_option("--hurst", ker.hurst, "Hurst index in (1/2, 1)");
  k->add_option("--order", ker.order, "Hermite order");
  k->add_option("--t", ker.t, "Time at which to evaluate ||K_t||^2");
  k->callback([&] { action = [&] { cmd_kernel(common, ker, out); }; });

  EstimateOptions est;
  auto* e = app.add_subcommand("estimate", "Estimate the Hurst index of a path");
  add_common(e, common);
  e->add_option("--input", est.input, "CSV path with header t,value (otherwise a simulated path)");
  e->add_option("--hurst", est.hurst, "Hurst index of the simulated path");
  e->add_option("--order", est.order, "Hermite order of the simulated path");
  e->add_option("--steps", est.steps, "Grid steps per unit time of the simulated path");
  e->add_option("--horizon", est.horizon, "Horizon of the simulated path");
  e->callback([&] { action = [&] { cmd_estimate(common, est, out); }; });

  QvOptions qv;
  auto* q = app.add_subcommand("qv", "Scaling of the centered quadratic variation");
  add_common(q, common);
  q->add_option("--hurst", qv.hurst, "Hurst index in (1/2, 1)");
  q->add_option("--order", qv.order, "Hermite order");
  q->add_option("--paths", qv.paths, "Monte Carlo paths per N");
  q->add_option("--n-list", qv.n_list, "Block counts N")->delimiter(',');
  q->add_option("--block", qv.block, "Block length");
  q->add_option("--substeps", qv.substeps, "Grid steps per block");
  q->callback([&] { action = [&] { cmd_qv(common, qv, out); }; });

  auto* price = app.add_subcommand("price", "Price bonds, perpetual derivatives, forwards and futures");
  price->require_subcommand(1);

  BondOptions bond;
  auto* pb = price->add_subcommand("bond", "Zero-coupon bond");
  add_common(pb, common);
  pb->add_option("--t", bond.t, "Valuation time");
  pb->add_option("--T", bond.T, "Maturity");
  pb->callback([&] { action = [&] { cmd_bond(common, bond, out); }; });

  PerpetualOptions perp;
  auto* pp = price->add_subcommand("perpetual", "Power payoff prod x_j^alpha_j read at time T");
  add_common(pp, common);
  pp->add_option("--alpha", perp.alpha, "Exponents, one per asset")->delimiter(',');
  pp->add_option("--x", perp.x, "Prices at the valuation time")->delimiter(',');
  pp->add_option("--t", perp.t, "Valuation time");
  pp->add_option("--T", perp.T, "Time at which the payoff is read");
  pp->add_option("--nx", perp.nx, "Finite-difference price intervals (0 = skip)");
  pp->add_option("--nt", perp.nt, "Finite-difference time intervals (default nx)");
  pp->add_option("--x-min", perp.x_min, "Lower price of the grid");
  pp->add_option("--x-max", perp.x_max, "Upper price of the grid");
  pp->callback([&] { action = [&] { cmd_perpetual(common, perp, out); }; });

  ForwardOptions fwd;
  auto* pf = price->add_subcommand("forward", "Forward contract on a simulated stock path");
  add_common(pf, common);
  pf->add_option("--t", fwd.t, "Inception time");
  pf->add_option("--T", fwd.T, "Delivery time");
  pf->add_option("--u", fwd.u, "Valuation time (default T)");
  pf->add_option("--asset", fwd.asset, "Asset number, from 1");
  pf->add_option("--steps", fwd.steps, "Grid steps per unit time");
  pf->add_option("--horizon", fwd.horizon, "Simulated horizon");
  pf->callback([&] { action = [&] { cmd_forward(common, fwd, out); }; });

  FuturesOptions fut;
  auto* pu = price->add_subcommand("futures", "March the futures payoff equation along a path");
  add_common(pu, common);
  pu->add_option("--nx", fut.nx, "Intervals in x");
  pu->add_option("--nt", fut.nt, "Intervals in t");
  pu->add_option("--horizon", fut.horizon, "Final time");
  pu->add_option("--x-min", fut.x_min, "Lower end of the x domain");
  pu->add_option("--x-max", fut.x_max, "Upper end of the x domain");
  pu->add_option("--profile", fut.profile, "Initial profile a,b for psi(x,0) = a + b x")->delimiter(',');
  pu->add_option("--path", fut.path, "Underlying path: sine or hermite");
  pu->add_option("--amplitude", fut.amplitude, "Amplitude of the path around the domain center");
  pu->callback([&] { action = [&] { cmd_futures(common, fut, out); }; });

  CurveOptions curve;
  auto* c = app.add_subcommand("curve", "Discount curve and instantaneous rates");
  add_common(c, common);
  c->add_option("--anchor", curve.anchor, "Valuation time t");
  c->add_option("--maturities", curve.maturities, "Maturities T")->delimiter(',');
  c->callback([&] { action = [&] { cmd_curve(common, curve, out); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) {
      app.exit(ex, out, err);
      return kOk;
    }
    err << "error: " << ex.what() << "\n";
    return kValidationFailure;
  }

  int status = kOk;
  try {
    action();
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    status = kValidationFailure;
  } catch (const NumericalError& ex) {
    err << "numerical failure: " << ex.what() << "\n";
    status = kNumericalFailure;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    status = kNumericalFailure;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  err << "wall time " << seconds << " s\n";
  return status;
}

}  // namespace hermite::cli
