#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hermite/market.h"

namespace hermite {

struct AssetConfig {
  double initial_price = 0.0;
  BasicRate drift;
  BasicRate dividend;
};

/// Contents of a run configuration file. Sections and keys:
///
///   [process]     hurst, order
///   [riskless]    rate                      (a rate in parse_rate syntax)
///   [asset.N]     initial_price, drift, dividend   (N = 1, 2, ...)
///   [volatility]  row.N = space- or comma-separated entries
///   [run]         seed, paths, steps, horizon
///   [output]      directory
///
/// Every key is optional at load time; accessors that need a missing key
/// throw ValidationError naming the file, section and key.
struct RunConfig {
  std::string source = "<command line>";
  std::string text;

  std::optional<double> hurst;
  std::optional<int> order;
  std::optional<BasicRate> riskless;
  std::vector<AssetConfig> assets;
  std::vector<std::vector<double>> volatility_rows;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> steps;
  std::optional<double> horizon;
  std::optional<std::string> output_directory;

  HermiteSpec spec() const;
  MarketSpec market() const;
};

RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double value);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Header line plus one line per row, '\n' endings.
std::string to_csv(const Table& table);

/// Long-format plot series: one (series, x, y) row per point.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string to_plot_csv(std::span<const Series> series);

std::string sha256_hex(std::string_view data);

/// Writes the files of one run into a directory. JSON objects get the
/// config digest and seed added; CSV files are listed with both in
/// manifest.json, written by finish().
class OutputSink {
 public:
  OutputSink(std::filesystem::path directory, std::string command, std::string digest, std::uint64_t seed);

  /// Returns false (and warns on stderr) instead of writing an empty table.
  bool write_csv(const std::string& name, const Table& table);
  bool write_plotdata(const std::string& name, std::span<const Series> series);
  void write_json(const std::string& name, nlohmann::json value);
  void finish();

  const std::filesystem::path& directory() const { return directory_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  void write_file(const std::string& name, const std::string& content);

  std::filesystem::path directory_;
  std::string command_;
  std::string digest_;
  std::uint64_t seed_;
  std::vector<std::string> files_;
};

}  // namespace hermite
