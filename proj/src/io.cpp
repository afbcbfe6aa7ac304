#include "hermite/io.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include "hermite/errors.h"

namespace hermite {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Line of `key` inside `[section]`, or of the section header when key is empty.
std::optional<int> line_of(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  std::string current;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
      current = trim(std::string_view(t).substr(1, t.size() - 2));
      if (key.empty() && current == section) return number;
      continue;
    }
    if (current != section || key.empty()) continue;
    const auto eq = t.find('=');
    if (eq != std::string::npos && trim(std::string_view(t).substr(0, eq)) == key) return number;
  }
  return std::nullopt;
}

class ConfigReader {
 public:
  ConfigReader(const std::string& text, const std::string& source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    std::string where = source_;
    if (auto line = line_of(text_, section, key)) where += ":" + std::to_string(*line);
    where += ": [" + section + "]";
    if (!key.empty()) where += " " + key;
    throw ValidationError(where + ": " + what);
  }

  double number(const std::string& section, const std::string& key, const std::string& raw) const {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      fail(section, key, "expected a number, got '" + s + "'");
    }
    return v;
  }

  std::uint64_t count(const std::string& section, const std::string& key, const std::string& raw) const {
    const std::string s = trim(raw);
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      fail(section, key, "expected a nonnegative integer, got '" + s + "'");
    }
    return v;
  }

  BasicRate rate(const std::string& section, const std::string& key, const std::string& raw) const {
    try {
      return parse_rate(trim(raw));
    } catch (const ValidationError& e) {
      fail(section, key, e.what());
    }
  }

  std::vector<double> row(const std::string& section, const std::string& key, const std::string& raw) const {
    std::string s = raw;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<double> out;
    for (std::string tok; in >> tok;) out.push_back(number(section, key, tok));
    if (out.empty()) fail(section, key, "empty volatility row");
    return out;
  }

 private:
  const std::string& text_;
  const std::string& source_;
};

// Index N of "prefixN", or nullopt.
std::optional<std::size_t> suffix_index(const std::string& name, const std::string& prefix) {
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  const std::string rest = name.substr(prefix.size());
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
  if (ec != std::errc() || end != rest.data() + rest.size() || rest.empty() || v == 0) return std::nullopt;
  return v;
}

std::string missing(const std::string& source, const std::string& section, const std::string& key) {
  return source + ": [" + section + "] " + key + " is missing";
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig cfg;
  cfg.source = source;
  cfg.text = text;
  const ConfigReader read(cfg.text, cfg.source);
  std::vector<std::pair<std::size_t, AssetConfig>> assets;
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;

  for (const auto& [section, node] : tree) {
    if (node.empty() && !node.data().empty()) {
      throw ValidationError(source + ": key '" + section + "' appears outside any section");
    }
    auto unknown = [&](const std::string& key) { read.fail(section, key, "unknown key"); };
    if (section == "process") {
      for (const auto& [key, v] : node) {
        if (key == "hurst") {
          cfg.hurst = read.number(section, key, v.data());
        } else if (key == "order") {
          cfg.order = static_cast<int>(read.count(section, key, v.data()));
        } else {
          unknown(key);
        }
      }
    } else if (section == "riskless") {
      for (const auto& [key, v] : node) {
        if (key != "rate") unknown(key);
        cfg.riskless = read.rate(section, key, v.data());
      }
    } else if (auto n = suffix_index(section, "asset.")) {
      AssetConfig a;
      bool have_price = false;
      bool have_drift = false;
      for (const auto& [key, v] : node) {
        if (key == "initial_price") {
          a.initial_price = read.number(section, key, v.data());
          have_price = true;
        } else if (key == "drift") {
          a.drift = read.rate(section, key, v.data());
          have_drift = true;
        } else if (key == "dividend") {
          a.dividend = read.rate(section, key, v.data());
        } else {
          unknown(key);
        }
      }
      if (!have_price) throw ValidationError(missing(source, section, "initial_price"));
      if (!have_drift) throw ValidationError(missing(source, section, "drift"));
      assets.emplace_back(*n, std::move(a));
    } else if (section == "volatility") {
      for (const auto& [key, v] : node) {
        auto n = suffix_index(key, "row.");
        if (!n) read.fail(section, key, "volatility keys are row.1, row.2, ...");
        rows.emplace_back(*n, read.row(section, key, v.data()));
      }
    } else if (section == "run") {
      for (const auto& [key, v] : node) {
        if (key == "seed") {
          cfg.seed = read.count(section, key, v.data());
        } else if (key == "paths") {
          cfg.paths = read.count(section, key, v.data());
        } else if (key == "steps") {
          cfg.steps = read.count(section, key, v.data());
        } else if (key == "horizon") {
          cfg.horizon = read.number(section, key, v.data());
        } else {
          unknown(key);
        }
      }
    } else if (section == "output") {
      for (const auto& [key, v] : node) {
        if (key != "directory") unknown(key);
        cfg.output_directory = trim(v.data());
      }
    } else {
      read.fail(section, "", "unknown section (expected process, riskless, asset.N, volatility, run, output)");
    }
  }

  std::sort(assets.begin(), assets.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < assets.size(); ++k) {
    if (assets[k].first != k + 1) {
      throw ValidationError(source + ": asset sections must be numbered 1.." + std::to_string(assets.size()));
    }
    cfg.assets.push_back(std::move(assets[k].second));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].first != k + 1) {
      throw ValidationError(source + ": volatility rows must be numbered 1.." + std::to_string(rows.size()));
    }
    cfg.volatility_rows.push_back(std::move(rows[k].second));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

HermiteSpec RunConfig::spec() const {
  if (!hurst) throw ValidationError(missing(source, "process", "hurst"));
  try {
    return HermiteSpec(*hurst, order.value_or(1));
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": [process] " + e.what());
  }
}

MarketSpec RunConfig::market() const {
  const HermiteSpec s = spec();
  if (!riskless) throw ValidationError(missing(source, "riskless", "rate"));
  if (assets.empty()) throw ValidationError(source + ": no [asset.1] section");
  const std::size_t d = assets.size();
  if (volatility_rows.size() != d) {
    throw ValidationError(source + ": [volatility] needs " + std::to_string(d) + " rows, found " +
                          std::to_string(volatility_rows.size()));
  }
  SquareMatrix sigma(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (volatility_rows[i].size() != d) {
      throw ValidationError(source + ": [volatility] row." + std::to_string(i + 1) + " needs " + std::to_string(d) +
                            " entries");
    }
    for (std::size_t j = 0; j < d; ++j) sigma(i, j) = volatility_rows[i][j];
  }
  std::vector<BasicRate> drifts;
  std::vector<BasicRate> dividends;
  std::vector<double> prices;
  for (const AssetConfig& a : assets) {
    drifts.push_back(a.drift);
    dividends.push_back(a.dividend);
    prices.push_back(a.initial_price);
  }
  try {
    return MarketSpec(s, *riskless, std::move(drifts), std::move(dividends), Volatility(sigma), std::move(prices),
                      std::max(horizon.value_or(10.0), 1e-12));
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, end);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw ValidationError("table row width does not match its header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string to_plot_csv(std::span<const Series> series) {
  std::string out = "series,x,y\n";
  for (const Series& s : series) {
    if (s.x.size() != s.y.size()) throw ValidationError("series '" + s.name + "' has mismatched x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out += s.name + ',' + format_double(s.x[i]) + ',' + format_double(s.y[i]) + '\n';
    }
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

OutputSink::OutputSink(std::filesystem::path directory, std::string command, std::string digest, std::uint64_t seed)
    : directory_(std::move(directory)), command_(std::move(command)), digest_(std::move(digest)), seed_(seed) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec || !std::filesystem::is_directory(directory_)) {
    throw IoError("cannot create output directory " + directory_.string());
  }
}

void OutputSink::write_file(const std::string& name, const std::string& content) {
  const auto path = directory_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
  files_.push_back(name);
}

bool OutputSink::write_csv(const std::string& name, const Table& table) {
  if (table.rows.empty()) {
    std::cerr << "warning: " << name << " has no rows; not written\n";
    return false;
  }
  write_file(name, to_csv(table));
  return true;
}

bool OutputSink::write_plotdata(const std::string& name, std::span<const Series> series) {
  const bool empty = std::all_of(series.begin(), series.end(), [](const Series& s) { return s.x.empty(); });
  if (empty) {
    std::cerr << "warning: " << name << " has no data; not written\n";
    return false;
  }
  write_file(name, to_plot_csv(series));
  return true;
}

void OutputSink::write_json(const std::string& name, nlohmann::json value) {
  if (value.is_object()) {
    value["config_digest"] = digest_;
    value["seed"] = seed_;
  }
  write_file(name, value.dump(2) + "\n");
}

void OutputSink::finish() {
  nlohmann::json manifest;
  manifest["command"] = command_;
  manifest["config_digest"] = digest_;
  manifest["seed"] = seed_;
  auto files = files_;
  std::sort(files.begin(), files.end());
  manifest["files"] = files;
  const auto path = directory_ / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << "\n";
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace hermite
