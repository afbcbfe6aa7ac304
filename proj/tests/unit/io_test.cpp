#include "hermite/io.h"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hermite/errors.h"

using namespace hermite;

namespace {

const char* kMarket = R"(# two assets
[process]
hurst = 0.7
order = 2

[riskless]
rate = constant 0.05

[asset.2]
initial_price = 50
drift = 0.06
dividend = table 0:0.01 2:0.02

[asset.1]
initial_price = 100
drift = poly 0.08 -0.01

[volatility]
row.1 = 0.2, 0.0
row.2 = 0.05 0.3

[run]
seed = 42
paths = 10
steps = 256
horizon = 2

[output]
directory = results
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "m.cfg");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hermite_io_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(ConfigTest, ParsesEverySection) {
  const RunConfig cfg = parse_config(kMarket, "m.cfg");
  EXPECT_EQ(cfg.hurst, 0.7);
  EXPECT_EQ(cfg.order, 2);
  ASSERT_EQ(cfg.assets.size(), 2u);
  EXPECT_EQ(cfg.assets[0].initial_price, 100.0);
  EXPECT_EQ(cfg.assets[1].initial_price, 50.0);
  EXPECT_TRUE(cfg.assets[0].dividend.is_zero());
  EXPECT_EQ(cfg.assets[1].dividend.kind(), BasicRate::Kind::table);
  EXPECT_EQ(cfg.volatility_rows[1], (std::vector<double>{0.05, 0.3}));
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.steps, 256u);
  EXPECT_EQ(cfg.output_directory, "results");

  const MarketSpec m = cfg.market();
  EXPECT_EQ(m.assets(), 2u);
  EXPECT_EQ(m.spec(), HermiteSpec(0.7, 2));
  EXPECT_NEAR(m.drifts()[0](2.0), 0.06, 1e-15);
  EXPECT_EQ(m.volatility().at(0.0)(1, 0), 0.05);
}

TEST(ConfigTest, ErrorsNameFileLineSectionAndKey) {
  EXPECT_EQ(error_of("[process]\nhurst = abc\n"), "m.cfg:2: [process] hurst: expected a number, got 'abc'");
  EXPECT_NE(error_of("[process]\nhurts = 0.7\n").find("m.cfg:2: [process] hurts: unknown key"), std::string::npos);
  EXPECT_NE(error_of("[proces]\nhurst = 0.7\n").find("m.cfg:1: [proces]: unknown section"), std::string::npos);
  EXPECT_NE(error_of("[asset.1]\ndrift = 0.1\n").find("[asset.1] initial_price is missing"), std::string::npos);
  EXPECT_NE(error_of("[asset.1]\ninitial_price = 1\ndrift = wobbly 3\n").find("m.cfg:3: [asset.1] drift"),
            std::string::npos);
  EXPECT_NE(error_of("[asset.2]\ninitial_price = 1\ndrift = 0\n").find("numbered 1..1"), std::string::npos);
  EXPECT_NE(error_of("[process\n").find("m.cfg:1:"), std::string::npos);
}

TEST(ConfigTest, MarketValidationMentionsTheFile) {
  RunConfig cfg = parse_config("[process]\nhurst = 1.2\n", "bad.cfg");
  try {
    cfg.spec();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.cfg"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("(1/2, 1)"), std::string::npos);
  }
  cfg = parse_config("[process]\nhurst = 0.7\n", "m.cfg");
  EXPECT_THROW(cfg.market(), ValidationError);
  std::string text = kMarket;
  text.replace(text.find("row.2 = 0.05 0.3"), 16, "row.2 = 0.05");
  EXPECT_THROW(parse_config(text).market(), ValidationError);
}

TEST(ConfigTest, LoadReadsFiles) {
  const auto dir = fresh_dir("load");
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "m.cfg") << kMarket;
  }
  const RunConfig cfg = load_config(dir / "m.cfg");
  EXPECT_EQ(cfg.text, kMarket);
  EXPECT_EQ(cfg.source, (dir / "m.cfg").string());
  EXPECT_THROW(load_config(dir / "missing.cfg"), ValidationError);
}

TEST(FormatTest, DoublesRoundTrip) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int k = 0; k < 5000; ++k) {
    const double v = std::ldexp(mant(gen), expo(gen));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
}

TEST(FormatTest, CsvLayout) {
  const Table t{{"t", "value"}, {{0.0, 0.0}, {0.5, -1.25}}};
  EXPECT_EQ(to_csv(t), "t,value\n0,0\n0.5,-1.25\n");
  const Table bad{{"a"}, {{1.0, 2.0}}};
  EXPECT_THROW(to_csv(bad), ValidationError);
  const std::vector<Series> s{{"p", {0.0, 1.0}, {2.0, 3.0}}};
  EXPECT_EQ(to_plot_csv(s), "series,x,y\np,0,2\np,1,3\n");
}

TEST(DigestTest, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(OutputSinkTest, WritesFilesJsonAndManifest) {
  const auto dir = fresh_dir("sink");
  OutputSink sink(dir, "demo", "abc123", 7);
  EXPECT_TRUE(sink.write_csv("a.csv", Table{{"x"}, {{1.0}}}));
  sink.write_json("r.json", {{"value", 2.5}, {"name", "x"}});
  sink.finish();
  EXPECT_EQ(slurp(dir / "a.csv"), "x\n1\n");
  const auto r = nlohmann::json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(r["config_digest"], "abc123");
  EXPECT_EQ(r["seed"], 7);
  const std::string text = slurp(dir / "r.json");
  EXPECT_LT(text.find("config_digest"), text.find("name"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["files"], (std::vector<std::string>{"a.csv", "r.json"}));
  EXPECT_EQ(manifest["command"], "demo");
}

TEST(OutputSinkTest, EmptyResultsWriteNothingAndWarn) {
  const auto dir = fresh_dir("empty");
  OutputSink sink(dir, "demo", "d", 1);
  testing::internal::CaptureStderr();
  EXPECT_FALSE(sink.write_csv("curve.csv", Table{{"T", "discount", "rate"}, {}}));
  const std::vector<Series> none;
  EXPECT_FALSE(sink.write_plotdata("plot.csv", none));
  const std::string warnings = testing::internal::GetCapturedStderr();
  EXPECT_NE(warnings.find("curve.csv"), std::string::npos);
  EXPECT_NE(warnings.find("plot.csv"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(dir / "curve.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "plot.csv"));
}

TEST(OutputSinkTest, UnwritableDirectoryThrows) {
  const auto dir = fresh_dir("blocked");
  std::filesystem::create_directories(dir.parent_path());
  {
    std::ofstream(dir) << "a file, not a directory";
  }
  EXPECT_THROW(OutputSink(dir / "sub", "demo", "d", 1), IoError);
  std::filesystem::remove(dir);
}
