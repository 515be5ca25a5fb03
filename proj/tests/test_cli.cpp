#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "retina/cli.h"
#include "retina/config.h"

using namespace retina;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("retina-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& s) const { return (path_ / s).string(); }

 private:
  fs::path path_;
};

const std::vector<std::string> kSmall = {"--set", "network.neighborhoods=2", "--set",
                                         "network.nodes_per_neighborhood=6", "--set",
                                         "market.cycles=4", "--set", "network.scheme=\"keyed-digest\""};

std::vector<std::string> simulate_args(const std::string& out_dir) {
  std::vector<std::string> a{"simulate", "--out", out_dir};
  a.insert(a.end(), kSmall.begin(), kSmall.end());
  return a;
}

}  // namespace

TEST(ConfigFile, ParsesSectionsTypesAndComments) {
  const auto c = config::parse_config(R"(# preset
[network]
neighborhoods = 3
nodes_per_neighborhood = 100   # wide
scheme = "keyed-digest"
[market]
scenario = "75-25"
green_weight = 0.3
[broker]
buyer_reserve = [10, 20.5]
[run]
seed = 7
)");
  EXPECT_EQ(c.neighborhoods, 3u);
  EXPECT_EQ(c.nodes_per_neighborhood, 100u);
  EXPECT_EQ(c.scheme, identity::SchemeId::keyed_digest);
  EXPECT_EQ(c.buyer_fraction, 0.75);
  EXPECT_EQ(c.weights.a, 0.3);
  EXPECT_EQ(c.buyer_reserve, (sim::Range{10, 20.5}));
  EXPECT_EQ(c.seed, 7u);
}

TEST(ConfigFile, ErrorsNameLineAndKey) {
  auto message = [](std::string_view text) {
    try {
      config::parse_config(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::config_invalid);
      return std::string(e.what());
    }
    ADD_FAILURE() << "accepted: " << text;
    return std::string();
  };
  EXPECT_NE(message("[network]\nbogus = 1\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("[network]\n\nneighborhoods = \"x\"\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("neighborhoods = 3\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("[broker]\nbuyer_reserve = [1]\n").find("buyer_reserve"), std::string::npos);
  EXPECT_NE(message("[network]\nneighborhoods 3\n").find("line 2"), std::string::npos);
}

TEST(ConfigFile, ShippedPresetsEncodeBothNetworkShapes) {
  const auto c1 = config::load_config_file(RETINA_SOURCE_DIR "/configs/table2-config1.toml");
  const auto c2 = config::load_config_file(RETINA_SOURCE_DIR "/configs/table2-config2.toml");
  EXPECT_EQ(c1.neighborhoods * c1.nodes_per_neighborhood, 300u);
  EXPECT_EQ(c2.neighborhoods * c2.nodes_per_neighborhood, 300u);
  EXPECT_EQ(c1.neighborhoods, 10u);
  EXPECT_EQ(c2.neighborhoods, 3u);
  EXPECT_EQ(c1.seed, 42u);
  EXPECT_EQ(c1.market_cycles, 30u);
  EXPECT_THROW(config::load_config_file("/nonexistent/x.toml"), Error);
}

TEST(ConfigFile, OverridesAndJsonRoundTrip) {
  sim::SimConfig c;
  config::apply_override(c, "market.cycles=12");
  config::apply_override(c, "broker.low_threshold=[10, 12]");
  EXPECT_EQ(c.market_cycles, 12u);
  EXPECT_EQ(c.low_threshold, (sim::Range{10, 12}));
  EXPECT_THROW(config::apply_override(c, "market.cycles"), Error);
  EXPECT_THROW(config::apply_override(c, "nosuch.key=1"), Error);
  EXPECT_EQ(config::config_from_json(sim::to_json(c)), c);
  const auto keys = config::known_keys();
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
}

TEST(Cli, HelpVersionAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, 0);
  const auto v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find(cli::kVersion), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"benchmark", "join", "--sizes", "1"}).code, 2);
  EXPECT_EQ(run({"benchmark", "join", "--sizes", "abc"}).code, 2);
  EXPECT_EQ(run({"benchmark", "trust", "--sizes", "2"}).code, 2);
  EXPECT_EQ(run({"simulate", "--scenario", "60-60"}).code, 2);
  EXPECT_EQ(run({"simulate", "--config", "/nonexistent.toml"}).code, 2);
  EXPECT_EQ(run({"simulate", "--set", "market.cycles=0"}).code, 2);
}

TEST(Cli, JoinBenchmarkPrintsOneRowPerSize) {
  const auto r = run({"benchmark", "join", "--sizes", "8,16,32", "--reps", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, cli::provenance_line(42));
  std::getline(in, line);
  EXPECT_EQ(line, sim::kJoinCsvHeader);
  int rows = 0;
  for (; std::getline(in, line); ++rows) {
    const std::uint32_t n = std::stoul(line.substr(0, line.find(',')));
    EXPECT_EQ(line.substr(line.rfind(',') + 1), std::to_string(n - 1));
  }
  EXPECT_EQ(rows, 3);
}

TEST(Cli, SimulateWritesArtifactsAndReplaysFromTheManifest) {
  TempDir dir;
  const auto first = run(simulate_args(dir / "a"));
  ASSERT_EQ(first.code, 0) << first.err;
  for (const char* f : {"prices.csv", "trades.csv", "ledger_trust.jsonl", "ledger_trading.jsonl",
                        "edges.txt", "certificates.json", "metrics.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir.path() / "a" / f)) << f;
  const auto prices = slurp(dir.path() / "a" / "prices.csv");
  EXPECT_EQ(prices.rfind(cli::provenance_line(42) + "\n", 0), 0u);

  const auto again = run({"simulate", "--manifest", dir / "a/manifest.json", "--out", dir / "b"});
  ASSERT_EQ(again.code, 0) << again.err;
  for (const char* f : {"prices.csv", "trades.csv", "ledger_trust.jsonl", "ledger_trading.jsonl",
                        "edges.txt", "certificates.json", "metrics.json", "manifest.json"})
    EXPECT_EQ(slurp(dir.path() / "a" / f), slurp(dir.path() / "b" / f)) << f;

  auto other = simulate_args(dir / "c");
  other.insert(other.end(), {"--seed", "7"});
  ASSERT_EQ(run(other).code, 0);
  EXPECT_NE(slurp(dir.path() / "c" / "trades.csv"), slurp(dir.path() / "a" / "trades.csv"));
}

TEST(Cli, InspectRendersCertificatesLedgersAndGraph) {
  TempDir dir;
  ASSERT_EQ(run(simulate_args(dir.path().string())).code, 0);
  const auto cert = run({"inspect", "--state", dir.path().string(), "cert", "7"});
  ASSERT_EQ(cert.code, 0) << cert.err;
  std::istringstream in(cert.out);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_GE(lines.size(), 4u);
  EXPECT_EQ(lines[0].rfind("Pk 2048R/", 0), 0u);
  EXPECT_EQ(lines[1].rfind("uid ", 0), 0u);
  for (std::size_t i = 2; i < lines.size(); ++i) EXPECT_EQ(lines[i].rfind("sig ", 0), 0u);

  const auto trust = run({"inspect", "--state", dir.path().string(), "ledger", "trust"});
  ASSERT_EQ(trust.code, 0) << trust.err;
  const auto edges = run({"inspect", "--state", dir.path().string(), "graph"});
  ASSERT_EQ(edges.code, 0);
  const auto edge_count = std::count(edges.out.begin(), edges.out.end(), '\n');
  std::size_t established = 0;
  for (std::size_t p = 0; (p = trust.out.find("\"TrustEstablished\"", p)) != std::string::npos; ++p)
    ++established;
  EXPECT_GE(static_cast<long>(established), edge_count);

  EXPECT_EQ(run({"inspect", "--state", dir.path().string(), "cert", "9999"}).code, 2);
  EXPECT_EQ(run({"inspect", "--state", (dir / "missing"), "graph"}).code, 2);
  EXPECT_EQ(run({"inspect", "--state", dir.path().string(), "ledger", "other"}).code, 2);
}

TEST(Cli, TamperedLedgerFailsInspection) {
  TempDir dir;
  ASSERT_EQ(run(simulate_args(dir.path().string())).code, 0);
  const auto path = dir.path() / "ledger_trading.jsonl";
  auto text = slurp(path);
  const auto pos = text.find("\"kw\":");
  ASSERT_NE(pos, std::string::npos);
  text.insert(pos + 5, "9");
  std::ofstream(path, std::ios::binary) << text;
  EXPECT_EQ(run({"inspect", "--state", dir.path().string(), "ledger", "trading"}).code, 1);
}
