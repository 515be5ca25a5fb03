#include "retina/cli.h"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "retina/codec.h"
#include "retina/config.h"
#include "retina/simulation.h"

namespace retina::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

bool is_usage_error(Errc c) {
  switch (c) {
    case Errc::config_invalid:
    case Errc::invalid_argument:
    case Errc::unknown_node:
    case Errc::certificate_not_found:
    case Errc::network_too_small:
      return true;
    default:
      return false;
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error(Errc::invalid_argument, "cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("write to '" + p.string() + "' failed");
}

std::string default_dir() {
  const char* env = std::getenv("RETINA_OUT");
  return env && *env ? env : "retina-out";
}

struct SimulateArgs {
  std::string config_path;
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
  std::string scenario;
  std::vector<std::string> sets;
  std::string out_dir;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  sim::SimConfig cfg;
  if (!a.manifest_path.empty()) {
    json m;
    try {
      m = json::parse(read_file(a.manifest_path));
    } catch (const json::exception& e) {
      throw Error(Errc::config_invalid, a.manifest_path + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::config_invalid, e.what());
    }
    if (!m.contains("config")) throw Error(Errc::config_invalid, a.manifest_path + ": no config object");
    cfg = config::config_from_json(m.at("config"));
  } else if (!a.config_path.empty()) {
    cfg = config::load_config_file(a.config_path);
  }
  if (!a.scenario.empty())
    std::tie(cfg.buyer_fraction, cfg.seller_fraction) = sim::parse_scenario(a.scenario);
  if (a.seed) cfg.seed = *a.seed;
  for (const auto& s : a.sets) config::apply_override(cfg, s);
  cfg.validate();

  sim::MarketSim simulation(cfg);
  simulation.run();

  const fs::path dir = a.out_dir.empty() ? default_dir() : a.out_dir;
  fs::create_directories(dir);
  const std::string head = provenance_line(cfg.seed) + "\n";

  const auto& net = simulation.network();
  json certs = json::array();
  for (NodeId id : net.node_ids()) {
    const auto& r = net.node(id);
    certs.push_back({{"node", id.value},
                     {"neighborhood", r.neighborhood.value},
                     {"role", r.empowered() ? "empowered" : "simple"},
                     {"online", r.online},
                     {"certificate", codec::to_json(r.cert)}});
  }
  sim::MetricsReport metrics;
  metrics.price_series = simulation.price_series();
  metrics.utility_fallback_count = simulation.utility_fallback_count();
  json metrics_json = sim::to_json(metrics);
  metrics_json["tool_version"] = kVersion;
  metrics_json["seed"] = cfg.seed;
  metrics_json["mean_clearing_price"] = sim::mean_clearing_price(simulation.price_series());
  metrics_json["trades"] = simulation.trades().size();
  metrics_json["trust_ledger_head"] = to_hex(net.trust_ledger().head_digest());
  metrics_json["trading_ledger_head"] = to_hex(simulation.market().trading_ledger().head_digest());

  const std::vector<std::pair<std::string, std::string>> files = {
      {"prices.csv", head + simulation.price_csv()},
      {"trades.csv", head + simulation.trade_csv()},
      {"ledger_trust.jsonl", head + ledger::dump_jsonl(net.trust_ledger())},
      {"ledger_trading.jsonl", head + ledger::dump_jsonl(simulation.market().trading_ledger())},
      {"edges.txt", head + net.export_edge_list()},
      {"certificates.json",
       json{{"tool_version", kVersion}, {"seed", cfg.seed}, {"certificates", certs}}.dump(1) + "\n"},
      {"metrics.json", metrics_json.dump(1) + "\n"},
  };
  json outputs = json::array();
  for (const auto& [name, content] : files) {
    write_file(dir / name, content);
    outputs.push_back(name);
  }
  const json manifest{{"command", "simulate"},
                      {"tool_version", kVersion},
                      {"seed", cfg.seed},
                      {"config", sim::to_json(cfg)},
                      {"outputs", outputs}};
  write_file(dir / "manifest.json", manifest.dump(1) + "\n");

  out << "cycles " << simulation.cycle() << ", trades " << simulation.trades().size()
      << ", mean clearing price " << market::format_number(sim::mean_clearing_price(simulation.price_series()))
      << ", utility fallbacks " << simulation.utility_fallback_count() << "\n"
      << "outputs written to " << dir.string() << "\n";
  return kOk;
}

struct BenchArgs {
  std::string mode;
  std::vector<std::uint32_t> sizes;
  bool decentralized = false;
  std::size_t reps = 5;
  std::size_t trials = 100;
  std::uint64_t seed = 42;
  std::string out_dir;
};

int cmd_benchmark(const BenchArgs& a, std::ostream& out) {
  sim::BenchOptions o;
  o.repetitions = a.reps;
  o.trials = a.trials;
  o.seed = a.seed;
  std::string body, name;
  if (a.mode == "ct") {
    sim::MetricsReport m;
    m.ct = sim::measure_ct(std::max<std::size_t>(1, a.reps));
    body = sim::to_json(m).dump(1) + "\n";
    name = "ct.json";
  } else {
    if (a.sizes.empty()) throw Error(Errc::invalid_argument, "--sizes is required");
    const std::uint32_t min_size = a.mode == "join" ? 2 : 3;
    for (auto n : a.sizes)
      if (n < min_size || n > 10000)
        throw Error(Errc::invalid_argument, "size " + std::to_string(n) + " outside [" +
                                                std::to_string(min_size) + ", 10000]");
    if (a.mode == "join") {
      body = provenance_line(a.seed) + "\n" + sim::join_csv(sim::run_join_benchmark(a.sizes, o));
      name = "join.csv";
    } else {
      body = provenance_line(a.seed) + "\n" +
             sim::trust_csv(sim::run_trust_benchmark(a.sizes, a.decentralized, o));
      name = a.decentralized ? "trust_decentralized.csv" : "trust.csv";
    }
  }
  out << body;
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / name, body);
  }
  return kOk;
}

fs::path state_file(const std::string& dir, const char* name) {
  const fs::path p = fs::path(dir.empty() ? default_dir() : dir) / name;
  if (!fs::exists(p))
    throw Error(Errc::invalid_argument, "no run state at '" + p.string() + "' (run simulate first)");
  return p;
}

int cmd_inspect_cert(const std::string& dir, std::uint32_t node, std::ostream& out) {
  const json doc = json::parse(read_file(state_file(dir, "certificates.json")));
  for (const auto& c : doc.at("certificates"))
    if (c.at("node").get<std::uint32_t>() == node) {
      out << identity::render_certificate(codec::certificate_from_json(c.at("certificate"))) << "\n";
      return kOk;
    }
  throw Error(Errc::unknown_node, "node " + std::to_string(node) + " not present in the run");
}

int cmd_inspect_ledger(const std::string& dir, const std::string& kind, std::ostream& out,
                       std::ostream& err) {
  const bool trust = kind == "trust";
  const auto path = state_file(dir, trust ? "ledger_trust.jsonl" : "ledger_trading.jsonl");
  const auto l = ledger::load_jsonl(read_file(path), trust ? ledger::LedgerKind::trust
                                                             : ledger::LedgerKind::trading);
  out << ledger::dump_jsonl(l);
  if (const auto audit = ledger::audit_chain(l); !audit.valid) {
    err << "ledger audit failed at block " << *audit.first_bad_block << ": " << audit.reason << "\n";
    return kRuntime;
  }
  return kOk;
}

int cmd_inspect_graph(const std::string& dir, std::ostream& out) {
  std::istringstream in(read_file(state_file(dir, "edges.txt")));
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line.front() != '#') out << line << "\n";
  return kOk;
}

}  // namespace

std::string provenance_line(std::uint64_t seed) {
  return "# retina " + std::string(kVersion) + " seed=" + std::to_string(seed);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trust-network energy market simulator", "retina"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a market simulation and write its artifacts");
  simulate->add_option("--config", sa.config_path, "Configuration file");
  simulate->add_option("--manifest", sa.manifest_path, "Re-run from a manifest.json");
  simulate->add_option("--seed", sa.seed, "RNG seed");
  simulate->add_option("--scenario", sa.scenario, "Buyer-seller mix: 75-25, 50-50 or 25-75");
  simulate->add_option("--set", sa.sets, "Override section.key=value (repeatable)");
  simulate->add_option("--out", sa.out_dir, "Output directory (default $RETINA_OUT or retina-out)");

  BenchArgs ba;
  auto* bench = app.add_subcommand("benchmark", "Join, trust or CT benchmarks");
  bench->add_option("mode", ba.mode, "join, trust or ct")->required()->check(CLI::IsMember({"join", "trust", "ct"}));
  bench->add_option("--sizes", ba.sizes, "Comma-separated network sizes")->delimiter(',');
  bench->add_flag("--decentralized", ba.decentralized, "Trust lookups without empowered nodes");
  bench->add_option("--reps", ba.reps, "Repetitions per join point")->check(CLI::PositiveNumber);
  bench->add_option("--trials", ba.trials, "Node pairs per trust point")->check(CLI::PositiveNumber);
  bench->add_option("--seed", ba.seed, "RNG seed");
  bench->add_option("--out", ba.out_dir, "Also write the result here");

  std::string state_dir;
  auto* inspect = app.add_subcommand("inspect", "Show certificates, ledgers or the trust graph of a run");
  inspect->add_option("--state", state_dir, "Run directory (default $RETINA_OUT or retina-out)");
  inspect->require_subcommand(1);
  std::uint32_t cert_node = 0;
  auto* icert = inspect->add_subcommand("cert", "Print a node certificate");
  icert->add_option("node", cert_node, "Node id")->required();
  std::string ledger_kind;
  auto* iledger = inspect->add_subcommand("ledger", "Print a ledger as JSON lines");
  iledger->add_option("kind", ledger_kind, "trust or trading")->required()->check(CLI::IsMember({"trust", "trading"}));
  auto* igraph = inspect->add_subcommand("graph", "Print the trust edge list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sa, out);
    if (*bench) return cmd_benchmark(ba, out);
    if (*icert) return cmd_inspect_cert(state_dir, cert_node, out);
    if (*iledger) return cmd_inspect_ledger(state_dir, ledger_kind, out, err);
    if (*igraph) return cmd_inspect_graph(state_dir, out);
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return is_usage_error(e.code()) ? kUsage : kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"retina"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace retina::cli
