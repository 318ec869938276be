// Command line front end: simulator runs and sweeps, the model checker, and
// the dirty-set capacity calculator.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "harmonia/core/duration.hpp"
#include "harmonia/harness/config.hpp"
#include "harmonia/harness/experiments.hpp"
#include "harmonia/harness/simulation.hpp"
#include "harmonia/mc/explore.hpp"
#include "harmonia/switch/capacity.hpp"

namespace fs = std::filesystem;
using namespace harmonia;

namespace {

constexpr int kExitViolation = 2;
constexpr int kExitBudget = 3;

void apply_overrides(harness::RunConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
    harness::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string fmt_rate(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v / 1e6 << "M/s";
  return os.str();
}

int cmd_sim_run(const std::string& config_path, const std::string& out_dir, bool trace,
                std::optional<std::uint64_t> seed, const std::vector<std::string>& sets) {
  harness::RunConfig cfg = harness::load_config(config_path);
  apply_overrides(cfg, sets);
  if (seed) cfg.seed = *seed;

  harness::RunOptions opts;
  opts.trace = trace;
  harness::RunResult r = harness::run(cfg, opts);
  const auto& m = r.metrics;

  std::cout << "protocol=" << to_string(cfg.protocol.protocol)
            << " harmonia=" << (cfg.protocol.harmonia ? "on" : "off")
            << " replicas=" << cfg.protocol.replicas << " seed=" << cfg.seed << "\n"
            << "throughput " << fmt_rate(m.total_throughput) << " (reads "
            << fmt_rate(m.read_throughput) << ", writes " << fmt_rate(m.write_throughput) << ")\n"
            << "latency p50 " << format_duration(m.p50_latency) << " p99 "
            << format_duration(m.p99_latency) << "\n"
            << "fast reads " << m.fast_reads << ", normal reads " << m.normal_reads
            << ", gate rejects " << m.gate_rejects << ", dropped writes " << m.dropped_writes
            << "\n"
            << "checker: " << r.report.reads_checked << " reads checked, "
            << r.report.violations.size() << " violations\n";

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "config.txt", harness::to_text(cfg));
    write_file(fs::path(out_dir) / "metrics.json", m.to_json().dump(2) + "\n");
    write_file(fs::path(out_dir) / "report.json", r.report.to_json().dump(2) + "\n");
    if (trace) write_file(fs::path(out_dir) / "trace.jsonl", r.trace);
  } else if (!r.report.ok()) {
    std::cerr << r.report.to_json().dump(2) << "\n";
  }
  return r.report.ok() ? 0 : kExitViolation;
}

int cmd_sim_sweep(const std::string& experiment, const std::string& config_path,
                  const std::string& out_dir, const std::vector<std::string>& protocol_names,
                  std::size_t max_replicas, std::optional<std::uint64_t> seed,
                  const std::vector<std::string>& sets, bool quiet) {
  harness::SweepOptions opts;
  if (experiment == "failover") {
    opts.base = harness::default_failover_config();
  } else if (experiment == "memory") {
    opts.base = harness::default_memory_config();
  } else {
    opts.base = harness::default_experiment_config();
  }
  if (!config_path.empty()) opts.base = harness::load_config(config_path);
  apply_overrides(opts.base, sets);
  if (seed) opts.base.seed = *seed;
  opts.max_replicas = max_replicas;
  for (const auto& name : protocol_names) {
    auto p = parse_protocol(name);
    if (!p) throw std::invalid_argument("unknown protocol '" + name + "'");
    opts.protocols.push_back(*p);
  }
  std::size_t violations = 0;
  opts.progress = [&](const harness::Row& row) {
    violations += row.violations;
    if (quiet) return;
    std::cerr << row.experiment << " " << row.workload << " " << to_string(row.protocol)
              << (row.harmonia ? "+harmonia" : "") << " R=" << row.replicas
              << " wr=" << row.write_ratio << " " << row.distribution << " slots=" << row.slots
              << " -> " << fmt_rate(row.throughput) << "\n";
  };

  std::ostringstream csv;
  if (experiment == "failover") {
    std::vector<Protocol> protos = opts.protocols;
    if (protos.empty()) protos = {Protocol::Chain};
    for (Protocol p : protos) {
      auto t = harness::experiment_failover(opts, p);
      violations += t.violations;
      harness::write_timeline_csv(csv, t);
    }
  } else {
    std::vector<harness::Row> rows;
    if (experiment == "scalability") {
      rows = harness::experiment_scalability(opts);
    } else if (experiment == "write-ratio") {
      rows = harness::experiment_write_ratio(opts);
    } else if (experiment == "read-vs-write") {
      rows = harness::experiment_read_vs_write(opts);
    } else if (experiment == "craq") {
      rows = harness::experiment_craq(opts);
    } else if (experiment == "memory") {
      rows = harness::experiment_memory(opts);
    } else {
      throw std::invalid_argument("unknown experiment '" + experiment + "'");
    }
    harness::write_csv(csv, rows);
  }

  if (out_dir.empty()) {
    std::cout << csv.str();
  } else {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / (experiment + ".csv"), csv.str());
    std::cerr << "wrote " << (fs::path(out_dir) / (experiment + ".csv")).string() << "\n";
  }
  if (violations > 0) {
    std::cerr << violations << " checker violations during the sweep\n";
    return kExitViolation;
  }
  return 0;
}

int cmd_check(const mc::McConfig& cfg, bool json, bool cross_validate) {
  mc::ExploreResult r = mc::explore(cfg);
  if (json) {
    std::cout << r.to_json().dump(2) << "\n";
  } else {
    std::cout << "mode=" << (cfg.is_read_behind ? "read-behind" : "read-ahead")
              << " items=" << cfg.data_items << " replicas=" << cfg.replicas
              << " switches=" << cfg.num_switches << " seq<=" << cfg.seq_bound
              << " depth<=" << cfg.depth << " mutation=" << to_string(cfg.mutation) << "\n"
              << to_string(r.outcome) << ": " << r.states << " states, " << r.transitions
              << " transitions, depth " << r.depth << "\n";
    if (r.outcome == mc::Outcome::Counterexample) {
      std::cout << "violated clause: " << to_string(*r.violation.clause) << " on "
                << to_string(r.violation.offending) << "\n"
                << mc::format_trace(cfg, r.trace);
    }
  }
  if (cross_validate && r.outcome == mc::Outcome::Counterexample) {
    auto v = mc::concretize_and_check(cfg, r.trace);
    std::cout << "simulator checker on the concretized trace: "
              << (!v.representable ? "not representable"
                                   : (v.violation ? "violation" : "no violation"))
              << "\n";
  }
  switch (r.outcome) {
    case mc::Outcome::Verified: return 0;
    case mc::Outcome::Counterexample: return kExitViolation;
    case mc::Outcome::BudgetExhausted: return kExitBudget;
  }
  return 1;
}

int cmd_capacity(const switching::CapacityInput& in, bool json) {
  auto r = switching::capacity(in);
  if (json) {
    nlohmann::json j{{"concurrent_writes", r.concurrent_writes},
                     {"writes_per_sec", r.writes_per_sec},
                     {"total_per_sec", r.total_per_sec},
                     {"memory_bytes", r.memory_bytes}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout.precision(12);
  std::cout << "concurrent writes: " << r.concurrent_writes << "\n"
            << "writes/s:          " << r.writes_per_sec << "\n"
            << "total requests/s:  " << r.total_per_sec << "\n"
            << "memory (bytes):    " << r.memory_bytes << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonia simulator, model checker and capacity calculator"};
  app.require_subcommand(1);

  // sim
  auto* sim = app.add_subcommand("sim", "Run the discrete-event simulator");
  sim->require_subcommand(1);

  std::string config_path, out_dir;
  bool trace = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  auto* sim_run = sim->add_subcommand("run", "Run one configuration");
  sim_run->add_option("config", config_path, "Run config file")->required()->check(CLI::ExistingFile);
  sim_run->add_option("--out", out_dir, "Write config, metrics, report (and trace) here");
  sim_run->add_flag("--trace", trace, "Record a JSON-lines event trace");
  sim_run->add_option("--seed", seed, "Override the config seed");
  sim_run->add_option("--set", sets, "Override a config key (key=value), repeatable");

  std::string experiment, sweep_config;
  std::vector<std::string> protocol_names;
  std::size_t max_replicas = 10;
  bool quiet = false;
  auto* sim_sweep = sim->add_subcommand("sweep", "Run an experiment family and emit CSV");
  sim_sweep->add_option("experiment", experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember(
          {"scalability", "write-ratio", "read-vs-write", "craq", "memory", "failover"}));
  sim_sweep->add_option("--config", sweep_config, "Base config (defaults to desk-scale settings)");
  sim_sweep->add_option("--out", out_dir, "Write <experiment>.csv here instead of stdout");
  sim_sweep->add_option("--protocol", protocol_names, "Protocols to sweep (pb, cr, craq, vr)");
  sim_sweep->add_option("--max-replicas", max_replicas, "Largest group in the scalability sweep")
      ->check(CLI::Range(1, 100));
  sim_sweep->add_option("--seed", seed, "Override the seed");
  sim_sweep->add_option("--set", sets, "Override a config key (key=value), repeatable");
  sim_sweep->add_flag("--quiet", quiet, "No per-run progress on stderr");

  // check
  mc::McConfig mcc;
  std::string mode = "read-ahead", mutation = "none";
  bool json = false, cross = false;
  auto* check = app.add_subcommand("check", "Exhaustively model check the abstract protocol");
  check->add_option("--items", mcc.data_items, "Data items")->check(CLI::Range(1, 16));
  check->add_option("--replicas", mcc.replicas, "Replicas")->check(CLI::Range(1, 16));
  check->add_option("--switches", mcc.num_switches, "Switches")->check(CLI::Range(1, 16));
  check->add_option("--mode", mode, "read-ahead or read-behind")
      ->check(CLI::IsMember({"read-ahead", "read-behind"}));
  check->add_option("--depth", mcc.depth, "BFS depth bound")->check(CLI::Range(0, 200));
  check->add_option("--seq-bound", mcc.seq_bound, "Writes per switch")->check(CLI::Range(1, 200));
  check->add_option("--budget", mcc.state_budget, "Maximum distinct states");
  check->add_option("--mutate", mutation, "Named mutation")
      ->check(CLI::IsMember(
          {"none", "read-ahead-gate-off", "read-behind-gate-off", "stale-switch-reads"}));
  check->add_flag("--json", json, "Print the result as JSON");
  check->add_flag("--cross-validate", cross,
                  "Replay a counterexample through the simulator's checker");

  // capacity
  switching::CapacityInput cap;
  std::string write_time = "1ms";
  double write_ms = 0;
  bool cap_json = false;
  auto* capacity = app.add_subcommand("capacity", "Dirty-set capacity arithmetic");
  capacity->add_option("--stages", cap.stages, "Pipeline stages")->required();
  capacity->add_option("--slots", cap.slots, "Slots per stage")->required();
  capacity->add_option("--utilization,--util", cap.utilization, "Table utilization in (0,1]")->required();
  auto* wt = capacity->add_option("--write-time", write_time, "Duration of one write (e.g. 1ms)");
  capacity->add_option("--write-ms", write_ms, "Duration of one write in milliseconds")
      ->check(CLI::PositiveNumber)
      ->excludes(wt);
  capacity->add_option("--write-ratio", cap.write_ratio, "Write ratio in (0,1]")->required();
  capacity->add_option("--id-bits", cap.id_bits, "Object id width");
  capacity->add_option("--seq-bits", cap.seq_bits, "Sequence number width");
  capacity->add_flag("--json", cap_json, "Print the result as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim_run) return cmd_sim_run(config_path, out_dir, trace, seed, sets);
    if (*sim_sweep) {
      return cmd_sim_sweep(experiment, sweep_config, out_dir, protocol_names, max_replicas, seed,
                           sets, quiet);
    }
    if (*check) {
      mcc.is_read_behind = mode == "read-behind";
      mcc.mutation = mc::parse_mutation(mutation);
      return cmd_check(mcc, json, cross);
    }
    if (*capacity) {
      cap.write_seconds = write_ms > 0 ? write_ms / 1e3
                                       : static_cast<double>(parse_duration(write_time)) / 1e9;
      return cmd_capacity(cap, cap_json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
