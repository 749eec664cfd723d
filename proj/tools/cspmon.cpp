// cspmon: check traces against CSP models, offline or live.

#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>

#include "CLI11.hpp"
#include "json.hpp"

#include "cspmon/bench/mascot.hpp"
#include "cspmon/bench/stress.hpp"
#include "cspmon/error.hpp"
#include "cspmon/gateway/listener.hpp"
#include "cspmon/refine/refine.hpp"

#ifndef CSPMON_ASSET_DIR
#define CSPMON_ASSET_DIR "assets/mascot"
#endif

using namespace cspmon;
using nlohmann::json;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailed = 1;  // rejected, diverged, or a check that does not hold
constexpr int kError = 2;   // bad input or configuration

struct ModelArgs {
  std::string spec = std::string(CSPMON_ASSET_DIR) + "/model.csp";
  std::string process = bench::kMascotRoot;
  std::string mapping;
};

void add_model_args(CLI::App* cmd, ModelArgs& m, bool with_mapping) {
  cmd->add_option("--spec", m.spec, "CSP model file")->check(CLI::ExistingFile)->capture_default_str();
  cmd->add_option("--process", m.process, "root process")->capture_default_str();
  if (with_mapping) cmd->add_option("--mapping", m.mapping, "raw-event mapping file")->check(CLI::ExistingFile);
}

gateway::MappingTable mapping_of(const ModelArgs& m, const ResolvedSpec& spec) {
  if (m.mapping.empty()) return {};  // compact events only, no prelude
  return gateway::load_mapping(m.mapping, spec);
}

std::string names(const ResolvedSpec& spec, const std::vector<EventId>& events) {
  std::string out;
  for (EventId e : events) out += (out.empty() ? "" : ", ") + spec.event_name(e);
  return "{" + out + "}";
}

int cmd_check(const ModelArgs& m, const std::string& trace_path, bool as_json) {
  auto spec = load_spec(m.spec);
  auto table = mapping_of(m, *spec);
  auto trace = gateway::read_trace_file(trace_path, table, *spec);
  auto report = oracle::check_trace(spec, m.process, trace);
  const auto& v = report.verdict;
  if (as_json) {
    json acceptable = json::array();
    for (EventId e : v.acceptable) acceptable.push_back(spec->event_name(e));
    std::cout << json{{"process", m.process},
                      {"length", trace.size()},
                      {"accepted", report.length},
                      {"outcome", oracle::to_string(v.outcome)},
                      {"index", v.index},
                      {"acceptable", acceptable},
                      {"seconds", std::chrono::duration<double>(report.elapsed).count()}}
                     .dump()
              << '\n';
  } else {
    std::cout << m.process << ": " << oracle::to_string(v.outcome);
    if (v.outcome == oracle::Outcome::Accepted) {
      std::cout << " (" << trace.size() << " events)\n";
    } else {
      std::cout << " at event " << v.index << " (" << spec->event_name(trace[v.index]) << ")\n";
      std::cout << "  accepted prefix: " << report.length << " events\n";
      if (v.outcome == oracle::Outcome::Rejected) std::cout << "  acceptable next: " << names(*spec, v.acceptable) << '\n';
    }
  }
  return v.outcome == oracle::Outcome::Accepted ? kOk : kFailed;
}

int cmd_verify(const ModelArgs& m, const std::vector<std::string>& assertion_files) {
  auto spec = load_spec(m.spec, assertion_files);
  if (spec->assertions().empty()) {
    std::cerr << "no assertions in " << m.spec << '\n';
    return kError;
  }
  auto report = refine::run_assertions(spec);
  for (const auto& r : report.results) {
    std::cout << (r.error ? "ERROR " : r.holds ? "PASS  " : "FAIL  ");
    if (r.assertion) std::cout << r.assertion->text << ": ";
    std::cout << r.summary << '\n';
    if (r.error) std::cout << "      " << *r.error << '\n';
  }
  std::cout << report.results.size() - report.failures() << "/" << report.results.size() << " assertions hold\n";
  return report.failures() == 0 ? kOk : kFailed;
}

int cmd_listen(const ModelArgs& m, const std::string& endpoint, const std::string& on_reject, std::size_t queue) {
  auto spec = load_spec(m.spec);
  auto table = std::make_shared<gateway::MappingTable>(mapping_of(m, *spec));
  gateway::ListenOptions opts;
  opts.on_reject = on_reject == "reset" ? gateway::OnReject::Reset : gateway::OnReject::Halt;
  opts.queue_capacity = queue;
  std::mutex out_mu;
  opts.on_frame = [&](const gateway::ConnectionFrame& f) {
    std::lock_guard lock(out_mu);
    std::cout << json{{"connection", f.connection}, {"frame", f.frame}}.dump() << std::endl;
  };
  opts.on_log = [&](const std::string& line) {
    std::lock_guard lock(out_mu);
    std::cerr << line << std::endl;
  };
  gateway::Listener listener(spec, m.process, table, opts);
  listener.start(gateway::parse_endpoint(endpoint));
  std::cerr << "listening on " << listener.endpoint().to_string() << std::endl;

  boost::asio::io_context signals_ioc;
  boost::asio::signal_set signals(signals_ioc, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) { listener.stop(); });
  std::thread waiter([&] { signals_ioc.run(); });
  listener.wait();
  signals_ioc.stop();
  waiter.join();
  listener.stop();
  return kOk;
}

int cmd_gen_stress(const ModelArgs& m, std::size_t n, const std::string& out, std::uint64_t seed) {
  auto spec = load_spec(m.spec);
  auto trace = bench::generate_stress_trace(n, *spec, seed);
  if (out.empty() || out == "-") {
    bench::write_compact_log(trace, *spec, std::cout);
  } else {
    std::ofstream f(out);
    if (!f) throw Error(ErrorKind::Io, "cannot write '" + out + "'");
    bench::write_compact_log(trace, *spec, f);
  }
  return kOk;
}

int cmd_scenarios(const ModelArgs& m, const std::string& dir) {
  auto spec = load_spec(m.spec);
  auto table = mapping_of(m, *spec);
  auto results = bench::run_scenarios(dir, spec, table, m.process);
  std::size_t good = 0;
  for (const auto& r : results) {
    std::cout << (r.matches ? "ok    " : "FAIL  ") << "scenario " << r.asset.id << ": ";
    if (r.error) {
      std::cout << *r.error << '\n';
      continue;
    }
    std::cout << oracle::to_string(r.report.verdict.outcome) << " (expected " << oracle::to_string(r.asset.expected)
              << ")";
    if (r.report.verdict.outcome != oracle::Outcome::Accepted) std::cout << " at event " << r.report.verdict.index;
    std::cout << ", " << r.trace_length << " events, " << r.seconds << " s\n";
    good += r.matches;
  }
  std::cout << good << "/" << results.size() << " scenarios as expected\n";
  return good == results.size() ? kOk : kFailed;
}

int cmd_bench(const ModelArgs& m, bench::BenchConfig cfg, const std::string& scenario_dir, const std::string& csv) {
  auto start = std::chrono::steady_clock::now();
  auto spec = load_spec(m.spec);
  double load = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  cfg.root = m.process;
  bench::BenchReport report;
  if (!scenario_dir.empty()) {
    ModelArgs with_map = m;
    if (with_map.mapping.empty()) with_map.mapping = std::string(CSPMON_ASSET_DIR) + "/mapping.cfg";
    auto table = mapping_of(with_map, *spec);
    report = bench::bench_scenarios(scenario_dir, spec, table, cfg.repetitions, cfg.warmup, m.process);
  } else {
    report = bench::run_bench(cfg, spec);
  }
  report.load_seconds = load;
  std::cout << bench::format_table(report);
  if (!csv.empty()) {
    std::ofstream f(csv);
    if (!f) throw Error(ErrorKind::Io, "cannot write '" + csv + "'");
    bench::write_csv(report, f);
  }
  for (const auto& row : report.rows) {
    if (row.error) return kFailed;
  }
  return kOk;
}

int cmd_validate(const std::string& dir) {
  auto report = bench::validate_assets({dir});
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "ok    " : "FAIL  ") << c.name;
    if (!c.detail.empty()) std::cout << ": " << c.detail;
    std::cout << '\n';
  }
  std::cout << (report.ok() ? "assets valid" : "assets INVALID") << " (" << report.seconds << " s)\n";
  return report.ok() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cspmon: runtime verification of event traces against CSP models"};
  app.require_subcommand(1);

  ModelArgs check_m, verify_m, listen_m, stress_m, scen_m, bench_m;

  auto* check = app.add_subcommand("check", "check one event log offline");
  add_model_args(check, check_m, true);
  std::string trace_path;
  bool as_json = false;
  check->add_option("--trace", trace_path, "JSON Lines event log")->required()->check(CLI::ExistingFile);
  check->add_flag("--json", as_json, "print the report as JSON");

  auto* verify = app.add_subcommand("verify", "run the assertions of a model");
  add_model_args(verify, verify_m, false);
  std::vector<std::string> assertion_files;
  verify->add_option("--assertions", assertion_files, "extra assertion files")->check(CLI::ExistingFile);

  auto* listen = app.add_subcommand("listen", "check live events from TCP or WebSocket clients");
  add_model_args(listen, listen_m, true);
  std::string endpoint = "tcp://127.0.0.1:7780";
  std::string on_reject = "halt";
  std::size_t queue = 1024;
  listen->add_option("--endpoint", endpoint, "tcp://host:port or ws://host:port/path")->capture_default_str();
  listen->add_option("--on-reject", on_reject, "halt or reset")
      ->check(CLI::IsMember({"halt", "reset"}))
      ->capture_default_str();
  listen->add_option("--queue", queue, "per-connection queue capacity")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* stress = app.add_subcommand("gen-stress", "write a stress trace of compact events");
  add_model_args(stress, stress_m, false);
  std::size_t n = 10;
  std::string out;
  std::uint64_t seed = 1;
  stress->add_option("--n", n, "events after system_init")->capture_default_str();
  stress->add_option("--out", out, "output file, default stdout");
  stress->add_option("--seed", seed, "speed choice seed")->capture_default_str();

  auto* scen = app.add_subcommand("scenarios", "run a scenario corpus against its expected verdicts");
  add_model_args(scen, scen_m, true);
  std::string scen_dir = std::string(CSPMON_ASSET_DIR) + "/scenarios";
  scen_m.mapping = std::string(CSPMON_ASSET_DIR) + "/mapping.cfg";
  scen->add_option("--dir", scen_dir, "directory with expected.csv")->capture_default_str();

  auto* benchc = app.add_subcommand("bench", "time repeated checks of stress traces or scenarios");
  add_model_args(benchc, bench_m, true);
  bench::BenchConfig cfg;
  std::string bench_scen, csv;
  benchc->add_option("--lengths", cfg.lengths, "events after system_init, per row")->capture_default_str();
  benchc->add_option("--reps", cfg.repetitions, "timed runs per row")->check(CLI::PositiveNumber)->capture_default_str();
  benchc->add_option("--warmup", cfg.warmup, "untimed runs per row")->check(CLI::NonNegativeNumber)->capture_default_str();
  benchc->add_option("--seed", cfg.seed, "stress speed seed")->capture_default_str();
  benchc->add_option("--scenarios", bench_scen, "time a scenario corpus instead");
  benchc->add_option("--csv", csv, "write per-run times as CSV");

  auto* validate = app.add_subcommand("validate", "validate the bundled MASCOT assets");
  std::string asset_dir = CSPMON_ASSET_DIR;
  validate->add_option("--assets", asset_dir, "asset directory")->check(CLI::ExistingDirectory)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kError;
  }

  try {
    if (*check) return cmd_check(check_m, trace_path, as_json);
    if (*verify) {
      const ModelArgs defaults;
      if (assertion_files.empty() && verify_m.spec == defaults.spec) {
        assertion_files.push_back(std::string(CSPMON_ASSET_DIR) + "/assertions.assert");
      }
      return cmd_verify(verify_m, assertion_files);
    }
    if (*listen) return cmd_listen(listen_m, endpoint, on_reject, queue);
    if (*stress) return cmd_gen_stress(stress_m, n, out, seed);
    if (*scen) return cmd_scenarios(scen_m, scen_dir);
    if (*benchc) return cmd_bench(bench_m, cfg, bench_scen, csv);
    if (*validate) return cmd_validate(asset_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
