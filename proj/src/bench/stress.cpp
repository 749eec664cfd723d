#include "cspmon/bench/stress.hpp"

#include <chrono>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "cspmon/error.hpp"
#include "cspmon/oracle/monitor.hpp"

namespace cspmon::bench {

std::vector<EventId> generate_stress_trace(std::size_t n, const ResolvedSpec& spec, std::uint64_t seed) {
  auto limit = spec.int_constant("A");
  if (!limit) throw Error(ErrorKind::UnboundName, "stress traces need the autonomous speed limit constant A");
  const EventId init = spec.parse_event("system_init");
  const EventId down = spec.parse_event("foot_pedal_pressed.True");
  const EventId up = spec.parse_event("foot_pedal_pressed.False");
  const EventId hands_on = spec.parse_event("enter_hands_on_mode");
  const EventId autonomous = spec.parse_event("enter_autonomous_mode");
  const EventId ok = spec.parse_event("speed_ok");
  std::vector<EventId> speeds;
  for (std::int64_t v = 0; v <= *limit; ++v) speeds.push_back(spec.parse_event("speed." + std::to_string(v)));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, speeds.size() - 1);
  std::vector<EventId> trace;
  trace.reserve(n + 1);
  trace.push_back(init);
  for (std::size_t block = 0; trace.size() < n + 1; ++block) {
    bool pressed = block % 2 == 0;
    for (EventId e : {pressed ? down : up, pressed ? hands_on : autonomous, speeds[pick(rng)], ok}) {
      if (trace.size() == n + 1) break;
      trace.push_back(e);
    }
  }
  return trace;
}

void write_compact_log(const std::vector<EventId>& trace, const ResolvedSpec& spec, std::ostream& out) {
  for (EventId e : trace) out << nlohmann::json{{"event", spec.event_name(e)}}.dump() << '\n';
}

double BenchRow::mean() const {
  if (seconds.empty()) return 0;
  return std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
}

BenchReport run_bench(const BenchConfig& cfg, std::shared_ptr<const ResolvedSpec> spec) {
  if (cfg.repetitions < 1) throw Error(ErrorKind::Format, "repetitions must be at least 1");
  if (cfg.warmup < 0) throw Error(ErrorKind::Format, "warmup must not be negative");
  BenchReport report;
  report.environment = environment_note();
  for (std::size_t n : cfg.lengths) {
    BenchRow row;
    row.length = n + 1;
    row.label = "stress " + std::to_string(n + 1);
    try {
      auto trace = generate_stress_trace(n, *spec, cfg.seed);
      for (int i = 0; i < cfg.warmup + cfg.repetitions; ++i) {
        auto start = std::chrono::steady_clock::now();
        auto r = oracle::check_trace(spec, cfg.root, trace);
        std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        if (r.verdict.outcome != oracle::Outcome::Accepted) {
          throw Error(ErrorKind::Format, "generated trace was " + std::string(oracle::to_string(r.verdict.outcome)) +
                                             " at event " + std::to_string(r.verdict.index));
        }
        if (i >= cfg.warmup) row.seconds.push_back(took.count());
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_csv(const BenchReport& report, std::ostream& out) {
  out << "label,length,run_index,seconds\n";
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.seconds.size(); ++i) {
      out << row.label << ',' << row.length << ',' << i << ',' << std::setprecision(9) << row.seconds[i] << '\n';
    }
  }
}

std::string format_table(const BenchReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "label" << std::right << std::setw(10) << "length" << std::setw(14)
      << "mean (s)" << std::setw(6) << "runs" << '\n';
  for (const auto& row : report.rows) {
    out << std::left << std::setw(16) << row.label << std::right << std::setw(10) << row.length;
    if (row.error) {
      out << "  error: " << *row.error << '\n';
      continue;
    }
    out << std::setw(14) << std::fixed << std::setprecision(6) << row.mean() << std::setw(6) << row.seconds.size()
        << '\n';
  }
  if (report.load_seconds > 0) {
    out << "spec load " << std::fixed << std::setprecision(6) << report.load_seconds << " s\n";
  }
  if (!report.environment.empty()) out << report.environment << '\n';
  return out.str();
}

std::string environment_note() {
  std::ostringstream out;
#if defined(__clang__)
  out << "clang " << __clang_major__ << '.' << __clang_minor__;
#elif defined(__GNUC__)
  out << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__;
#else
  out << "unknown compiler";
#endif
#ifdef NDEBUG
  out << ", optimized";
#else
  out << ", debug";
#endif
  out << ", " << std::thread::hardware_concurrency() << " hardware threads";
  return out.str();
}

}  // namespace cspmon::bench
