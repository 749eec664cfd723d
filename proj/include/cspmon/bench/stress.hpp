#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cspmon/syntax/spec.hpp"

namespace cspmon::bench {

/// `system_init` followed by n events in repeating blocks: pedal down and
/// hands-on mode, a speed reading and its approval, pedal up and autonomous
/// mode, another reading. Speeds stay within the autonomous limit `A`, so the
/// MASCOT model accepts every such trace. Errors: UnknownChannel when the
/// spec lacks the MASCOT events; UnboundName when it has no constant `A`.
std::vector<EventId> generate_stress_trace(std::size_t n, const ResolvedSpec& spec, std::uint64_t seed = 1);

/// One compact record per event, `{"event":"speed.1"}`.
void write_compact_log(const std::vector<EventId>& trace, const ResolvedSpec& spec, std::ostream& out);

struct BenchConfig {
  std::vector<std::size_t> lengths{10, 100, 1000, 10000, 100000};  // events after the prelude
  int repetitions = 10;
  int warmup = 1;
  std::string root = "MASCOT_SAFETY_SYSTEM";
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::string label;
  std::size_t length = 0;  // trace length including the prelude
  std::vector<double> seconds;
  std::optional<std::string> error;

  double mean() const;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double load_seconds = 0;  // parse and resolve, measured once
  std::string environment;
};

/// Generates each trace once and times `repetitions` cold checks of it.
/// Oracle errors end that row and are kept in it. Errors: Format for an
/// invalid config.
BenchReport run_bench(const BenchConfig& cfg, std::shared_ptr<const ResolvedSpec> spec);

/// Columns label, length, run_index, seconds.
void write_csv(const BenchReport& report, std::ostream& out);

/// Length and mean seconds per row, aligned.
std::string format_table(const BenchReport& report);

/// Compiler, build type and hardware threads.
std::string environment_note();

}  // namespace cspmon::bench
