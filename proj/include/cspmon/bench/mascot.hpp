#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cspmon/bench/stress.hpp"
#include "cspmon/gateway/mapping.hpp"
#include "cspmon/oracle/monitor.hpp"

namespace cspmon::bench {

inline constexpr const char* kMascotRoot = "MASCOT_SAFETY_SYSTEM";
inline constexpr const char* kMascotDefixedRoot = "MASCOT_SAFETY_SYSTEM_DEFIXED";

/// File locations inside a MASCOT asset directory.
struct MascotAssets {
  std::string dir;

  std::string model() const { return dir + "/model.csp"; }
  std::string model_defixed() const { return dir + "/model_defixed.csp"; }
  std::string assertions() const { return dir + "/assertions.assert"; }
  std::string mapping() const { return dir + "/mapping.cfg"; }
  std::string scenarios() const { return dir + "/scenarios"; }
};

/// Speed limits read from the model's constants.
struct SpeedLimits {
  std::int64_t max_speed = 0;
  std::int64_t hands_on = 0;    // H
  std::int64_t autonomous = 0;  // A

  /// Errors: UnboundName when a constant is missing.
  static SpeedLimits of(const ResolvedSpec& spec);
};

/// True when the trace has a pedal event after a speed that is over the
/// limit of the mode current at that point, with no safe state between them.
/// Speeds during master commissioning are unmonitored and never count.
bool pedal_after_unsafe_speed(const std::vector<EventId>& trace, const ResolvedSpec& spec);

struct ScenarioAsset {
  std::string id;
  std::string file;  // relative to the scenario directory
  oracle::Outcome expected = oracle::Outcome::Accepted;
  std::vector<int> concepts;
  std::size_t length = 0;                   // mapped events, prelude included
  std::optional<std::size_t> reject_index;  // for expected rejections
};

/// Reads `expected.csv`. Errors: Io, Format.
std::vector<ScenarioAsset> load_scenarios(const std::string& dir);

struct ScenarioResult {
  ScenarioAsset asset;
  oracle::TraceReport report;
  std::size_t trace_length = 0;
  double seconds = 0;  // read, map and check
  bool matches = false;
  std::optional<std::string> error;
};

/// Offline check of every scenario against its expected verdict, length and
/// rejection point.
std::vector<ScenarioResult> run_scenarios(const std::string& dir, std::shared_ptr<const ResolvedSpec> spec,
                                          const gateway::MappingTable& table, const std::string& root = kMascotRoot);

/// Times `repetitions` offline checks of each scenario, one row per
/// scenario labelled `Scenario <id>`.
BenchReport bench_scenarios(const std::string& dir, std::shared_ptr<const ResolvedSpec> spec,
                            const gateway::MappingTable& table, int repetitions, int warmup = 1,
                            const std::string& root = kMascotRoot);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  double seconds = 0;

  bool ok() const;
};

/// Assertions of the corrected model (all must hold), deadlock of the
/// de-fixed model with a pedal-after-unsafe-speed witness, and every
/// scenario verdict.
ValidationReport validate_assets(const MascotAssets& assets);

}  // namespace cspmon::bench
