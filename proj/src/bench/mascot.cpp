#include "cspmon/bench/mascot.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "cspmon/error.hpp"
#include "cspmon/gateway/trace_file.hpp"
#include "cspmon/refine/refine.hpp"

namespace cspmon::bench {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::size_t to_size(const std::string& s, const std::string& what, int line) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Format, "bad " + what + " '" + s + "'", SourcePos{line, 1});
}

}  // namespace

SpeedLimits SpeedLimits::of(const ResolvedSpec& spec) {
  auto get = [&](const char* name) {
    auto v = spec.int_constant(name);
    if (!v) throw Error(ErrorKind::UnboundName, std::string("the model has no constant ") + name);
    return *v;
  };
  return {get("MaxSpeed"), get("H"), get("A")};
}

bool pedal_after_unsafe_speed(const std::vector<EventId>& trace, const ResolvedSpec& spec) {
  auto limits = SpeedLimits::of(spec);
  auto speed = spec.find_channel("speed");
  auto pedal = spec.find_channel("foot_pedal_pressed");
  auto event = [&](const char* name) -> std::optional<EventId> {
    if (!spec.find_channel(name)) return std::nullopt;
    return spec.parse_event(name);
  };
  const auto hands_on = event("enter_hands_on_mode");
  const auto autonomous = event("enter_autonomous_mode");
  const auto safe = event("enter_safe_state");
  const auto commissioning_on = event("master_commissioning_on");
  const auto commissioning_off = event("master_commissioning_off");
  bool in_hands_on = false;
  bool commissioning = false;  // speeds are not monitored
  bool pending_unsafe = false;
  for (EventId e : trace) {
    auto ch = spec.channel_of(e);
    if (e == hands_on) {
      in_hands_on = true;
    } else if (e == autonomous) {
      in_hands_on = false;
    } else if (e == commissioning_on) {
      commissioning = true;
    } else if (e == commissioning_off) {
      commissioning = false;
    } else if (e == safe) {
      pending_unsafe = false;
      commissioning = false;
    } else if (speed && ch == *speed && !commissioning) {
      auto v = spec.fields_of(e)[0].v;
      if (v > (in_hands_on ? limits.hands_on : limits.autonomous)) pending_unsafe = true;
    } else if (pedal && ch == *pedal && pending_unsafe) {
      return true;
    }
  }
  return false;
}

std::vector<ScenarioAsset> load_scenarios(const std::string& dir) {
  const std::string path = dir + "/expected.csv";
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorKind::Format, "empty scenario table", {}, path);
  auto columns = split(header, ',');
  auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
  };
  auto id = col("id"), file = col("file"), expected = col("expected"), concepts = col("concepts");
  auto length = col("length"), reject = col("reject_index");
  if (!id || !file || !expected) {
    throw Error(ErrorKind::Format, "scenario table needs id, file and expected columns", {1, 1}, path);
  }
  std::vector<ScenarioAsset> out;
  std::string line;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != columns.size()) {
      throw Error(ErrorKind::Format, "expected " + std::to_string(columns.size()) + " cells", {lineno, 1}, path);
    }
    ScenarioAsset a;
    a.id = cells[*id];
    a.file = cells[*file];
    const auto& verdict = cells[*expected];
    if (verdict == "accepted") {
      a.expected = oracle::Outcome::Accepted;
    } else if (verdict == "rejected") {
      a.expected = oracle::Outcome::Rejected;
    } else if (verdict == "diverged") {
      a.expected = oracle::Outcome::Diverged;
    } else {
      throw Error(ErrorKind::Format, "unknown verdict '" + verdict + "'", {lineno, 1}, path);
    }
    if (concepts) {
      for (const auto& c : split(cells[*concepts], ';')) {
        if (!c.empty()) a.concepts.push_back(static_cast<int>(to_size(c, "concept", lineno)));
      }
    }
    if (length && !cells[*length].empty()) a.length = to_size(cells[*length], "length", lineno);
    if (reject && !cells[*reject].empty()) a.reject_index = to_size(cells[*reject], "reject index", lineno);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<ScenarioResult> run_scenarios(const std::string& dir, std::shared_ptr<const ResolvedSpec> spec,
                                          const gateway::MappingTable& table, const std::string& root) {
  std::vector<ScenarioResult> results;
  for (auto& asset : load_scenarios(dir)) {
    ScenarioResult r;
    r.asset = asset;
    try {
      auto start = Clock::now();
      auto trace = gateway::read_trace_file(dir + "/" + asset.file, table, *spec);
      r.report = oracle::check_trace(spec, root, trace);
      r.seconds = since(start);
      r.trace_length = trace.size();
      const auto& v = r.report.verdict;
      r.matches = v.outcome == asset.expected;
      if (asset.length != 0 && trace.size() != asset.length) r.matches = false;
      if (asset.expected == oracle::Outcome::Accepted) {
        r.matches = r.matches && r.report.length == trace.size();
      } else if (asset.reject_index) {
        r.matches = r.matches && v.index == *asset.reject_index;
      }
    } catch (const Error& e) {
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

BenchReport bench_scenarios(const std::string& dir, std::shared_ptr<const ResolvedSpec> spec,
                            const gateway::MappingTable& table, int repetitions, int warmup, const std::string& root) {
  if (repetitions < 1) throw Error(ErrorKind::Format, "repetitions must be at least 1");
  BenchReport report;
  report.environment = environment_note();
  for (const auto& asset : load_scenarios(dir)) {
    BenchRow row;
    row.label = "Scenario " + asset.id;
    try {
      for (int i = 0; i < warmup + repetitions; ++i) {
        auto start = Clock::now();
        auto trace = gateway::read_trace_file(dir + "/" + asset.file, table, *spec);
        auto r = oracle::check_trace(spec, root, trace);
        double took = since(start);
        row.length = trace.size();
        if (r.verdict.outcome != asset.expected) {
          throw Error(ErrorKind::Format, "verdict " + std::string(oracle::to_string(r.verdict.outcome)) +
                                             " differs from the expected one");
        }
        if (i >= warmup) row.seconds.push_back(took);
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

bool ValidationReport::ok() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

ValidationReport validate_assets(const MascotAssets& assets) {
  ValidationReport report;
  auto all = Clock::now();
  auto guarded = [&](const std::string& name, auto&& body) {
    auto start = Clock::now();
    ValidationCheck c;
    c.name = name;
    try {
      body(c);
    } catch (const Error& e) {
      c.passed = false;
      c.detail = e.what();
    }
    c.seconds = since(start);
    report.checks.push_back(std::move(c));
  };

  std::shared_ptr<const ResolvedSpec> spec;
  guarded("load corrected model", [&](ValidationCheck& c) {
    spec = load_spec(assets.model(), {assets.assertions()});
    c.passed = true;
    c.detail = std::to_string(spec->alphabet_size()) + " events, " + std::to_string(spec->assertions().size()) +
               " assertions";
  });
  if (spec) {
    auto results = refine::run_assertions(spec);
    for (const auto& r : results.results) {
      ValidationCheck c;
      c.name = r.assertion ? r.assertion->text : r.summary;
      c.passed = r.holds && !r.error;
      c.detail = r.error ? *r.error : r.summary;
      report.checks.push_back(std::move(c));
    }
  }

  guarded("de-fixed model deadlocks after a pedal press past an unsafe speed", [&](ValidationCheck& c) {
    auto defixed = load_spec(assets.model_defixed());
    auto r = refine::check_deadlock_free(defixed, kMascotDefixedRoot);
    c.detail = r.holds ? "deadlock free" : "witness " + refine::format_trace(*defixed, r.witness);
    c.passed = !r.holds && pedal_after_unsafe_speed(r.witness, *defixed);
  });

  if (spec) {
    guarded("scenario corpus", [&](ValidationCheck& c) {
      auto table = gateway::load_mapping(assets.mapping(), *spec);
      auto results = run_scenarios(assets.scenarios(), spec, table);
      std::size_t good = 0;
      for (const auto& r : results) {
        ValidationCheck sc;
        sc.name = "scenario " + r.asset.id;
        sc.passed = r.matches && !r.error;
        sc.seconds = r.seconds;
        if (r.error) {
          sc.detail = *r.error;
        } else {
          sc.detail = std::string(oracle::to_string(r.report.verdict.outcome)) + " at " +
                      std::to_string(r.report.verdict.index) + ", length " + std::to_string(r.trace_length);
        }
        good += sc.passed;
        report.checks.push_back(std::move(sc));
      }
      c.passed = good == results.size() && !results.empty();
      c.detail = std::to_string(good) + "/" + std::to_string(results.size()) + " as expected";
    });
  }
  report.seconds = since(all);
  return report;
}

}  // namespace cspmon::bench
