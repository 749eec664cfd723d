#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cspmon/lts/frontier.hpp"

namespace cspmon::oracle {

enum class Outcome { Accepted, Rejected, Diverged };
enum class SessionStatus { Running, Rejected, Diverged, Terminated };

std::string_view to_string(Outcome o);
std::string_view to_string(SessionStatus s);

struct Verdict {
  Outcome outcome = Outcome::Accepted;
  std::size_t index = 0;              // position of the judged event
  std::vector<EventId> acceptable;    // filled on Rejected
  std::size_t frontier_size = 0;
};

struct TraceReport {
  std::string root;
  Verdict verdict;
  SessionStatus status = SessionStatus::Running;
  std::size_t length = 0;  // events accepted before the run stopped
  std::chrono::nanoseconds elapsed{0};
  std::optional<std::vector<std::chrono::nanoseconds>> per_event;
};

using LogSink = std::function<void(const TraceReport&)>;

struct MonitorOptions {
  lts::Limits limits;
  bool record_timings = false;
  LogSink sink;  // receives the report of a session when it is reset
};

/// The LTS and frontier cache a session steps through. One engine may serve
/// several sessions in turn, never concurrently.
class Engine {
 public:
  explicit Engine(std::shared_ptr<const ResolvedSpec> spec, lts::Limits limits = {})
      : lts_(std::move(spec), limits), store_(lts_) {}
  lts::Lts& lts() { return lts_; }
  lts::FrontierStore& store() { return store_; }

 private:
  lts::Lts lts_;
  lts::FrontierStore store_;
};

/// Incremental trace-membership monitor over one root process.
class MonitorSession {
 public:
  /// Errors: UnboundName for an unknown root; ArityMismatch if it takes
  /// parameters.
  MonitorSession(std::shared_ptr<Engine> engine, const std::string& root, MonitorOptions options = {});
  MonitorSession(std::shared_ptr<Engine> engine, std::uint32_t root_def, MonitorOptions options = {});

  /// Judges the next event. Errors: SessionNotRunning once Rejected or
  /// Diverged; StateSpaceExceeded.
  Verdict step(EventId e);

  SessionStatus status() const { return status_; }
  const std::vector<EventId>& trace() const { return trace_; }
  const std::string& root() const { return root_; }
  const ResolvedSpec& spec() { return engine_->lts().spec(); }

  /// Visible events the model offers next; empty unless Running.
  std::vector<EventId> acceptable_next();

  /// True when the model can terminate successfully here.
  bool can_terminate() const;

  std::size_t frontier_size() const;
  const std::vector<lts::TermId>& frontier_states() const;
  Engine& engine() { return *engine_; }

  TraceReport report() const;

  /// Emits the current report to the sink and restarts from the root.
  void reset();

 private:
  void open();

  std::shared_ptr<Engine> engine_;
  std::uint32_t root_def_ = 0;
  std::string root_;
  MonitorOptions options_;
  lts::FrontierId frontier_ = 0;
  SessionStatus status_ = SessionStatus::Running;
  std::vector<EventId> trace_;
  Verdict last_;
  std::chrono::nanoseconds elapsed_{0};
  std::vector<std::chrono::nanoseconds> timings_;
};

MonitorSession open_session(std::shared_ptr<const ResolvedSpec> spec, const std::string& root,
                            MonitorOptions options = {});
Verdict step_event(MonitorSession& s, EventId e);
std::vector<EventId> acceptable_next(MonitorSession& s);
void reset_session(MonitorSession& s);

/// Folds step_event over the trace, stopping at the first verdict that is
/// not Accepted.
TraceReport check_trace(std::shared_ptr<const ResolvedSpec> spec, const std::string& root,
                        const std::vector<EventId>& trace, MonitorOptions options = {});
TraceReport check_trace(MonitorSession& s, const std::vector<EventId>& trace);

}  // namespace cspmon::oracle
