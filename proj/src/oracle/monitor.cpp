#include "cspmon/oracle/monitor.hpp"

namespace cspmon::oracle {

using Clock = std::chrono::steady_clock;

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Accepted: return "accepted";
    case Outcome::Rejected: return "rejected";
    case Outcome::Diverged: return "diverged";
  }
  return "?";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Running: return "running";
    case SessionStatus::Rejected: return "rejected";
    case SessionStatus::Diverged: return "diverged";
    case SessionStatus::Terminated: return "terminated";
  }
  return "?";
}

namespace {

std::uint32_t find_root(Engine& engine, const std::string& root) {
  auto def = engine.lts().spec().find_process(root);
  if (!def) throw Error(ErrorKind::UnboundName, "unknown process '" + root + "'");
  return *def;
}

}  // namespace

MonitorSession::MonitorSession(std::shared_ptr<Engine> engine, const std::string& root,
                               MonitorOptions options)
    : MonitorSession(engine, find_root(*engine, root), std::move(options)) {}

MonitorSession::MonitorSession(std::shared_ptr<Engine> engine, std::uint32_t root_def,
                               MonitorOptions options)
    : engine_(std::move(engine)), root_def_(root_def), options_(std::move(options)) {
  root_ = engine_->lts().spec().processes().at(root_def_).name;
  open();
}

void MonitorSession::open() {
  auto& store = engine_->store();
  lts::TermId t = engine_->lts().process(root_def_);
  frontier_ = store.close(std::span<const lts::TermId>(&t, 1));
  trace_.clear();
  timings_.clear();
  elapsed_ = {};
  last_ = Verdict{};
  last_.frontier_size = store.info(frontier_).states.size();
  status_ = SessionStatus::Running;
  if (store.info(frontier_).divergent) {
    status_ = SessionStatus::Diverged;
    last_.outcome = Outcome::Diverged;
  } else if (store.edges(frontier_).empty() && store.info(frontier_).can_tick) {
    status_ = SessionStatus::Terminated;
  }
}

Verdict MonitorSession::step(EventId e) {
  if (status_ == SessionStatus::Rejected || status_ == SessionStatus::Diverged) {
    throw Error(ErrorKind::SessionNotRunning,
                "session is " + std::string(to_string(status_)) + " at event " + std::to_string(last_.index));
  }
  auto start = Clock::now();
  auto& store = engine_->store();
  Verdict v;
  v.index = trace_.size();
  std::optional<lts::FrontierId> next;
  if (status_ == SessionStatus::Running) next = store.step(frontier_, e);
  if (!next) {
    v.outcome = Outcome::Rejected;
    for (const auto& edge : store.edges(frontier_)) v.acceptable.push_back(edge.event);
    v.frontier_size = store.info(frontier_).states.size();
    status_ = SessionStatus::Rejected;
  } else {
    frontier_ = *next;
    trace_.push_back(e);
    const auto& info = store.info(frontier_);
    v.frontier_size = info.states.size();
    if (info.divergent) {
      v.outcome = Outcome::Diverged;
      status_ = SessionStatus::Diverged;
    } else {
      v.outcome = Outcome::Accepted;
      if (info.can_tick && store.edges(frontier_).empty()) status_ = SessionStatus::Terminated;
    }
  }
  auto took = Clock::now() - start;
  elapsed_ += took;
  if (options_.record_timings) timings_.push_back(took);
  last_ = v;
  return v;
}

std::vector<EventId> MonitorSession::acceptable_next() {
  if (status_ != SessionStatus::Running) return {};
  std::vector<EventId> out;
  for (const auto& edge : engine_->store().edges(frontier_)) out.push_back(edge.event);
  return out;
}

bool MonitorSession::can_terminate() const {
  return status_ != SessionStatus::Rejected && engine_->store().info(frontier_).can_tick;
}

std::size_t MonitorSession::frontier_size() const { return engine_->store().info(frontier_).states.size(); }

const std::vector<lts::TermId>& MonitorSession::frontier_states() const {
  return engine_->store().info(frontier_).states;
}

TraceReport MonitorSession::report() const {
  TraceReport r;
  r.root = root_;
  r.verdict = last_;
  r.status = status_;
  r.length = trace_.size();
  r.elapsed = elapsed_;
  if (options_.record_timings) r.per_event = timings_;
  return r;
}

void MonitorSession::reset() {
  if (options_.sink) options_.sink(report());
  open();
}

MonitorSession open_session(std::shared_ptr<const ResolvedSpec> spec, const std::string& root,
                            MonitorOptions options) {
  auto limits = options.limits;
  return MonitorSession(std::make_shared<Engine>(std::move(spec), limits), root, std::move(options));
}

Verdict step_event(MonitorSession& s, EventId e) { return s.step(e); }

std::vector<EventId> acceptable_next(MonitorSession& s) { return s.acceptable_next(); }

void reset_session(MonitorSession& s) { s.reset(); }

TraceReport check_trace(MonitorSession& s, const std::vector<EventId>& trace) {
  auto start = Clock::now();
  if (s.status() == SessionStatus::Running || s.status() == SessionStatus::Terminated) {
    for (EventId e : trace) {
      if (s.step(e).outcome != Outcome::Accepted) break;
    }
  }
  TraceReport r = s.report();
  r.elapsed = Clock::now() - start;
  return r;
}

TraceReport check_trace(std::shared_ptr<const ResolvedSpec> spec, const std::string& root,
                        const std::vector<EventId>& trace, MonitorOptions options) {
  auto start = Clock::now();
  MonitorSession s = open_session(std::move(spec), root, std::move(options));
  TraceReport r = check_trace(s, trace);
  r.elapsed = Clock::now() - start;
  return r;
}

}  // namespace cspmon::oracle
