#include "cspmon/gateway/session.hpp"

#include "cspmon/error.hpp"

namespace cspmon::gateway {

using nlohmann::json;
using oracle::Outcome;
using oracle::SessionStatus;

json verdict_frame(const oracle::Verdict& v, const ResolvedSpec& spec) {
  json acceptable = json::array();
  for (EventId e : v.acceptable) acceptable.push_back(spec.event_name(e));
  return {{"index", v.index}, {"outcome", std::string(oracle::to_string(v.outcome))}, {"acceptable", acceptable}};
}

json error_frame(const std::string& message) { return {{"error", message}}; }

GatewaySession::GatewaySession(std::shared_ptr<const ResolvedSpec> spec, const std::string& root,
                               std::shared_ptr<const MappingTable> table, OnReject policy,
                               oracle::MonitorOptions options)
    : spec_(spec),
      table_(std::move(table)),
      policy_(policy),
      monitor_(std::make_shared<oracle::Engine>(spec, options.limits), root, std::move(options)) {
  step_prelude();
}

void GatewaySession::step_prelude() {
  prelude_failure_.reset();
  for (EventId e : table_->prelude) {
    if (monitor_.status() == SessionStatus::Rejected || monitor_.status() == SessionStatus::Diverged) break;
    auto v = monitor_.step(e);
    if (v.outcome != Outcome::Accepted) {
      prelude_failure_ = "prelude event " + spec_->event_name(e) + " is " + std::string(oracle::to_string(v.outcome));
    }
  }
  if (!prelude_failure_ && monitor_.status() == SessionStatus::Diverged) prelude_failure_ = "the model diverges";
}

Reply GatewaySession::handle(std::string_view message) {
  json j;
  try {
    j = json::parse(message);
  } catch (const json::parse_error& e) {
    return {error_frame(std::string("malformed JSON: ") + e.what()), true};
  }
  if (j.is_object() && j.contains("end")) {
    return {json{{"done", true}, {"verdicts", verdicts_}}, true};
  }
  try {
    if (j.is_object() && j.contains("event")) {
      if (!j["event"].is_string()) throw Error(ErrorKind::Format, "\"event\" must be a string");
      return handle(LogItem{CompactEvent{j["event"].get<std::string>()}});
    }
    return handle(LogItem{raw_event_from_json(j)});
  } catch (const Error& e) {
    return {error_frame(e.what()), true};
  }
}

Reply GatewaySession::handle(const LogItem& item) {
  if (prelude_failure_) return {error_frame(*prelude_failure_), true};
  if (monitor_.status() == SessionStatus::Rejected || monitor_.status() == SessionStatus::Diverged) {
    return {error_frame("session is " + std::string(oracle::to_string(monitor_.status()))), true};
  }
  MapResult mapped;
  try {
    mapped = map_item(item, *table_, *spec_);
  } catch (const Error& e) {
    return {error_frame(e.what()), true};
  }
  if (std::holds_alternative<Dropped>(mapped)) return {};
  auto v = monitor_.step(std::get<EventId>(mapped));
  ++verdicts_;
  Reply r{verdict_frame(v, *spec_), false};
  if (v.outcome != Outcome::Accepted) {
    if (policy_ == OnReject::Halt) {
      r.halt = true;
    } else {
      monitor_.reset();
      step_prelude();
    }
  }
  return r;
}

std::vector<json> offline_verdicts(const std::string& path, std::shared_ptr<const ResolvedSpec> spec,
                                   const std::string& root, const MappingTable& table) {
  auto trace = read_trace_file(path, table, *spec);
  auto session = oracle::open_session(spec, root);
  std::vector<json> frames;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto v = session.step(trace[i]);
    if (i >= table.prelude.size()) frames.push_back(verdict_frame(v, *spec));
    if (v.outcome != Outcome::Accepted) break;
  }
  return frames;
}

}  // namespace cspmon::gateway
