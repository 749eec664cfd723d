#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cspmon/gateway/trace_file.hpp"
#include "cspmon/oracle/monitor.hpp"

namespace cspmon::gateway {

enum class OnReject { Halt, Reset };

/// `{"index": i, "outcome": "...", "acceptable": [...]}`.
nlohmann::json verdict_frame(const oracle::Verdict& v, const ResolvedSpec& spec);
nlohmann::json error_frame(const std::string& message);

struct Reply {
  std::optional<nlohmann::json> frame;  // none for a dropped event
  bool halt = false;                    // the connection should close after this frame
};

/// Maps and judges the messages of one connection, in arrival order. The
/// prelude is stepped on construction and after every reset.
class GatewaySession {
 public:
  GatewaySession(std::shared_ptr<const ResolvedSpec> spec, const std::string& root,
                 std::shared_ptr<const MappingTable> table, OnReject policy,
                 oracle::MonitorOptions options = {});

  /// One wire message. `{"end": true}` finishes the stream with
  /// `{"done": true, "verdicts": n}`.
  Reply handle(std::string_view message);
  Reply handle(const LogItem& item);

  std::size_t verdicts() const { return verdicts_; }
  oracle::MonitorSession& monitor() { return monitor_; }

 private:
  void step_prelude();

  std::shared_ptr<const ResolvedSpec> spec_;
  std::shared_ptr<const MappingTable> table_;
  OnReject policy_;
  oracle::MonitorSession monitor_;
  std::size_t verdicts_ = 0;
  std::optional<std::string> prelude_failure_;
};

/// The frames an offline check produces for an event log: read_trace_file,
/// then one verdict frame per stepped event after the prelude, up to the
/// first verdict that is not Accepted.
std::vector<nlohmann::json> offline_verdicts(const std::string& path, std::shared_ptr<const ResolvedSpec> spec,
                                             const std::string& root, const MappingTable& table);

}  // namespace cspmon::gateway
