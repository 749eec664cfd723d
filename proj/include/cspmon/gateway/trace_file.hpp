#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cspmon/gateway/mapping.hpp"

namespace cspmon::gateway {

/// A pre-mapped event given by name, `{"event": "speed.3"}`.
struct CompactEvent {
  std::string event;
};

/// One record of an event log or the wire protocol.
using LogItem = std::variant<RawEvent, CompactEvent>;

struct LogEntry {
  int line = 0;
  LogItem item;
};

/// Parses one JSON object. Errors: Format.
LogItem parse_log_item(std::string_view text);

/// Reads a JSON Lines event log; blank lines are skipped. Errors: Io, and
/// Format citing the line number.
std::vector<LogEntry> read_event_log(const std::string& path);

/// Maps one entry. Compact events bypass the table. Errors: as map_event,
/// plus UnknownChannel/BadPayload for compact events.
MapResult map_item(const LogItem& item, const MappingTable& table, const ResolvedSpec& spec);

/// The table's prelude followed by the mapped events of the log, dropped
/// entries elided. Errors carry the line number.
std::vector<EventId> read_trace_file(const std::string& path, const MappingTable& table,
                                     const ResolvedSpec& spec);

}  // namespace cspmon::gateway
