#include "cspmon/gateway/trace_file.hpp"

#include <fstream>

#include "cspmon/error.hpp"

namespace cspmon::gateway {

using nlohmann::json;

LogItem parse_log_item(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Format, std::string("malformed JSON: ") + e.what());
  }
  if (j.is_object()) {
    if (auto ev = j.find("event"); ev != j.end()) {
      if (!ev->is_string()) throw Error(ErrorKind::Format, "\"event\" must be a string");
      return CompactEvent{ev->get<std::string>()};
    }
  }
  return raw_event_from_json(j);
}

std::vector<LogEntry> read_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open event log '" + path + "'");
  std::vector<LogEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back({lineno, parse_log_item(line)});
    } catch (const Error& e) {
      throw Error(e.kind(), e.detail(), SourcePos{lineno, 1}, path);
    }
  }
  return out;
}

MapResult map_item(const LogItem& item, const MappingTable& table, const ResolvedSpec& spec) {
  if (const auto* c = std::get_if<CompactEvent>(&item)) return spec.parse_event(c->event);
  return map_event(std::get<RawEvent>(item), table, spec);
}

std::vector<EventId> read_trace_file(const std::string& path, const MappingTable& table,
                                     const ResolvedSpec& spec) {
  auto entries = read_event_log(path);
  std::vector<EventId> trace = table.prelude;
  for (const auto& entry : entries) {
    try {
      auto r = map_item(entry.item, table, spec);
      if (const auto* e = std::get_if<EventId>(&r)) trace.push_back(*e);
    } catch (const Error& e) {
      throw Error(e.kind(), e.detail(), SourcePos{entry.line, 1}, path);
    }
  }
  return trace;
}

}  // namespace cspmon::gateway
