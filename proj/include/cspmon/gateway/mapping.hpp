#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cspmon/syntax/spec.hpp"

namespace cspmon::gateway {

/// An event as the system under analysis reports it.
struct RawEvent {
  std::string name;
  nlohmann::json fields = nlohmann::json::object();  // flat key -> scalar
  std::optional<double> ts;
};

/// Builds a RawEvent from a JSON object. Fields come from a "fields" object
/// when present, otherwise from the remaining top-level keys. Errors: Format.
RawEvent raw_event_from_json(const nlohmann::json& j);

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Condition {
  std::string field;
  CompareOp op = CompareOp::Eq;
  nlohmann::json value;  // scalar literal
};

/// One payload field of an emitted event.
struct PayloadExpr {
  enum class Kind { Constant, Field, Bin };
  Kind kind = Kind::Constant;
  Value constant;      // Constant
  std::string field;   // Field, Bin
  double scale = 1.0;  // Bin: floor(field * scale)
};

struct MappingRule {
  int priority = 0;
  std::size_t order = 0;  // position in the file; breaks priority ties
  std::string raw_name;
  std::vector<Condition> conditions;
  std::uint32_t channel = 0;
  std::vector<PayloadExpr> payload;
  int line = 0;
};

enum class UnmatchedPolicy { Drop, Error };

struct MappingTable {
  std::vector<MappingRule> rules;  // highest priority first, then file order
  UnmatchedPolicy unmatched = UnmatchedPolicy::Error;
  std::vector<EventId> prelude;
};

/// Parses the mapping format against a resolved spec.
///
///     # comment
///     unmatched = drop | error
///     prelude = system_init, ...
///     rule <priority> <raw-name> [when <field> <op> <literal> (and ...)*]
///          emit <channel>[.<payload>]*
///
/// A payload is a literal (integer, True, False, constructor), `$field`, or
/// `bin($field, scale)`. Errors: Syntax, UnknownChannel, ArityMismatch,
/// BadPayload.
MappingTable parse_mapping(std::string_view text, const ResolvedSpec& spec,
                           const std::string& origin = "<mapping>");
MappingTable load_mapping(const std::string& path, const ResolvedSpec& spec);

/// Dropped when no rule matches under the Drop policy.
struct Dropped {};
using MapResult = std::variant<EventId, Dropped>;

/// First matching rule's event. Errors: UnmatchedEvent, PayloadOutOfRange.
MapResult map_event(const RawEvent& raw, const MappingTable& table, const ResolvedSpec& spec);

}  // namespace cspmon::gateway
