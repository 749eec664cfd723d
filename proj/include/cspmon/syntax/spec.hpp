#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cspmon/core/event_set.hpp"
#include "cspmon/core/value.hpp"
#include "cspmon/syntax/ast.hpp"
#include "cspmon/syntax/ir.hpp"

namespace cspmon {

struct Channel {
  std::string name;
  std::vector<ValueType> payload;
  EventId first_event = 0;
  std::size_t event_count = 1;
};

struct ProcessParam {
  std::string name;
  std::optional<ValueSet> type;  // from an annotation, when present
};

struct ProcessDef {
  std::string name;
  std::vector<ProcessParam> params;
  const ir::ProcNode* body = nullptr;
  std::uint32_t frame_size = 0;
  bool anonymous = false;  // compiled from an assertion operand
};

struct Assertion {
  syntax::AssertKind kind = syntax::AssertKind::DeadlockFree;
  std::uint32_t process = 0;  // subject, or the specification side of [T=
  std::uint32_t impl = 0;     // [T= only
  std::vector<EventId> trace; // [has trace] only
  std::string text;           // canonical source form
  SourcePos pos;
};

/// A fully name-bound specification. Immutable after resolve(); safe to
/// share between threads.
class ResolvedSpec {
 public:
  ResolvedSpec();
  ~ResolvedSpec();
  ResolvedSpec(const ResolvedSpec&) = delete;
  ResolvedSpec& operator=(const ResolvedSpec&) = delete;

  // -- alphabet -------------------------------------------------------------
  const std::vector<Channel>& channels() const { return channels_; }
  std::optional<std::uint32_t> find_channel(std::string_view name) const;
  std::size_t alphabet_size() const { return alphabet_size_; }
  const EventSet& universe() const { return universe_; }

  /// Throws Error(BadPayload) if a value is outside its field type.
  EventId event_id(std::uint32_t channel, std::span<const Value> fields) const;
  std::uint32_t channel_of(EventId e) const;
  std::vector<Value> fields_of(EventId e) const;
  std::string event_name(EventId e) const;

  /// Parses a dotted ground event such as `speed.3` or `foot_pedal_pressed.True`.
  /// Errors: Syntax, UnknownChannel, BadPayload.
  EventId parse_event(std::string_view text) const;

  /// Parses `<e1, e2, ...>`.
  std::vector<EventId> parse_trace_literal(std::string_view text) const;

  // -- values ---------------------------------------------------------------
  std::string value_name(Value v) const;
  std::optional<Value> find_constructor(std::string_view name) const;
  const std::map<std::string, ValueType>& types() const { return types_; }
  const std::map<std::string, ir::RtValue>& constants() const { return constants_; }
  std::optional<std::int64_t> int_constant(std::string_view name) const;
  std::optional<ValueSet> set_constant(std::string_view name) const;

  // -- processes ------------------------------------------------------------
  const std::vector<ProcessDef>& processes() const { return processes_; }
  std::optional<std::uint32_t> find_process(std::string_view name) const;
  const std::vector<Assertion>& assertions() const { return assertions_; }
  std::size_t node_count() const { return proc_nodes_.size(); }
  const ir::ProcNode& node(std::uint32_t id) const { return *proc_nodes_[id]; }

 private:
  friend class Resolver;

  std::vector<Channel> channels_;
  std::map<std::string, std::uint32_t, std::less<>> channel_index_;
  std::size_t alphabet_size_ = 0;
  EventSet universe_;

  std::vector<std::string> ctor_names_;
  std::map<std::string, std::uint32_t, std::less<>> ctor_index_;
  std::map<std::string, ValueType> types_;
  std::map<std::string, ir::RtValue> constants_;

  std::vector<ProcessDef> processes_;
  std::map<std::string, std::uint32_t, std::less<>> process_index_;
  std::vector<Assertion> assertions_;

  std::vector<std::unique_ptr<ir::ValNode>> val_nodes_;
  std::vector<std::unique_ptr<ir::ProcNode>> proc_nodes_;
  std::vector<syntax::Module> modules_;

  EventId ground_event(const syntax::Expr& e) const;
};

/// Binds names, checks payload types, evaluates named sets, and computes the
/// ground alphabet. Modules are processed as one namespace, in order.
/// Errors: UnboundName, TypeMismatch, NonFiniteSet, DuplicateDefinition,
/// ArityMismatch.
std::shared_ptr<ResolvedSpec> resolve(std::vector<syntax::Module> modules);
std::shared_ptr<ResolvedSpec> resolve(const syntax::Module& module);

/// Loads a spec file with its includes, plus optional extra files (such as a
/// separate assertion script), and resolves them together.
std::shared_ptr<ResolvedSpec> load_spec(const std::string& path,
                                        const std::vector<std::string>& extra_files = {});

/// Parses and resolves inline text.
std::shared_ptr<ResolvedSpec> resolve_text(std::string_view text,
                                           const std::string& origin = "<inline>");

}  // namespace cspmon
