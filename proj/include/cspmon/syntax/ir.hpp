#pragma once

// Resolved intermediate form of values and processes. Names are bound:
// variables are frame slots, constants are folded, channels are indices.
// Nodes are owned by the ResolvedSpec and referenced by raw pointer.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "cspmon/core/event_set.hpp"
#include "cspmon/core/value.hpp"
#include "cspmon/error.hpp"

namespace cspmon {
class ResolvedSpec;
}

namespace cspmon::ir {

/// A channel with zero or more leading fields filled in. A complete event
/// has as many fields as the channel's arity.
struct EventPrefix {
  std::uint32_t channel = 0;
  std::vector<Value> fields;
  bool operator==(const EventPrefix&) const = default;
};

/// Runtime value of the expression language.
using RtValue = std::variant<Value, ValueSet, EventPrefix, EventSet>;

enum class ValOp {
  Const,
  Var,
  Neg,
  Not,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Dot,
  SetLit,
  Range,
  ChanSet,
  Union,
  Diff,
  Inter,
  Member,
  Card,
};

struct ValNode {
  ValOp op = ValOp::Const;
  RtValue constant;
  std::uint32_t slot = 0;
  std::vector<const ValNode*> kids;
  bool closed = true;  // no free variables
  SourcePos pos;
};

using Env = std::span<const Value>;

constexpr std::uint32_t kNoSlot = 0xffffffffu;

enum class ProcOp {
  Stop,
  Skip,
  Prefix,
  ExtChoice,
  IntChoice,
  RepExtChoice,
  Seq,
  GenPar,
  AlphaPar,
  Interleave,
  Hide,
  If,
  Call,
};

struct PrefixField {
  bool input = false;
  const ValNode* value = nullptr;        // output/dot fields
  std::uint32_t slot = kNoSlot;          // input binder; kNoSlot for `?_`
  const ValNode* restriction = nullptr;  // optional input restriction
};

struct ProcNode {
  ProcOp op = ProcOp::Stop;
  std::uint32_t id = 0;
  std::vector<const ProcNode*> kids;
  std::vector<const ValNode*> vals;
  std::uint32_t channel = 0;          // Prefix
  std::vector<PrefixField> fields;    // Prefix
  std::uint32_t slot = kNoSlot;       // RepExtChoice binder
  std::uint32_t def = 0;              // Call target
  std::vector<std::uint32_t> captured;  // free slots, sorted (Prefix)
  std::uint32_t frame_size = 0;       // slots of the enclosing definition
  SourcePos pos;
};

/// Evaluates a value node in an environment; throws Error(TypeMismatch)
/// on ill-typed operands.
RtValue evaluate(const ResolvedSpec& spec, const ValNode& node, Env env);

Value evaluate_scalar(const ResolvedSpec& spec, const ValNode& node, Env env);
bool evaluate_bool(const ResolvedSpec& spec, const ValNode& node, Env env);
ValueSet evaluate_value_set(const ResolvedSpec& spec, const ValNode& node, Env env);
EventSet evaluate_event_set(const ResolvedSpec& spec, const ValNode& node, Env env);

/// Converts a runtime value to an event set: complete events become
/// singletons, partial prefixes expand to all matching events.
EventSet to_event_set(const ResolvedSpec& spec, const RtValue& v, SourcePos pos);

}  // namespace cspmon::ir
