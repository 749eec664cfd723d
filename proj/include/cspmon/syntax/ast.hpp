#pragma once

// Abstract syntax for the CSP subset. One uniform expression node covers both
// the value language and the process language, as in machine-readable CSP;
// the resolver decides which is which.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "cspmon/error.hpp"

namespace cspmon::syntax {

/// Source location attached to AST nodes. Locations are diagnostic metadata
/// and never take part in structural equality.
struct Loc {
  SourcePos pos;
  bool operator==(const Loc&) const { return true; }
};

enum class ExprKind {
  // value language
  IntLit,
  BoolLit,
  Name,
  Apply,    // name(args): process call or builtin function
  Dot,      // a.b
  Unary,    // text = "-" | "not"
  Binary,   // text = operator
  SetLit,   // {a, b}
  RangeSet, // {lo..hi}
  ChanSet,  // {| c, d.1 |}
  Events,
  // process language
  Stop,
  Skip,
  Prefix,        // text = channel, fields, args[0] = continuation
  ExtChoice,     // args = {l, r}
  IntChoice,     // args = {l, r}
  RepExtChoice,  // text = binder, args = {set, body}
  Seq,           // args = {l, r}
  GenPar,        // args = {l, sync, r}
  AlphaPar,      // args = {l, alphaL, alphaR, r}
  Interleave,    // args = {l, r}
  Hide,          // args = {p, set}
  If,            // args = {cond, then, else}
};

class Expr;

/// Shared immutable pointer to an expression with deep equality.
class ExprRef {
 public:
  ExprRef() = default;
  ExprRef(std::shared_ptr<const Expr> p) : ptr_(std::move(p)) {}  // NOLINT

  const Expr& operator*() const { return *ptr_; }
  const Expr* operator->() const { return ptr_.get(); }
  const Expr* get() const { return ptr_.get(); }
  explicit operator bool() const { return static_cast<bool>(ptr_); }

  friend bool operator==(const ExprRef& a, const ExprRef& b);

 private:
  std::shared_ptr<const Expr> ptr_;
};

/// One field of an event pattern in a prefix: `.e`, `!e`, `?x`, `?x:S`.
struct EventField {
  enum class Kind { Dot, Output, Input };
  Kind kind = Kind::Dot;
  ExprRef value;        // Dot, Output
  std::string binder;   // Input; "_" is the wildcard
  ExprRef restriction;  // Input, optional

  bool operator==(const EventField&) const = default;
};

class Expr {
 public:
  ExprKind kind = ExprKind::Stop;
  std::string text;
  std::int64_t number = 0;
  std::vector<ExprRef> args;
  std::vector<EventField> fields;
  Loc loc;

  bool operator==(const Expr&) const = default;
};

inline bool operator==(const ExprRef& a, const ExprRef& b) {
  if (a.ptr_ == b.ptr_) return true;
  if (!a.ptr_ || !b.ptr_) return false;
  return *a.ptr_ == *b.ptr_;
}

ExprRef make_expr(ExprKind kind, std::vector<ExprRef> args = {}, std::string text = {},
                  std::int64_t number = 0, SourcePos pos = {});
ExprRef make_int(std::int64_t v, SourcePos pos = {});
ExprRef make_bool(bool v, SourcePos pos = {});
ExprRef make_name(std::string name, SourcePos pos = {});
ExprRef make_prefix(std::string channel, std::vector<EventField> fields, ExprRef cont,
                    SourcePos pos = {});

struct ChannelDecl {
  std::vector<std::string> names;
  std::vector<ExprRef> payload;  // type expressions, one per field
  Loc loc;
  bool operator==(const ChannelDecl&) const = default;
};

struct DatatypeDecl {
  std::string name;
  std::vector<std::string> constructors;
  Loc loc;
  bool operator==(const DatatypeDecl&) const = default;
};

struct NametypeDecl {
  std::string name;
  ExprRef value;
  Loc loc;
  bool operator==(const NametypeDecl&) const = default;
};

struct Param {
  std::string name;
  ExprRef type;  // optional annotation `x : T`
  bool operator==(const Param&) const = default;
};

/// `Name = e` or `Name(params) = e`; constant or process, decided at resolve time.
struct Definition {
  std::string name;
  bool has_params = false;
  std::vector<Param> params;
  ExprRef body;
  Loc loc;
  bool operator==(const Definition&) const = default;
};

enum class AssertKind { HasTrace, TracesRefinement, DeadlockFree, DivergenceFree, Deterministic };

struct AssertDecl {
  AssertKind kind = AssertKind::DeadlockFree;
  ExprRef process;            // subject; the specification side for [T=
  ExprRef impl;               // TracesRefinement only
  std::vector<ExprRef> trace; // HasTrace only
  Loc loc;
  bool operator==(const AssertDecl&) const = default;
};

struct IncludeDecl {
  std::string path;
  Loc loc;
  bool operator==(const IncludeDecl&) const = default;
};

using Declaration =
    std::variant<ChannelDecl, DatatypeDecl, NametypeDecl, Definition, AssertDecl, IncludeDecl>;

/// An unresolved parsed source file.
struct Module {
  std::string origin;
  std::vector<Declaration> decls;

  /// Structural equality of declarations; the origin label is ignored.
  bool operator==(const Module& other) const { return decls == other.decls; }

  std::size_t channel_count() const;
  std::size_t definition_count() const;
  std::size_t assertion_count() const;
};

}  // namespace cspmon::syntax
