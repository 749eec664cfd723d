#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cspmon/core/event_set.hpp"
#include "cspmon/syntax/spec.hpp"

namespace cspmon::lts {

/// Interned process term. Equal terms have equal ids.
using TermId = std::uint32_t;

/// Transition label: an EventId, or one of the two pseudo-labels below.
/// τ sorts before everything else in a successor list.
using Label = std::int64_t;
constexpr Label kTau = -2;
constexpr Label kTick = -1;

struct Transition {
  Label label;
  TermId target;
  auto operator<=>(const Transition&) const = default;
};

struct Limits {
  std::size_t max_states = 1'000'000;   // per closure, frontier table, or search
  std::size_t max_terms = 16'000'000;   // distinct terms interned by one Lts
};

enum class TermKind : std::uint8_t {
  Stop,
  Skip,
  Omega,  // successfully terminated
  Prefix,
  Call,
  ExtChoice,
  IntChoice,
  Seq,
  GenPar,
  AlphaPar,
  Hide,
};

struct Term {
  TermKind kind = TermKind::Stop;
  std::uint32_t ref = 0;           // prefix node id or definition index
  std::vector<TermId> kids;        // operands
  std::vector<std::uint32_t> sets; // interned event-set ids
  std::vector<Value> values;       // captured variables or call arguments
};

struct ClosureResult {
  std::vector<TermId> states;  // sorted
  bool divergent = false;
  bool truncated = false;
};

/// Ground labelled transition system over a resolved spec. Terms are built
/// on demand and hash-consed; successor lists are memoized. Not thread-safe:
/// concurrent users each own an Lts over the shared spec.
class Lts {
 public:
  explicit Lts(std::shared_ptr<const ResolvedSpec> spec, Limits limits = {});
  ~Lts();
  Lts(const Lts&) = delete;
  Lts& operator=(const Lts&) = delete;

  const ResolvedSpec& spec() const { return *spec_; }
  const std::shared_ptr<const ResolvedSpec>& spec_ptr() const { return spec_; }
  const Limits& limits() const { return limits_; }

  /// The term for a call of a named process. Errors: UnboundName, ArityMismatch.
  TermId process(std::string_view name, std::span<const Value> args = {});
  TermId process(std::uint32_t def, std::span<const Value> args = {});

  TermId stop();
  TermId skip();
  TermId omega();

  const Term& term(TermId t) const { return terms_[t]; }
  std::size_t term_count() const { return terms_.size(); }
  const EventSet& event_set(std::uint32_t id) const { return sets_[id]; }

  /// One-step transitions of a term, sorted and duplicate-free.
  const std::vector<Transition>& successors(TermId t);

  /// True if the term has no τ transitions.
  bool stable(TermId t);

  /// Least τ-closed superset of `states`, with τ-cycle detection.
  ClosureResult tau_closure(std::span<const TermId> states);

  /// Visible events offered by any member of a τ-closed set.
  EventSet visible_initials(std::span<const TermId> states);

  /// Renders a term in source syntax, for diagnostics.
  std::string describe(TermId t) const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>& k) const noexcept;
  };

  TermId intern(Term t);
  std::uint32_t intern_set(EventSet s);
  TermId build(const ir::ProcNode& node, std::vector<Value>& env);
  TermId call(std::uint32_t def, std::vector<Value> args);
  TermId binary(TermKind kind, TermId l, TermId r, std::vector<std::uint32_t> sets = {});
  std::vector<Transition> compute(TermId t);
  void fire_prefix(const Term& t, std::vector<Transition>& out);

  std::shared_ptr<const ResolvedSpec> spec_;
  Limits limits_;
  std::vector<Term> terms_;
  std::unordered_map<std::vector<std::uint64_t>, TermId, KeyHash> index_;
  std::vector<EventSet> sets_;
  std::unordered_map<EventSet, std::uint32_t, EventSetHash> set_index_;
  std::vector<std::optional<std::vector<Transition>>> succ_;
  TermId stop_ = 0, skip_ = 0, omega_ = 0;
};

}  // namespace cspmon::lts
