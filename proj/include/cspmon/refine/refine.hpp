#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cspmon/lts/frontier.hpp"
#include "cspmon/oracle/monitor.hpp"

namespace cspmon::refine {

/// Deterministic automaton from subset construction over the τ-closed LTS.
/// State 0 is initial.
struct NormalLts {
  struct State {
    std::vector<lts::TermId> members;
    bool divergent = false;
    bool can_tick = false;
    std::vector<std::pair<EventId, std::uint32_t>> edges;  // sorted by event
  };
  std::vector<State> states;

  std::size_t edge_count() const;
  /// Successor on an event, if any.
  std::optional<std::uint32_t> step(std::uint32_t s, EventId e) const;
};

NormalLts normalize(oracle::Engine& engine, lts::TermId root);
NormalLts normalize(std::shared_ptr<const ResolvedSpec> spec, std::string_view process,
                    lts::Limits limits = {});

struct RefinementResult {
  bool holds = true;
  std::vector<EventId> counterexample;  // impl trace the spec cannot perform
  bool tick = false;                    // the offending step is ✓ rather than the last event
  std::size_t product_states = 0;
};

/// traces(impl) ⊆ traces(spec), ✓ included. Breadth-first over the product
/// of the normalized spec and the raw impl LTS, so the counterexample is
/// shortest. Errors: StateSpaceExceeded.
RefinementResult check_traces_refinement(oracle::Engine& engine, lts::TermId spec, lts::TermId impl);
RefinementResult check_traces_refinement(std::shared_ptr<const ResolvedSpec> spec,
                                         std::string_view spec_process, std::string_view impl_process,
                                         lts::Limits limits = {});

enum class CheckKind { DeadlockFree, DivergenceFree, Deterministic };

std::string_view to_string(CheckKind k);

struct CheckResult {
  CheckKind kind = CheckKind::DeadlockFree;
  bool holds = true;
  std::vector<EventId> witness;  // trace to the offending state
  std::optional<EventId> event;  // nondeterminism: the refusable event
  bool tick = false;             // nondeterminism on ✓
  bool divergent = false;        // nondeterminism reported because of divergence
  std::size_t states = 0;        // states explored
  std::size_t transitions = 0;
};

CheckResult check_deadlock_free(oracle::Engine& engine, lts::TermId root);
CheckResult check_divergence_free(oracle::Engine& engine, lts::TermId root);
CheckResult check_deterministic(oracle::Engine& engine, lts::TermId root);

CheckResult check_deadlock_free(std::shared_ptr<const ResolvedSpec> spec, std::string_view process,
                                lts::Limits limits = {});
CheckResult check_divergence_free(std::shared_ptr<const ResolvedSpec> spec, std::string_view process,
                                  lts::Limits limits = {});
CheckResult check_deterministic(std::shared_ptr<const ResolvedSpec> spec, std::string_view process,
                                lts::Limits limits = {});

/// Reachable raw LTS size (terms and transitions, τ included).
struct LtsStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
};
LtsStats explore(oracle::Engine& engine, lts::TermId root);

struct AssertionResult {
  const Assertion* assertion = nullptr;
  bool holds = false;
  std::string summary;                 // one line, human readable
  std::optional<std::string> error;    // set when the check itself failed
  std::vector<EventId> witness;
};

struct AssertionReport {
  std::vector<AssertionResult> results;
  std::size_t failures() const;
};

/// Checks every embedded assertion in file order. A failing check does not
/// stop the run.
AssertionReport run_assertions(std::shared_ptr<const ResolvedSpec> spec, lts::Limits limits = {});

std::string format_trace(const ResolvedSpec& spec, const std::vector<EventId>& trace);

}  // namespace cspmon::refine
