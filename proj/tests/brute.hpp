#pragma once

// Brute-force comparisons of the monitor and the refinement checker against
// trace enumeration, shared by the property tests and the acceptance run.

#include <set>
#include <string>
#include <vector>

#include "cspmon/lts/enumerate.hpp"
#include "cspmon/syntax/ast.hpp"
#include "cspmon/syntax/spec.hpp"
#include "gen.hpp"

namespace brute {

using cspmon::lts::Trace;

inline const cspmon::lts::Limits kSmall{20'000, 200'000};
inline const cspmon::lts::Limits kTiny{2'000, 50'000};

struct Sample {
  std::shared_ptr<const cspmon::ResolvedSpec> spec;
  std::string text;
};

/// Resolves definitions over the generator alphabet {a, b, n.0, n.1}.
Sample build(std::vector<cspmon::syntax::Definition> defs);
cspmon::syntax::Definition def(std::string name, cspmon::syntax::ExprRef body);
std::vector<cspmon::syntax::Definition> procs(gen::Rng& r, std::string prefix, int depth, bool divergence = false);

/// Every sequence over events 0..alphabet-1 up to the given length.
std::vector<Trace> all_traces(std::size_t alphabet, std::size_t depth);
bool subset(const std::set<Trace>& a, const std::set<Trace>& b);
Trace prefix(const Trace& t, std::size_t n);

struct Run {
  int checked = 0;
  int skipped = 0;  // state space over the limits
  int disagreements = 0;
  int held = 0;     // refinement only
  int failed = 0;   // refinement only
  std::vector<std::string> failures;  // the first few, with the process text
};

/// Random processes (alphabet 4); every trace up to `depth` is checked with
/// the monitor and compared with membership in the enumerated trace set.
Run monitor_vs_enumeration(std::uint64_t seed, int processes, int depth);

/// Random (spec, impl) pairs; the refinement verdict is compared with
/// bounded trace inclusion, and counterexamples are replayed through the
/// monitor on both sides.
Run refinement_vs_inclusion(std::uint64_t seed, int pairs, std::size_t depth);

}  // namespace brute
