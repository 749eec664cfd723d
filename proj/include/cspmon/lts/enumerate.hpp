#pragma once

#include <set>
#include <vector>

#include "cspmon/lts/lts.hpp"

namespace cspmon::lts {

using Trace = std::vector<EventId>;

/// Stands for ✓ at the end of an enumerated trace.
constexpr EventId kTickEvent = 0xffffffffu;

/// All traces of `root` up to `depth` visible events, by breadth-first search
/// over (trace, term) pairs using successors() alone. With `with_tick`,
/// terminated traces also appear with a trailing kTickEvent.
/// Errors: StateSpaceExceeded when the pair count passes the Lts limit.
std::set<Trace> enumerate_traces(Lts& lts, TermId root, std::size_t depth, bool with_tick = false);

std::set<Trace> enumerate_traces(const std::shared_ptr<const ResolvedSpec>& spec,
                                 std::string_view process, std::size_t depth);

}  // namespace cspmon::lts
