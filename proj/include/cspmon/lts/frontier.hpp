#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "cspmon/lts/lts.hpp"

namespace cspmon::lts {

/// Interned τ-closed set of terms: the states a process may be in after a
/// trace. Each frontier's visible transitions are computed once and cached,
/// which makes the store an on-the-fly subset construction.
using FrontierId = std::uint32_t;

struct FrontierEdge {
  EventId event;
  FrontierId target;
};

struct FrontierInfo {
  std::vector<TermId> states;  // sorted
  bool divergent = false;
  bool can_tick = false;
  bool expanded = false;
  std::vector<FrontierEdge> edges;  // sorted by event, valid once expanded
};

class FrontierStore {
 public:
  explicit FrontierStore(Lts& lts) : lts_(lts) {}

  Lts& lts() { return lts_; }

  /// τ-closure of the seeds. Throws Error(StateSpaceExceeded) when a closure
  /// or the number of frontiers exceeds the Lts limits.
  FrontierId close(std::span<const TermId> seeds);

  const FrontierInfo& info(FrontierId f) const { return frontiers_[f]; }
  const std::vector<TermId>& states(FrontierId f) const { return frontiers_[f].states; }

  /// Visible transitions of a frontier, expanding it on first use.
  const std::vector<FrontierEdge>& edges(FrontierId f);

  std::optional<FrontierId> step(FrontierId f, EventId e);
  EventSet initials(FrontierId f);

  std::size_t size() const { return frontiers_.size(); }

 private:
  struct VecHash {
    std::size_t operator()(const std::vector<TermId>& v) const noexcept;
  };
  const ClosureResult& closure_of(TermId t);

  Lts& lts_;
  std::vector<FrontierInfo> frontiers_;
  std::unordered_map<std::vector<TermId>, FrontierId, VecHash> index_;
  std::unordered_map<TermId, ClosureResult> closures_;
};

}  // namespace cspmon::lts
