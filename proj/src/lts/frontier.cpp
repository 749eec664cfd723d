#include "cspmon/lts/frontier.hpp"

#include <algorithm>
#include <map>

namespace cspmon::lts {

std::size_t FrontierStore::VecHash::operator()(const std::vector<TermId>& v) const noexcept {
  std::size_t h = v.size();
  for (auto x : v) h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

const ClosureResult& FrontierStore::closure_of(TermId t) {
  auto it = closures_.find(t);
  if (it != closures_.end()) return it->second;
  ClosureResult c = lts_.tau_closure(std::span<const TermId>(&t, 1));
  if (c.truncated) {
    throw Error(ErrorKind::StateSpaceExceeded,
                "τ-closure exceeds " + std::to_string(lts_.limits().max_states) + " states");
  }
  return closures_.emplace(t, std::move(c)).first->second;
}

FrontierId FrontierStore::close(std::span<const TermId> seeds) {
  std::vector<TermId> states;
  bool divergent = false;
  if (seeds.size() == 1) {
    const ClosureResult& c = closure_of(seeds[0]);
    states = c.states;
    divergent = c.divergent;
  } else {
    for (TermId t : seeds) {
      const ClosureResult& c = closure_of(t);
      states.insert(states.end(), c.states.begin(), c.states.end());
      divergent = divergent || c.divergent;
    }
    std::sort(states.begin(), states.end());
    states.erase(std::unique(states.begin(), states.end()), states.end());
  }
  auto it = index_.find(states);
  if (it != index_.end()) return it->second;
  if (frontiers_.size() >= lts_.limits().max_states) {
    throw Error(ErrorKind::StateSpaceExceeded,
                "more than " + std::to_string(lts_.limits().max_states) + " macro-states");
  }
  FrontierInfo info;
  info.states = states;
  info.divergent = divergent;
  for (TermId t : states) {
    for (const auto& m : lts_.successors(t)) {
      if (m.label == kTick) info.can_tick = true;
    }
  }
  auto id = static_cast<FrontierId>(frontiers_.size());
  frontiers_.push_back(std::move(info));
  index_.emplace(std::move(states), id);
  return id;
}

const std::vector<FrontierEdge>& FrontierStore::edges(FrontierId f) {
  if (frontiers_[f].expanded) return frontiers_[f].edges;
  std::map<EventId, std::vector<TermId>> targets;
  for (TermId t : frontiers_[f].states) {
    for (const auto& m : lts_.successors(t)) {
      if (m.label >= 0) targets[static_cast<EventId>(m.label)].push_back(m.target);
    }
  }
  std::vector<FrontierEdge> out;
  out.reserve(targets.size());
  for (auto& [e, ts] : targets) out.push_back({e, close(ts)});
  frontiers_[f].edges = std::move(out);
  frontiers_[f].expanded = true;
  return frontiers_[f].edges;
}

std::optional<FrontierId> FrontierStore::step(FrontierId f, EventId e) {
  const auto& es = edges(f);
  auto it = std::lower_bound(es.begin(), es.end(), e,
                             [](const FrontierEdge& x, EventId v) { return x.event < v; });
  if (it == es.end() || it->event != e) return std::nullopt;
  return it->target;
}

EventSet FrontierStore::initials(FrontierId f) {
  EventSet out(lts_.spec().alphabet_size());
  for (const auto& edge : edges(f)) out.insert(edge.event);
  return out;
}

}  // namespace cspmon::lts
