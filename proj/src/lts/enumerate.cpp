#include "cspmon/lts/enumerate.hpp"

#include <deque>
#include <map>

namespace cspmon::lts {

std::set<Trace> enumerate_traces(Lts& lts, TermId root, std::size_t depth, bool with_tick) {
  // Traces live in a trie; node 0 is the empty trace.
  struct Node {
    std::uint32_t parent;
    EventId event;
    std::size_t length;
  };
  std::vector<Node> trie{{0, 0, 0}};
  std::map<std::pair<std::uint32_t, EventId>, std::uint32_t> child;
  auto extend = [&](std::uint32_t n, EventId e) {
    auto [it, fresh] = child.try_emplace({n, e}, static_cast<std::uint32_t>(trie.size()));
    if (fresh) trie.push_back({n, e, trie[n].length + 1});
    return it->second;
  };

  std::set<std::pair<std::uint32_t, TermId>> seen{{0, root}};
  std::deque<std::pair<std::uint32_t, TermId>> queue{{0, root}};
  while (!queue.empty()) {
    auto [n, t] = queue.front();
    queue.pop_front();
    for (const auto& m : lts.successors(t)) {
      std::uint32_t next = n;
      if (m.label == kTick) {
        if (with_tick && trie[n].length < depth + 1) extend(n, kTickEvent);
        continue;
      }
      if (m.label != kTau) {
        if (trie[n].length >= depth) continue;
        next = extend(n, static_cast<EventId>(m.label));
      }
      if (seen.emplace(next, m.target).second) {
        if (seen.size() > lts.limits().max_states) {
          throw Error(ErrorKind::StateSpaceExceeded, "trace enumeration exceeds the state limit");
        }
        queue.emplace_back(next, m.target);
      }
    }
  }

  std::set<Trace> out;
  for (std::uint32_t i = 0; i < trie.size(); ++i) {
    Trace tr(trie[i].length);
    for (std::uint32_t k = i; k != 0; k = trie[k].parent) tr[trie[k].length - 1] = trie[k].event;
    out.insert(std::move(tr));
  }
  return out;
}

std::set<Trace> enumerate_traces(const std::shared_ptr<const ResolvedSpec>& spec,
                                 std::string_view process, std::size_t depth) {
  Lts lts(spec);
  return enumerate_traces(lts, lts.process(process), depth);
}

}  // namespace cspmon::lts
