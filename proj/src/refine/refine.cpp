#include "cspmon/refine/refine.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>

#include "cspmon/syntax/ast.hpp"

namespace cspmon::refine {

using lts::FrontierId;
using lts::kTau;
using lts::kTick;
using lts::TermId;

namespace {

constexpr std::uint32_t kNone = 0xffffffffu;

// Parent links for witness reconstruction. Label kTau marks a silent step.
struct Parents {
  std::vector<std::uint32_t> parent;
  std::vector<lts::Label> label;

  std::uint32_t add(std::uint32_t p, lts::Label l) {
    parent.push_back(p);
    label.push_back(l);
    return static_cast<std::uint32_t>(parent.size() - 1);
  }

  std::vector<EventId> trace(std::uint32_t n) const {
    std::vector<EventId> out;
    for (; n != kNone; n = parent[n]) {
      if (label[n] >= 0) out.push_back(static_cast<EventId>(label[n]));
    }
    std::reverse(out.begin(), out.end());
    return out;
  }
};

void check_limit(std::size_t n, const lts::Limits& limits, const char* what) {
  if (n > limits.max_states) {
    throw Error(ErrorKind::StateSpaceExceeded,
                std::string(what) + " exceeds " + std::to_string(limits.max_states) + " states");
  }
}

struct PairHash {
  std::size_t operator()(const std::pair<std::uint32_t, std::uint32_t>& p) const noexcept {
    return (static_cast<std::size_t>(p.first) << 32) ^ p.second;
  }
};

// Breadth-first walk over frontiers, calling visit(frontier, node) in order
// of trace length until it returns true.
template <class Visit>
std::optional<std::uint32_t> walk_frontiers(oracle::Engine& engine, TermId root, Parents& parents,
                                            std::size_t& count, std::size_t& edges, Visit visit) {
  auto& store = engine.store();
  FrontierId f0 = store.close(std::span<const TermId>(&root, 1));
  std::unordered_map<FrontierId, std::uint32_t> seen{{f0, parents.add(kNone, kTau)}};
  std::deque<std::pair<FrontierId, std::uint32_t>> queue{{f0, 0}};
  queue.front().second = seen[f0];
  count = 1;
  edges = 0;
  while (!queue.empty()) {
    auto [f, node] = queue.front();
    queue.pop_front();
    if (visit(f, node)) return node;
    for (const auto& edge : store.edges(f)) {
      ++edges;
      if (seen.count(edge.target)) continue;
      std::uint32_t n = parents.add(node, static_cast<lts::Label>(edge.event));
      seen.emplace(edge.target, n);
      ++count;
      check_limit(count, engine.lts().limits(), "normalization");
      queue.emplace_back(edge.target, n);
    }
  }
  return std::nullopt;
}

}  // namespace

std::size_t NormalLts::edge_count() const {
  std::size_t n = 0;
  for (const auto& s : states) n += s.edges.size();
  return n;
}

std::optional<std::uint32_t> NormalLts::step(std::uint32_t s, EventId e) const {
  const auto& es = states[s].edges;
  auto it = std::lower_bound(es.begin(), es.end(), e,
                             [](const auto& x, EventId v) { return x.first < v; });
  if (it == es.end() || it->first != e) return std::nullopt;
  return it->second;
}

NormalLts normalize(oracle::Engine& engine, TermId root) {
  auto& store = engine.store();
  NormalLts out;
  std::unordered_map<FrontierId, std::uint32_t> local;
  std::vector<FrontierId> order;
  FrontierId f0 = store.close(std::span<const TermId>(&root, 1));
  local.emplace(f0, 0);
  order.push_back(f0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    FrontierId f = order[i];
    NormalLts::State st;
    const auto& info = store.info(f);
    st.members = info.states;
    st.divergent = info.divergent;
    st.can_tick = info.can_tick;
    for (const auto& edge : store.edges(f)) {
      auto [it, fresh] = local.try_emplace(edge.target, static_cast<std::uint32_t>(order.size()));
      if (fresh) {
        order.push_back(edge.target);
        check_limit(order.size(), engine.lts().limits(), "normalization");
      }
      st.edges.emplace_back(edge.event, it->second);
    }
    out.states.push_back(std::move(st));
  }
  return out;
}

NormalLts normalize(std::shared_ptr<const ResolvedSpec> spec, std::string_view process, lts::Limits limits) {
  oracle::Engine engine(std::move(spec), limits);
  return normalize(engine, engine.lts().process(process));
}

RefinementResult check_traces_refinement(oracle::Engine& engine, TermId spec, TermId impl) {
  auto& store = engine.store();
  auto& lts = engine.lts();
  RefinementResult result;
  FrontierId s0 = store.close(std::span<const TermId>(&spec, 1));

  // 0-1 breadth-first search: silent impl steps cost nothing, so nodes leave
  // the deque in order of visible trace length.
  using Key = std::pair<FrontierId, TermId>;
  std::unordered_map<Key, std::uint32_t, PairHash> index;
  std::vector<Key> keys;
  std::vector<std::uint32_t> dist;
  std::vector<char> done;
  Parents parents;
  std::deque<std::uint32_t> queue;

  auto reach = [&](Key k, std::uint32_t from, lts::Label label, std::uint32_t d, bool front) {
    auto it = index.find(k);
    std::uint32_t n;
    if (it == index.end()) {
      n = parents.add(from, label);
      index.emplace(k, n);
      keys.push_back(k);
      dist.push_back(d);
      done.push_back(0);
      check_limit(keys.size(), lts.limits(), "refinement product");
    } else {
      n = it->second;
      if (done[n] || dist[n] <= d) return;
      dist[n] = d;
      parents.parent[n] = from;
      parents.label[n] = label;
    }
    if (front) {
      queue.push_front(n);
    } else {
      queue.push_back(n);
    }
  };

  reach({s0, impl}, kNone, kTau, 0, false);
  while (!queue.empty()) {
    std::uint32_t n = queue.front();
    queue.pop_front();
    if (done[n]) continue;
    done[n] = 1;
    auto [sf, t] = keys[n];
    auto moves = lts.successors(t);
    for (const auto& m : moves) {
      if (m.label == kTau) {
        reach({sf, m.target}, n, kTau, dist[n], true);
      } else if (m.label == kTick) {
        if (!store.info(sf).can_tick) {
          result.holds = false;
          result.tick = true;
          result.counterexample = parents.trace(n);
          result.product_states = keys.size();
          return result;
        }
      } else {
        auto next = store.step(sf, static_cast<EventId>(m.label));
        if (!next) {
          result.holds = false;
          result.counterexample = parents.trace(n);
          result.counterexample.push_back(static_cast<EventId>(m.label));
          result.product_states = keys.size();
          return result;
        }
        reach({*next, m.target}, n, m.label, dist[n] + 1, false);
      }
    }
  }
  result.product_states = keys.size();
  return result;
}

RefinementResult check_traces_refinement(std::shared_ptr<const ResolvedSpec> spec,
                                         std::string_view spec_process, std::string_view impl_process,
                                         lts::Limits limits) {
  oracle::Engine engine(std::move(spec), limits);
  TermId s = engine.lts().process(spec_process);
  TermId i = engine.lts().process(impl_process);
  return check_traces_refinement(engine, s, i);
}

std::string_view to_string(CheckKind k) {
  switch (k) {
    case CheckKind::DeadlockFree: return "deadlock free";
    case CheckKind::DivergenceFree: return "divergence free";
    case CheckKind::Deterministic: return "deterministic";
  }
  return "?";
}

CheckResult check_deadlock_free(oracle::Engine& engine, TermId root) {
  auto& lts = engine.lts();
  CheckResult r;
  r.kind = CheckKind::DeadlockFree;
  std::unordered_map<TermId, std::uint32_t> index;
  std::vector<TermId> terms;
  std::vector<std::uint32_t> dist;
  std::vector<char> done;
  Parents parents;
  std::deque<std::uint32_t> queue;

  auto reach = [&](TermId t, std::uint32_t from, lts::Label label, std::uint32_t d, bool front) {
    auto it = index.find(t);
    std::uint32_t n;
    if (it == index.end()) {
      n = parents.add(from, label);
      index.emplace(t, n);
      terms.push_back(t);
      dist.push_back(d);
      done.push_back(0);
      check_limit(terms.size(), lts.limits(), "deadlock search");
    } else {
      n = it->second;
      if (done[n] || dist[n] <= d) return;
      dist[n] = d;
      parents.parent[n] = from;
      parents.label[n] = label;
    }
    if (front) {
      queue.push_front(n);
    } else {
      queue.push_back(n);
    }
  };

  reach(root, kNone, kTau, 0, false);
  while (!queue.empty()) {
    std::uint32_t n = queue.front();
    queue.pop_front();
    if (done[n]) continue;
    done[n] = 1;
    TermId t = terms[n];
    auto moves = lts.successors(t);
    r.transitions += moves.size();
    if (moves.empty() && t != lts.omega()) {
      r.holds = false;
      r.witness = parents.trace(n);
      break;
    }
    for (const auto& m : moves) {
      if (m.label == kTick) continue;
      reach(m.target, n, m.label, dist[n] + (m.label == kTau ? 0 : 1), m.label == kTau);
    }
  }
  r.states = terms.size();
  return r;
}

CheckResult check_divergence_free(oracle::Engine& engine, TermId root) {
  CheckResult r;
  r.kind = CheckKind::DivergenceFree;
  Parents parents;
  auto& store = engine.store();
  auto hit = walk_frontiers(engine, root, parents, r.states, r.transitions,
                            [&](FrontierId f, std::uint32_t) { return store.info(f).divergent; });
  if (hit) {
    r.holds = false;
    r.witness = parents.trace(*hit);
  }
  return r;
}

CheckResult check_deterministic(oracle::Engine& engine, TermId root) {
  CheckResult r;
  r.kind = CheckKind::Deterministic;
  Parents parents;
  auto& store = engine.store();
  auto& lts = engine.lts();
  auto hit = walk_frontiers(engine, root, parents, r.states, r.transitions, [&](FrontierId f, std::uint32_t) {
    if (store.info(f).divergent) {
      r.divergent = true;
      return true;
    }
    std::vector<TermId> stable;
    for (TermId t : store.info(f).states) {
      if (lts.stable(t)) stable.push_back(t);
    }
    for (const auto& edge : store.edges(f)) {
      for (TermId t : stable) {
        const auto& moves = lts.successors(t);
        bool offers = std::any_of(moves.begin(), moves.end(), [&](const lts::Transition& m) {
          return m.label == static_cast<lts::Label>(edge.event);
        });
        if (!offers) {
          r.event = edge.event;
          return true;
        }
      }
    }
    if (store.info(f).can_tick) {
      for (TermId t : stable) {
        const auto& moves = lts.successors(t);
        bool ticks = std::any_of(moves.begin(), moves.end(),
                                 [](const lts::Transition& m) { return m.label == kTick; });
        if (!ticks) {
          r.tick = true;
          return true;
        }
      }
    }
    return false;
  });
  if (hit) {
    r.holds = false;
    r.witness = parents.trace(*hit);
  }
  return r;
}

namespace {

template <class F>
CheckResult with_engine(std::shared_ptr<const ResolvedSpec> spec, std::string_view process,
                        lts::Limits limits, F f) {
  oracle::Engine engine(std::move(spec), limits);
  return f(engine, engine.lts().process(process));
}

}  // namespace

CheckResult check_deadlock_free(std::shared_ptr<const ResolvedSpec> spec, std::string_view process,
                                lts::Limits limits) {
  return with_engine(std::move(spec), process, limits,
                     [](oracle::Engine& e, TermId t) { return check_deadlock_free(e, t); });
}

CheckResult check_divergence_free(std::shared_ptr<const ResolvedSpec> spec, std::string_view process,
                                  lts::Limits limits) {
  return with_engine(std::move(spec), process, limits,
                     [](oracle::Engine& e, TermId t) { return check_divergence_free(e, t); });
}

CheckResult check_deterministic(std::shared_ptr<const ResolvedSpec> spec, std::string_view process,
                                lts::Limits limits) {
  return with_engine(std::move(spec), process, limits,
                     [](oracle::Engine& e, TermId t) { return check_deterministic(e, t); });
}

LtsStats explore(oracle::Engine& engine, TermId root) {
  auto& lts = engine.lts();
  LtsStats s;
  std::unordered_map<TermId, char> seen{{root, 1}};
  std::deque<TermId> queue{root};
  while (!queue.empty()) {
    TermId t = queue.front();
    queue.pop_front();
    auto moves = lts.successors(t);
    s.transitions += moves.size();
    for (const auto& m : moves) {
      if (seen.emplace(m.target, 1).second) {
        check_limit(seen.size(), lts.limits(), "exploration");
        queue.push_back(m.target);
      }
    }
  }
  s.states = seen.size();
  return s;
}

std::string format_trace(const ResolvedSpec& spec, const std::vector<EventId>& trace) {
  std::string out = "<";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i) out += ", ";
    out += spec.event_name(trace[i]);
  }
  return out + ">";
}

std::size_t AssertionReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const AssertionResult& r) { return !r.holds; }));
}

AssertionReport run_assertions(std::shared_ptr<const ResolvedSpec> spec, lts::Limits limits) {
  AssertionReport report;
  const ResolvedSpec& s = *spec;
  for (const auto& a : s.assertions()) {
    AssertionResult res;
    res.assertion = &a;
    try {
      auto engine = std::make_shared<oracle::Engine>(spec, limits);
      TermId p = engine->lts().process(a.process);
      switch (a.kind) {
        case syntax::AssertKind::TracesRefinement: {
          auto r = check_traces_refinement(*engine, p, engine->lts().process(a.impl));
          res.holds = r.holds;
          res.witness = r.counterexample;
          res.summary = r.holds ? "holds" : "fails: counterexample " + format_trace(s, r.counterexample) +
                                                (r.tick ? " then termination" : "");
          break;
        }
        case syntax::AssertKind::DeadlockFree:
        case syntax::AssertKind::DivergenceFree:
        case syntax::AssertKind::Deterministic: {
          CheckResult r = a.kind == syntax::AssertKind::DeadlockFree    ? check_deadlock_free(*engine, p)
                          : a.kind == syntax::AssertKind::DivergenceFree ? check_divergence_free(*engine, p)
                                                                         : check_deterministic(*engine, p);
          res.holds = r.holds;
          res.witness = r.witness;
          if (r.holds) {
            res.summary = "holds (" + std::to_string(r.states) + " states, " + std::to_string(r.transitions) +
                          " transitions)";
          } else {
            res.summary = "fails: witness " + format_trace(s, r.witness);
            if (r.event) res.summary += " then " + s.event_name(*r.event) + " may be refused";
            if (r.tick) res.summary += " then termination may be refused";
            if (r.divergent) res.summary += " (divergent)";
          }
          break;
        }
        case syntax::AssertKind::HasTrace: {
          oracle::MonitorSession session(engine, a.process);
          auto rep = oracle::check_trace(session, a.trace);
          res.holds = rep.verdict.outcome == oracle::Outcome::Accepted && rep.length == a.trace.size();
          res.witness.assign(a.trace.begin(), a.trace.begin() + static_cast<long>(rep.length));
          if (res.holds) {
            res.summary = "holds";
          } else {
            res.summary = std::string("fails: ") + std::string(oracle::to_string(rep.verdict.outcome)) +
                          " at event " + std::to_string(rep.verdict.index);
          }
          break;
        }
      }
    } catch (const Error& e) {
      res.holds = false;
      res.error = e.what();
      res.summary = std::string("error: ") + e.what();
    }
    report.results.push_back(std::move(res));
  }
  return report;
}

}  // namespace cspmon::refine
