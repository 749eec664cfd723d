#include "doctest.h"

#include <algorithm>

#include "cspmon/error.hpp"
#include "cspmon/lts/enumerate.hpp"
#include "cspmon/oracle/monitor.hpp"
#include "cspmon/refine/refine.hpp"
#include "cspmon/syntax/parser.hpp"
#include "cspmon/syntax/printer.hpp"
#include "brute.hpp"

using namespace cspmon;
using namespace cspmon::lts;
using namespace cspmon::oracle;
using namespace cspmon::refine;
using cspmon::syntax::Definition;
using cspmon::syntax::ExprKind;
using cspmon::syntax::make_expr;
using cspmon::syntax::make_name;

using namespace brute;

namespace {

/// Traces of a normalized automaton up to a depth, ✓ as a final kTickEvent.
std::set<Trace> normal_traces(const NormalLts& n, std::size_t depth) {
  std::set<Trace> out;
  std::vector<std::pair<std::uint32_t, Trace>> stack{{0, {}}};
  while (!stack.empty()) {
    auto [s, t] = stack.back();
    stack.pop_back();
    out.insert(t);
    if (t.size() == depth) continue;
    if (n.states[s].can_tick) {
      auto u = t;
      u.push_back(kTickEvent);
      out.insert(u);
    }
    for (auto [e, target] : n.states[s].edges) {
      auto u = t;
      u.push_back(e);
      stack.emplace_back(target, u);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("property: print then parse is the identity on syntax trees") {
  gen::Rng r(0x5eed0001);
  int failures = 0;
  for (int i = 0; i < 500; ++i) {
    auto m = gen::module(r, 6);
    std::string text = syntax::print_module(m);
    syntax::Module back;
    try {
      back = syntax::parse_spec({text, "<gen>"});
    } catch (const Error& e) {
      if (++failures <= 3) FAIL_CHECK("reparse failed: " << std::string(e.what()) << "\n" << text);
      continue;
    }
    if (!(back == m)) {
      if (++failures <= 3) FAIL_CHECK("round trip differs:\n" << text << "\n--- reprinted ---\n" << syntax::print_module(back));
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("property: monitor agrees with trace enumeration") {
  auto run = monitor_vs_enumeration(0x5eed0002, 1000, 6);
  for (const auto& f : run.failures) FAIL_CHECK(f);
  MESSAGE("processes checked " << run.checked << ", skipped for size " << run.skipped);
  CHECK(run.disagreements == 0);
  CHECK(run.skipped * 20 < run.checked);
}

TEST_CASE("property: monitor verdicts stay sound on divergent processes") {
  gen::Rng r(0x5eed0003);
  auto universe = all_traces(4, 5);
  int checked = 0, diverged = 0, bad = 0;
  while (checked < 300) {
    auto sample = build(procs(r, "P", 5, true));
    try {
      auto engine = std::make_shared<Engine>(sample.spec, kSmall);
      auto members = enumerate_traces(engine->lts(), engine->lts().process("P0"), 5);
      for (const auto& t : universe) {
        MonitorSession s(engine, "P0");
        auto rep = check_trace(s, t);
        std::size_t i = rep.verdict.index;
        bool ok = false;
        switch (rep.verdict.outcome) {
          case Outcome::Accepted: ok = members.count(t) > 0; break;
          case Outcome::Rejected: ok = members.count(prefix(t, i)) && !members.count(prefix(t, i + 1)); break;
          case Outcome::Diverged:
            ++diverged;
            ok = rep.length == 0 ? i == 0 : members.count(prefix(t, i + 1)) > 0 && rep.length == i + 1;
            break;
        }
        if (!ok && ++bad <= 3) FAIL_CHECK("unsound verdict on " << format_trace(*sample.spec, t) << "\n" << sample.text);
      }
      ++checked;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StateSpaceExceeded) throw;
    }
  }
  CHECK(bad == 0);
  CHECK(diverged > 0);
}

TEST_CASE("property: refinement agrees with bounded trace inclusion") {
  auto run = refinement_vs_inclusion(0x5eed0004, 300, 6);
  for (const auto& f : run.failures) FAIL_CHECK(f);
  MESSAGE("pairs " << run.checked << ": " << run.held << " hold, " << run.failed << " fail");
  CHECK(run.disagreements == 0);
  CHECK(run.held > 30);
  CHECK(run.failed > 30);
}

TEST_CASE("property: normalization preserves traces") {
  gen::Rng r(0x5eed0005);
  int checked = 0;
  while (checked < 200) {
    auto sample = build(procs(r, "P", 5));
    try {
      Engine engine(sample.spec, kTiny);
      TermId root = engine.lts().process("P0");
      auto n = normalize(engine, root);
      auto want = enumerate_traces(engine.lts(), root, 5, true);
      // A ✓ at depth 5 still ends a length-5 trace in the enumeration.
      auto got = normal_traces(n, 5);
      for (auto it = got.begin(); it != got.end();) {
        it = it->size() > 5 ? got.erase(it) : std::next(it);
      }
      std::set<Trace> want_trim;
      for (const auto& t : want) {
        if (t.size() <= 5) want_trim.insert(t);
      }
      CHECK_MESSAGE(got == want_trim, sample.text);
      for (const auto& st : n.states) CHECK(std::is_sorted(st.edges.begin(), st.edges.end()));
      ++checked;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StateSpaceExceeded) throw;
    }
  }
}

TEST_CASE("property: tau closure is idempotent") {
  gen::Rng r(0x5eed0006);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    auto sample = build(procs(r, "P", 5, true));
    try {
      Lts lts(sample.spec, kSmall);
      TermId root = lts.process("P0");
      std::vector<TermId> seeds{root};
      for (const auto& tr : lts.successors(root)) seeds.push_back(tr.target);
      for (TermId t : seeds) {
        auto once = lts.tau_closure(std::span<const TermId>(&t, 1));
        if (once.truncated) continue;
        auto twice = lts.tau_closure(once.states);
        CHECK(once.states == twice.states);
        CHECK(once.divergent == twice.divergent);
        CHECK(std::binary_search(once.states.begin(), once.states.end(), t));
      }
      ++checked;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StateSpaceExceeded) throw;
    }
  }
  CHECK(checked > 250);
}

TEST_CASE("property: hiding maps every trace to a trace") {
  gen::Rng r(0x5eed0007);
  int checked = 0;
  while (checked < 200) {
    auto defs = procs(r, "P", 5);
    // Hide a fixed set so the erased events are known here.
    auto hidden = make_expr(ExprKind::SetLit, {make_name("a"), make_expr(ExprKind::Dot, {make_name("n"), syntax::make_int(1)})});
    defs.push_back(def("H", make_expr(ExprKind::Hide, {make_name("P0"), hidden})));
    auto sample = build(std::move(defs));
    try {
      Engine engine(sample.spec, kSmall);
      EventId a = sample.spec->parse_event("a");
      EventId n1 = sample.spec->parse_event("n.1");
      auto plain = enumerate_traces(engine.lts(), engine.lts().process("P0"), 6);
      auto hid = enumerate_traces(engine.lts(), engine.lts().process("H"), 6);
      for (const auto& t : plain) {
        Trace u;
        for (EventId e : t) {
          if (e != a && e != n1) u.push_back(e);
        }
        CHECK_MESSAGE(hid.count(u), sample.text);
      }
      for (const auto& t : hid) {
        CHECK(std::find(t.begin(), t.end(), a) == t.end());
        CHECK(std::find(t.begin(), t.end(), n1) == t.end());
      }
      ++checked;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StateSpaceExceeded) throw;
    }
  }
}

TEST_CASE("property: interleaving is symmetric and choices agree on traces") {
  gen::Rng r(0x5eed0008);
  int checked = 0;
  while (checked < 200) {
    auto defs = procs(r, "P", 4);
    auto more = procs(r, "Q", 4);
    defs.insert(defs.end(), more.begin(), more.end());
    defs.push_back(def("L", make_expr(ExprKind::Interleave, {make_name("P0"), make_name("Q0")})));
    defs.push_back(def("R", make_expr(ExprKind::Interleave, {make_name("Q0"), make_name("P0")})));
    defs.push_back(def("E", make_expr(ExprKind::ExtChoice, {make_name("P0"), make_name("Q0")})));
    defs.push_back(def("N", make_expr(ExprKind::IntChoice, {make_name("P0"), make_name("Q0")})));
    auto sample = build(std::move(defs));
    try {
      Engine engine(sample.spec, kSmall);
      auto tr = [&](const char* name, std::size_t d) {
        return enumerate_traces(engine.lts(), engine.lts().process(name), d, true);
      };
      auto l = tr("L", 5);
      auto rr = tr("R", 5);
      CHECK_MESSAGE(l == rr, sample.text);
      auto e = tr("E", 6);
      auto n = tr("N", 6);
      CHECK_MESSAGE(e == n, sample.text);
      auto u = tr("P0", 6);
      auto q = tr("Q0", 6);
      u.insert(q.begin(), q.end());
      CHECK_MESSAGE(e == u, sample.text);
      ++checked;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StateSpaceExceeded) throw;
    }
  }
}

TEST_CASE("property: refinement is transitive") {
  gen::Rng r(0x5eed0009);
  int chains = 0, tries = 0;
  while (tries < 300) {
    auto defs = procs(r, "P", 4);
    auto x = procs(r, "X", 4);
    auto y = procs(r, "Y", 4);
    defs.insert(defs.end(), x.begin(), x.end());
    defs.insert(defs.end(), y.begin(), y.end());
    auto ev = make_expr(ExprKind::Events);
    // Q and R are often refinements of P and Q; sometimes unrelated.
    defs.push_back(def("Q", r.coin(0.8) ? make_expr(ExprKind::GenPar, {make_name("P0"), ev, make_name("X0")})
                                        : make_name("X0")));
    defs.push_back(def("R", r.coin(0.8) ? make_expr(ExprKind::GenPar, {make_name("Q"), ev, make_name("Y0")})
                                        : make_name("Y0")));
    auto sample = build(std::move(defs));
    try {
      Engine engine(sample.spec, kSmall);
      TermId p = engine.lts().process("P0"), q = engine.lts().process("Q"), rr = engine.lts().process("R");
      bool pq = check_traces_refinement(engine, p, q).holds;
      bool qr = check_traces_refinement(engine, q, rr).holds;
      bool pr = check_traces_refinement(engine, p, rr).holds;
      if (pq && qr) {
        ++chains;
        CHECK_MESSAGE(pr, sample.text);
      }
      ++tries;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StateSpaceExceeded) throw;
    }
  }
  CHECK(chains > 50);
}
