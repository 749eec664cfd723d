#include "doctest.h"

#include "cspmon/lts/enumerate.hpp"
#include "cspmon/oracle/monitor.hpp"
#include "cspmon/refine/refine.hpp"

using namespace cspmon;
using namespace cspmon::lts;
using namespace cspmon::oracle;
using namespace cspmon::refine;

namespace {

const char* kBase =
    "channel a, b, c\n"
    "channel n : {0..2}\n";

std::shared_ptr<const ResolvedSpec> spec_of(const std::string& body) {
  return resolve_text(std::string(kBase) + body);
}

std::vector<EventId> tr(const ResolvedSpec& s, const std::string& lit) { return s.parse_trace_literal(lit); }

std::set<Trace> traces(const std::string& body, std::size_t depth) {
  return enumerate_traces(spec_of(body), "P", depth);
}

}  // namespace

TEST_CASE("successors of a prefix") {
  auto s = spec_of("P = a -> b -> STOP");
  Lts lts(s);
  TermId p = lts.process("P");
  auto c = lts.tau_closure(std::span<const TermId>(&p, 1));
  CHECK(c.states.size() == 2);  // the call and its unfolding
  TermId body = lts.successors(p)[0].target;
  const auto& moves = lts.successors(body);
  REQUIRE(moves.size() == 1);
  CHECK(moves[0].label == static_cast<Label>(s->parse_event("a")));
}

TEST_CASE("internal choice has two tau successors and a three state closure") {
  auto s = spec_of("P = (a -> STOP) |~| (b -> STOP)");
  Lts lts(s);
  TermId body = lts.successors(lts.process("P"))[0].target;
  const auto& moves = lts.successors(body);
  REQUIRE(moves.size() == 2);
  CHECK(moves[0].label == kTau);
  CHECK(moves[1].label == kTau);
  auto c = lts.tau_closure(std::span<const TermId>(&body, 1));
  CHECK(c.states.size() == 3);
  CHECK_FALSE(c.divergent);
  CHECK(lts.visible_initials(c.states).count() == 2);
}

TEST_CASE("unguarded recursion diverges") {
  auto s = spec_of("P = P");
  Lts lts(s);
  TermId p = lts.process("P");
  auto c = lts.tau_closure(std::span<const TermId>(&p, 1));
  CHECK(c.divergent);
  auto again = lts.tau_closure(c.states);
  CHECK(again.states == c.states);
}

TEST_CASE("closure without tau edges") {
  auto s = spec_of("P = a -> STOP");
  Lts lts(s);
  TermId body = lts.successors(lts.process("P"))[0].target;
  auto c = lts.tau_closure(std::span<const TermId>(&body, 1));
  CHECK(c.states.size() == 1);
  CHECK_FALSE(c.divergent);
  TermId stop = lts.stop();
  CHECK(lts.visible_initials(std::span<const TermId>(&stop, 1)).empty());
}

TEST_CASE("enumerator examples") {
  CHECK(traces("P = STOP", 3) == std::set<Trace>{{}});
  auto s = spec_of("P = a -> STOP");
  EventId a = s->parse_event("a");
  EventId b = s->parse_event("b");
  CHECK(traces("P = a -> b -> STOP", 1) == std::set<Trace>{{}, {a}});
  CHECK(traces("P = (a -> STOP) |~| (b -> STOP)", 1) == std::set<Trace>{{}, {a}, {b}});
  CHECK(traces("P = (a -> STOP) [] (b -> STOP)", 1) == std::set<Trace>{{}, {a}, {b}});
}

TEST_CASE("distributed termination") {
  auto s = spec_of("P = SKIP ||| SKIP\nQ = SKIP ||| STOP\nR = (SKIP ||| SKIP) ; a -> STOP");
  Lts lts(s);
  CHECK(enumerate_traces(lts, lts.process("P"), 2, true).count({kTickEvent}) == 1);
  CHECK(enumerate_traces(lts, lts.process("Q"), 2, true).count({kTickEvent}) == 0);
  CHECK(enumerate_traces(lts, lts.process("R"), 2).count({s->parse_event("a")}) == 1);
}

TEST_CASE("omega differs from stop") {
  auto s = spec_of("P = SKIP");
  Lts lts(s);
  CHECK(lts.omega() != lts.stop());
  CHECK(check_deadlock_free(s, "P").holds);
  CHECK_FALSE(check_deadlock_free(spec_of("P = STOP"), "P").holds);
}

TEST_CASE("parallel operators") {
  auto s = spec_of(
      "P = (a -> b -> STOP) [| {a} |] (a -> c -> STOP)\n"
      "Q = (a -> b -> STOP) [ {a, b} || {a, c} ] (a -> c -> STOP)\n"
      "R = (a -> STOP) ||| (b -> STOP)\n"
      "H = (a -> b -> STOP) \\ {a}\n");
  auto t = enumerate_traces(s, "P", 3);
  CHECK(t.count(tr(*s, "<a, b, c>")) == 1);
  CHECK(t.count(tr(*s, "<b>")) == 0);
  CHECK(enumerate_traces(s, "Q", 3) == t);
  auto r = enumerate_traces(s, "R", 2);
  CHECK(r.count(tr(*s, "<a, b>")) == 1);
  CHECK(r.count(tr(*s, "<b, a>")) == 1);
  CHECK(enumerate_traces(s, "H", 2) == std::set<Trace>{{}, tr(*s, "<b>")});
}

TEST_CASE("input prefixes and parameters") {
  auto s = spec_of(
      "P = n?x -> (if x == 0 then a -> STOP else n!x - 1 -> STOP)\n"
      "C(k : {0..2}) = n.k -> (if k < 2 then C(k + 1) else STOP)\n"
      "Q = C(0)\n"
      "W = n?_:{1, 2} -> STOP\n"
      "X = [] k : {0..1} @ n.k -> a -> STOP\n");
  auto p = enumerate_traces(s, "P", 2);
  CHECK(p.count(tr(*s, "<n.0, a>")) == 1);
  CHECK(p.count(tr(*s, "<n.2, n.1>")) == 1);
  CHECK(p.count(tr(*s, "<n.1, n.1>")) == 0);
  CHECK(enumerate_traces(s, "Q", 5).count(tr(*s, "<n.0, n.1, n.2>")) == 1);
  CHECK(enumerate_traces(s, "W", 1) == std::set<Trace>{{}, tr(*s, "<n.1>"), tr(*s, "<n.2>")});
  CHECK(enumerate_traces(s, "X", 2).count(tr(*s, "<n.1, a>")) == 1);
  CHECK(enumerate_traces(s, "X", 2).count(tr(*s, "<n.2>")) == 0);
}

TEST_CASE("monitor examples") {
  auto s = spec_of("P = a -> STOP [] b -> STOP\nQ = a -> STOP\nDIV = DIV\nT = a -> SKIP\nS = STOP");
  {
    auto m = open_session(s, "P");
    auto v = m.step(s->parse_event("b"));
    CHECK(v.outcome == Outcome::Accepted);
    CHECK(m.frontier_size() == 1);
  }
  {
    auto m = open_session(s, "Q");
    auto v = m.step(s->parse_event("b"));
    CHECK(v.outcome == Outcome::Rejected);
    CHECK(v.index == 0);
    CHECK(v.acceptable == std::vector<EventId>{s->parse_event("a")});
    CHECK(m.acceptable_next().empty());
    CHECK_THROWS_AS(m.step(s->parse_event("a")), Error);
    m.reset();
    CHECK(m.status() == SessionStatus::Running);
  }
  {
    auto m = open_session(s, "DIV");
    CHECK(m.status() == SessionStatus::Diverged);
    auto rep = check_trace(s, "DIV", {});
    CHECK(rep.verdict.outcome == Outcome::Diverged);
    CHECK(rep.verdict.index == 0);
  }
  {
    auto m = open_session(s, "S");
    CHECK(m.status() == SessionStatus::Running);
    CHECK(m.acceptable_next().empty());
  }
  {
    auto m = open_session(s, "T");
    m.step(s->parse_event("a"));
    CHECK(m.acceptable_next().empty());
    CHECK(m.can_terminate());
    CHECK(m.status() == SessionStatus::Terminated);
    CHECK(m.step(s->parse_event("a")).outcome == Outcome::Rejected);
  }
  auto rep = check_trace(s, "Q", {});
  CHECK(rep.verdict.outcome == Outcome::Accepted);
  CHECK(rep.length == 0);
  CHECK_THROWS_AS(open_session(s, "Nope"), Error);
}

TEST_CASE("reset emits the prior report") {
  auto s = spec_of("P = a -> P");
  std::vector<TraceReport> seen;
  MonitorOptions opt;
  opt.sink = [&](const TraceReport& r) { seen.push_back(r); };
  auto m = open_session(s, "P", opt);
  m.step(s->parse_event("a"));
  m.step(s->parse_event("a"));
  m.reset();
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].length == 2);
  CHECK(m.trace().empty());
}

TEST_CASE("normalization examples") {
  auto s = spec_of("P = a -> STOP\nQ = (a -> b -> STOP) |~| (a -> c -> STOP)");
  auto n = normalize(s, "P");
  CHECK(n.states.size() == 2);
  CHECK(n.edge_count() == 1);
  auto q = normalize(s, "Q");
  auto after = q.step(0, s->parse_event("a"));
  REQUIRE(after);
  CHECK(q.states[*after].edges.size() == 2);
}

TEST_CASE("refinement examples") {
  auto s = spec_of("P = a -> STOP\nS = STOP\nR = a -> b -> R");
  CHECK(check_traces_refinement(s, "P", "S").holds);
  auto r = check_traces_refinement(s, "S", "P");
  CHECK_FALSE(r.holds);
  CHECK(r.counterexample == tr(*s, "<a>"));
  CHECK(check_traces_refinement(s, "R", "R").holds);
}

TEST_CASE("divergence and determinism examples") {
  auto s = spec_of(
      "DIV = DIV\nP = a -> STOP\nL = a -> L\nH = L \\ {a}\n"
      "I = (a -> STOP) |~| (b -> STOP)\nE = a -> STOP [] b -> STOP");
  auto d = check_divergence_free(s, "DIV");
  CHECK_FALSE(d.holds);
  CHECK(d.witness.empty());
  CHECK(check_divergence_free(s, "P").holds);
  CHECK_FALSE(check_divergence_free(s, "H").holds);
  auto i = check_deterministic(s, "I");
  CHECK_FALSE(i.holds);
  CHECK(i.witness.empty());
  CHECK(check_deterministic(s, "E").holds);
  auto dd = check_deterministic(s, "DIV");
  CHECK_FALSE(dd.holds);
  CHECK(dd.divergent);
}

TEST_CASE("run_assertions") {
  auto s = spec_of("P = STOP\nassert P :[deadlock free]\nassert P :[has trace]: <>");
  auto rep = run_assertions(s);
  REQUIRE(rep.results.size() == 2);
  CHECK(rep.failures() == 1);
  CHECK(run_assertions(spec_of("P = STOP")).results.empty());
  auto t = spec_of("P = a -> b -> P\nassert P :[has trace]: <a, b, a>\nassert P :[has trace]: <b>");
  auto rt = run_assertions(t);
  CHECK(rt.results[0].holds);
  CHECK_FALSE(rt.results[1].holds);
}
