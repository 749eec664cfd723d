#include "brute.hpp"

#include <algorithm>
#include <sstream>

#include "cspmon/error.hpp"
#include "cspmon/oracle/monitor.hpp"
#include "cspmon/refine/refine.hpp"
#include "cspmon/syntax/printer.hpp"

namespace brute {

using namespace cspmon;
using namespace cspmon::lts;
using namespace cspmon::oracle;
using cspmon::syntax::Definition;
using cspmon::syntax::ExprKind;
using cspmon::syntax::make_expr;
using cspmon::syntax::make_name;

Sample build(std::vector<Definition> defs) {
  auto m = gen::alphabet_module();
  for (auto& d : defs) m.decls.emplace_back(std::move(d));
  return {resolve(m), syntax::print_module(m)};
}

Definition def(std::string name, syntax::ExprRef body) {
  Definition d;
  d.name = std::move(name);
  d.body = std::move(body);
  return d;
}

std::vector<Definition> procs(gen::Rng& r, std::string prefix, int depth, bool divergence) {
  gen::ProcConfig cfg;
  cfg.prefix = std::move(prefix);
  cfg.depth = depth;
  cfg.allow_divergence = divergence;
  return gen::ProcGen(r, cfg).definitions();
}

namespace {

void all_traces(std::size_t alphabet, std::size_t depth, Trace& cur, std::vector<Trace>& out) {
  out.push_back(cur);
  if (cur.size() == depth) return;
  for (EventId e = 0; e < alphabet; ++e) {
    cur.push_back(e);
    all_traces(alphabet, depth, cur, out);
    cur.pop_back();
  }
}

void note(Run& run, const std::string& what) {
  if (run.failures.size() < 3) run.failures.push_back(what);
}

}  // namespace

std::vector<Trace> all_traces(std::size_t alphabet, std::size_t depth) {
  std::vector<Trace> out;
  Trace cur;
  all_traces(alphabet, depth, cur, out);
  return out;
}

bool subset(const std::set<Trace>& a, const std::set<Trace>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Trace prefix(const Trace& t, std::size_t n) { return Trace(t.begin(), t.begin() + static_cast<long>(n)); }

Run monitor_vs_enumeration(std::uint64_t seed, int processes, int depth) {
  gen::Rng r(seed);
  auto universe = all_traces(4, static_cast<std::size_t>(depth));
  Run run;
  while (run.checked < processes) {
    auto sample = build(procs(r, "P", depth));
    try {
      auto engine = std::make_shared<Engine>(sample.spec, kSmall);
      TermId root = engine->lts().process("P0");
      auto members = enumerate_traces(engine->lts(), root, static_cast<std::size_t>(depth));
      for (const auto& t : universe) {
        MonitorSession s(engine, "P0");
        auto rep = check_trace(s, t);
        bool member = members.count(t) > 0;
        bool ok = false;
        if (member) {
          ok = rep.verdict.outcome == Outcome::Accepted && rep.length == t.size();
        } else {
          std::size_t i = rep.verdict.index;
          ok = rep.verdict.outcome == Outcome::Rejected && i < t.size() && members.count(prefix(t, i)) &&
               !members.count(prefix(t, i + 1));
        }
        if (!ok) {
          ++run.disagreements;
          note(run, "disagreement on " + refine::format_trace(*sample.spec, t) + " (member " +
                        std::to_string(member) + ")\n" + sample.text);
        }
      }
      ++run.checked;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StateSpaceExceeded) throw;
      ++run.skipped;
    }
  }
  return run;
}

Run refinement_vs_inclusion(std::uint64_t seed, int pairs, std::size_t depth) {
  gen::Rng r(seed);
  Run run;
  while (run.checked < pairs) {
    auto defs = procs(r, "S", 4);
    auto impl = procs(r, "I", 4);
    defs.insert(defs.end(), impl.begin(), impl.end());
    switch (r.below(3)) {
      case 0: defs.push_back(def("T", make_name("I0"))); break;
      case 1: defs.push_back(def("T", make_expr(ExprKind::IntChoice, {make_name("S0"), make_expr(ExprKind::Stop)}))); break;
      default:
        defs.push_back(def("T", make_expr(ExprKind::GenPar, {make_name("S0"), make_expr(ExprKind::Events), make_name("I0")})));
    }
    auto sample = build(std::move(defs));
    try {
      Engine engine(sample.spec, kSmall);
      TermId s = engine.lts().process("S0");
      TermId t = engine.lts().process("T");
      auto res = refine::check_traces_refinement(engine, s, t);
      auto spec_tr = enumerate_traces(engine.lts(), s, depth, true);
      auto impl_tr = enumerate_traces(engine.lts(), t, depth, true);
      bool ok = true;
      if (res.holds) {
        ++run.held;
        ok = subset(impl_tr, spec_tr);
      } else {
        ++run.failed;
        Trace cex = res.counterexample;
        if (res.tick) cex.push_back(kTickEvent);
        auto deep_spec = cex.size() > depth ? enumerate_traces(engine.lts(), s, cex.size(), true) : spec_tr;
        auto deep_impl = cex.size() > depth ? enumerate_traces(engine.lts(), t, cex.size(), true) : impl_tr;
        ok = deep_impl.count(cex) && !deep_spec.count(cex);
        // Shortest: every strictly shorter impl trace is a spec trace.
        for (const auto& u : deep_impl) {
          if (u.size() < cex.size() && !deep_spec.count(u)) ok = false;
        }
        // Replay through the monitor.
        MonitorSession ms(std::make_shared<Engine>(sample.spec, kSmall), "T");
        auto rep = check_trace(ms, res.counterexample);
        ok = ok && rep.length == res.counterexample.size() && (!res.tick || ms.can_terminate());
        MonitorSession ss(std::make_shared<Engine>(sample.spec, kSmall), "S0");
        auto srep = check_trace(ss, res.counterexample);
        if (res.tick) {
          ok = ok && srep.length == res.counterexample.size() && !ss.can_terminate();
        } else {
          ok = ok && srep.verdict.outcome == Outcome::Rejected && srep.verdict.index + 1 == res.counterexample.size();
        }
      }
      if (!ok) {
        ++run.disagreements;
        note(run, "refinement disagrees (holds " + std::to_string(res.holds) + ")\n" + sample.text);
      }
      ++run.checked;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StateSpaceExceeded) throw;
      ++run.skipped;
    }
  }
  return run;
}

}  // namespace brute
