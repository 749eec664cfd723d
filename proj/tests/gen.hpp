#pragma once

// Random generators for property tests.

#include <random>
#include <string>
#include <vector>

#include "cspmon/syntax/ast.hpp"

namespace gen {

using namespace cspmon::syntax;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(eng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng_); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(below(static_cast<int>(v.size())))];
  }

 private:
  std::mt19937_64 eng_;
};

// -- syntax: arbitrary well-formed trees for the printer round trip ----------

inline ExprRef value(Rng& r, int depth);
inline ExprRef process(Rng& r, int depth);

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> v = {"x", "y", "N", "Speed", "c", "d2", "P_1"};
  return v;
}

inline ExprRef leaf_value(Rng& r) {
  switch (r.below(4)) {
    case 0: return make_int(r.below(20) - 5);
    case 1: return make_bool(r.coin());
    case 2: return make_expr(ExprKind::Events);
    default: return make_name(r.pick(names()));
  }
}

inline ExprRef value(Rng& r, int depth) {
  if (depth <= 1) return leaf_value(r);
  static const std::vector<std::string> ops = {"+", "-", "*", "/", "%", "==", "!=",
                                               "<", "<=", ">", ">=", "and", "or"};
  switch (r.below(10)) {
    case 0: return leaf_value(r);
    case 1: {
      std::vector<ExprRef> args;
      int n = 1 + r.below(2);
      for (int i = 0; i < n; ++i) args.push_back(value(r, depth - 1));
      return make_expr(ExprKind::Apply, args, r.coin() ? "union" : "card");
    }
    case 2: return make_expr(ExprKind::Dot, {value(r, depth - 1), value(r, depth - 1)});
    case 3: {
      auto inner = value(r, depth - 1);
      if (r.coin()) return make_expr(ExprKind::Unary, {inner}, "not");
      if (inner->kind == ExprKind::IntLit) inner = make_name("x");
      return make_expr(ExprKind::Unary, {inner}, "-");
    }
    case 4:
    case 5: return make_expr(ExprKind::Binary, {value(r, depth - 1), value(r, depth - 1)}, r.pick(ops));
    case 6: {
      std::vector<ExprRef> items;
      int n = r.below(3);
      for (int i = 0; i < n; ++i) items.push_back(value(r, depth - 1));
      return make_expr(ExprKind::SetLit, items);
    }
    case 7: return make_expr(ExprKind::RangeSet, {value(r, depth - 1), value(r, depth - 1)});
    case 8: {
      std::vector<ExprRef> items{value(r, depth - 1)};
      if (r.coin()) items.push_back(value(r, depth - 1));
      return make_expr(ExprKind::ChanSet, items);
    }
    default: return leaf_value(r);
  }
}

inline ExprRef process(Rng& r, int depth) {
  if (depth <= 1) {
    switch (r.below(4)) {
      case 0: return make_expr(ExprKind::Stop);
      case 1: return make_expr(ExprKind::Skip);
      case 2: return make_name(r.pick(names()));
      default: return make_prefix("a", {}, make_expr(ExprKind::Stop));
    }
  }
  auto p = [&] { return process(r, depth - 1); };
  auto v = [&] { return value(r, depth - 1); };
  switch (r.below(14)) {
    case 0: {
      std::vector<EventField> fields;
      int n = r.below(3);
      for (int i = 0; i < n; ++i) {
        EventField f;
        switch (r.below(3)) {
          case 0:
            f.kind = EventField::Kind::Dot;
            f.value = value(r, 2);
            break;
          case 1:
            f.kind = EventField::Kind::Output;
            f.value = value(r, 2);
            break;
          default:
            f.kind = EventField::Kind::Input;
            f.binder = r.coin(0.2) ? "_" : r.pick(names());
            if (r.coin()) f.restriction = value(r, 2);
        }
        fields.push_back(f);
      }
      return make_prefix(r.coin() ? "c" : "speed", fields, p());
    }
    case 1: return make_expr(ExprKind::ExtChoice, {p(), p()});
    case 2: return make_expr(ExprKind::IntChoice, {p(), p()});
    case 3: return make_expr(ExprKind::RepExtChoice, {v(), p()}, "k");
    case 4: return make_expr(ExprKind::Seq, {p(), p()});
    case 5: return make_expr(ExprKind::GenPar, {p(), v(), p()});
    case 6: return make_expr(ExprKind::AlphaPar, {p(), v(), v(), p()});
    case 7: return make_expr(ExprKind::Interleave, {p(), p()});
    case 8: return make_expr(ExprKind::Hide, {p(), v()});
    case 9: return make_expr(ExprKind::If, {v(), p(), p()});
    case 10: {
      std::vector<ExprRef> args;
      int n = 1 + r.below(2);
      for (int i = 0; i < n; ++i) args.push_back(v());
      return make_expr(ExprKind::Apply, args, "Q");
    }
    default: return make_prefix("b", {}, p());
  }
}

inline Module module(Rng& r, int depth) {
  Module m;
  int n = 1 + r.below(6);
  for (int i = 0; i < n; ++i) {
    switch (r.below(7)) {
      case 0: {
        ChannelDecl c;
        c.names = {"c" + std::to_string(i)};
        if (r.coin()) c.names.push_back("e" + std::to_string(i));
        int k = r.below(3);
        for (int j = 0; j < k; ++j) c.payload.push_back(value(r, 2));
        m.decls.emplace_back(c);
        break;
      }
      case 1: m.decls.emplace_back(DatatypeDecl{"T" + std::to_string(i), {"A" + std::to_string(i), "B" + std::to_string(i)}, {}}); break;
      case 2: m.decls.emplace_back(NametypeDecl{"S" + std::to_string(i), value(r, depth), {}}); break;
      case 3: {
        AssertDecl a;
        a.kind = static_cast<AssertKind>(r.below(5));
        a.process = process(r, depth);
        if (a.kind == AssertKind::TracesRefinement) a.impl = process(r, depth);
        if (a.kind == AssertKind::HasTrace) {
          int k = r.below(3);
          for (int j = 0; j < k; ++j) {
            a.trace.push_back(r.coin() ? make_name("a")
                                       : make_expr(ExprKind::Dot, {make_name("c"), make_int(r.below(3))}));
          }
        }
        m.decls.emplace_back(a);
        break;
      }
      case 4: m.decls.emplace_back(IncludeDecl{"other.csp", {}}); break;
      default: {
        Definition d;
        d.name = "D" + std::to_string(i);
        d.has_params = r.coin();
        if (d.has_params) {
          int k = r.below(3);
          for (int j = 0; j < k; ++j) {
            Param p{"p" + std::to_string(j), {}};
            if (r.coin()) p.type = value(r, 2);
            d.params.push_back(p);
          }
        }
        d.body = r.coin() ? process(r, depth) : value(r, depth);
        m.decls.emplace_back(d);
      }
    }
  }
  return m;
}

// -- semantics: small resolvable processes over four events -----------------


struct ProcConfig {
  int depth = 6;
  int defs = 3;
  bool allow_divergence = false;
  bool recursion = true;
  std::string prefix = "P";
};

class ProcGen {
 public:
  ProcGen(Rng& r, ProcConfig cfg) : r_(r), cfg_(std::move(cfg)) {}

  /// Definitions prefix0..prefix{defs-1}; prefix0 is the root.
  std::vector<Definition> definitions() {
    std::vector<Definition> out;
    for (int i = 0; i < cfg_.defs; ++i) {
      vars_.clear();
      Definition d;
      d.name = cfg_.prefix + std::to_string(i);
      d.body = proc(cfg_.depth, false);
      out.push_back(d);
    }
    return out;
  }

 private:
  ExprRef call() { return make_name(cfg_.prefix + std::to_string(r_.below(cfg_.defs))); }

  ExprRef event_set() {
    static const std::vector<std::string> atoms = {"a", "b", "n.0", "n.1"};
    if (r_.coin(0.15)) return make_expr(ExprKind::ChanSet, {make_name("n")});
    std::vector<ExprRef> items;
    for (const auto& a : atoms) {
      if (!r_.coin(0.4)) continue;
      if (a[0] == 'n') {
        items.push_back(make_expr(ExprKind::Dot, {make_name("n"), make_int(a[2] - '0')}));
      } else {
        items.push_back(make_name(a));
      }
    }
    return make_expr(ExprKind::SetLit, items);
  }

  ExprRef guarded_cont(int depth, bool under_hide) {
    bool may_call = cfg_.recursion && (cfg_.allow_divergence || !under_hide);
    if (may_call && r_.coin(0.3)) return call();
    return proc(depth, under_hide);
  }

  ExprRef prefix(int depth, bool under_hide) {
    std::vector<EventField> fields;
    std::string ch;
    std::size_t bound = 0;
    switch (r_.below(5)) {
      case 0: ch = "a"; break;
      case 1: ch = "b"; break;
      case 2:
        ch = "n";
        fields.push_back({EventField::Kind::Dot, make_int(r_.below(2)), {}, {}});
        break;
      case 3:
        ch = "n";
        if (!vars_.empty()) {
          fields.push_back({EventField::Kind::Output, make_name(r_.pick(vars_)), {}, {}});
        } else {
          fields.push_back({EventField::Kind::Output, make_int(r_.below(2)), {}, {}});
        }
        break;
      default: {
        ch = "n";
        EventField f{EventField::Kind::Input, {}, "x" + std::to_string(vars_.size()), {}};
        if (r_.coin(0.3)) f.restriction = make_expr(ExprKind::SetLit, {make_int(r_.below(2))});
        fields.push_back(f);
        vars_.push_back(f.binder);
        bound = 1;
      }
    }
    auto cont = guarded_cont(depth - 1, under_hide);
    vars_.resize(vars_.size() - bound);
    return make_prefix(ch, fields, cont);
  }

  ExprRef proc(int depth, bool under_hide) {
    if (depth <= 1) {
      switch (r_.below(4)) {
        case 0: return make_expr(ExprKind::Stop);
        case 1: return make_expr(ExprKind::Skip);
        default: return prefix(1, under_hide);
      }
    }
    auto p = [&] { return proc(depth - 1, under_hide); };
    switch (r_.below(13)) {
      case 0: return make_expr(ExprKind::Stop);
      case 1: return make_expr(ExprKind::Skip);
      case 2:
      case 3: return prefix(depth, under_hide);
      case 4: return make_expr(ExprKind::ExtChoice, {p(), p()});
      case 5: return make_expr(ExprKind::IntChoice, {p(), p()});
      case 6: return make_expr(ExprKind::Seq, {p(), p()});
      case 7: return make_expr(ExprKind::GenPar, {p(), event_set(), p()});
      case 8: return make_expr(ExprKind::AlphaPar, {p(), event_set(), event_set(), p()});
      case 9: return make_expr(ExprKind::Interleave, {p(), p()});
      case 10: {
        bool inner = !cfg_.allow_divergence || under_hide;
        return make_expr(ExprKind::Hide, {proc(depth - 1, inner), event_set()});
      }
      case 11: {
        ExprRef cond = vars_.empty()
                           ? make_bool(r_.coin())
                           : make_expr(ExprKind::Binary, {make_name(r_.pick(vars_)), make_int(0)}, "==");
        return make_expr(ExprKind::If, {cond, p(), p()});
      }
      default: {
        if (cfg_.allow_divergence && r_.coin(0.3)) return call();
        std::string k = "k" + std::to_string(vars_.size());
        vars_.push_back(k);
        auto body = make_prefix("n", {{EventField::Kind::Dot, make_name(k), {}, {}}}, guarded_cont(depth - 1, under_hide));
        vars_.pop_back();
        return make_expr(ExprKind::RepExtChoice, {make_expr(ExprKind::RangeSet, {make_int(0), make_int(1)}), body}, k);
      }
    }
  }

  Rng& r_;
  ProcConfig cfg_;
  std::vector<std::string> vars_;
};

inline Module alphabet_module() {
  Module m;
  m.decls.emplace_back(ChannelDecl{{"a", "b"}, {}, {}});
  m.decls.emplace_back(
      ChannelDecl{{"n"}, {make_expr(ExprKind::RangeSet, {make_int(0), make_int(1)})}, {}});
  return m;
}

}  // namespace gen
