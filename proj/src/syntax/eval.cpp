#include <algorithm>

#include "cspmon/syntax/ir.hpp"
#include "cspmon/syntax/spec.hpp"

namespace cspmon::ir {

namespace {

constexpr std::size_t kMaxSetSize = std::size_t{1} << 20;

[[noreturn]] void mismatch(const std::string& msg, SourcePos pos) {
  throw Error(ErrorKind::TypeMismatch, msg, pos);
}

const char* kind_name(const RtValue& v) {
  switch (v.index()) {
    case 0: return "a scalar";
    case 1: return "a value set";
    case 2: return "an event";
    default: return "an event set";
  }
}

Value as_scalar(const RtValue& v, SourcePos pos) {
  if (const auto* s = std::get_if<Value>(&v)) return *s;
  mismatch(std::string("expected a scalar, found ") + kind_name(v), pos);
}

std::int64_t as_int(const RtValue& v, SourcePos pos) {
  Value s = as_scalar(v, pos);
  if (s.kind != ScalarKind::Int) mismatch("expected an integer", pos);
  return s.v;
}

bool as_bool(const RtValue& v, SourcePos pos) {
  Value s = as_scalar(v, pos);
  if (s.kind != ScalarKind::Bool) mismatch("expected a boolean", pos);
  return s.v != 0;
}

// A complete event, as an id.
EventId as_event(const ResolvedSpec& spec, const RtValue& v, SourcePos pos) {
  const auto* p = std::get_if<EventPrefix>(&v);
  if (!p) mismatch(std::string("expected an event, found ") + kind_name(v), pos);
  const auto& ch = spec.channels()[p->channel];
  if (p->fields.size() != ch.payload.size()) {
    mismatch("incomplete event '" + ch.name + "'", pos);
  }
  return spec.event_id(p->channel, p->fields);
}

bool is_empty_value_set(const RtValue& v) {
  const auto* s = std::get_if<ValueSet>(&v);
  return s && s->empty();
}

RtValue set_op(const ResolvedSpec& spec, ValOp op, const RtValue& a, const RtValue& b,
               SourcePos pos) {
  const auto* va = std::get_if<ValueSet>(&a);
  const auto* vb = std::get_if<ValueSet>(&b);
  if (va && vb) {
    switch (op) {
      case ValOp::Union: return va->unite(*vb);
      case ValOp::Diff: return va->minus(*vb);
      default: return va->intersect(*vb);
    }
  }
  bool events_a = std::holds_alternative<EventSet>(a) || is_empty_value_set(a);
  bool events_b = std::holds_alternative<EventSet>(b) || is_empty_value_set(b);
  if (!events_a || !events_b) {
    mismatch(std::string("set operation on ") + kind_name(a) + " and " + kind_name(b), pos);
  }
  EventSet ea = to_event_set(spec, a, pos);
  EventSet eb = to_event_set(spec, b, pos);
  switch (op) {
    case ValOp::Union: return ea.unite(eb);
    case ValOp::Diff: return ea.minus(eb);
    default: return ea.intersect(eb);
  }
}

std::int64_t arith(ValOp op, std::int64_t a, std::int64_t b, SourcePos pos) {
  switch (op) {
    case ValOp::Add: return a + b;
    case ValOp::Sub: return a - b;
    case ValOp::Mul: return a * b;
    case ValOp::Div:
      if (b == 0) mismatch("division by zero", pos);
      return a / b;
    default:
      if (b == 0) mismatch("division by zero", pos);
      return a % b;
  }
}

}  // namespace

EventSet to_event_set(const ResolvedSpec& spec, const RtValue& v, SourcePos pos) {
  if (const auto* s = std::get_if<EventSet>(&v)) return *s;
  if (is_empty_value_set(v)) return EventSet(spec.alphabet_size());
  if (const auto* p = std::get_if<EventPrefix>(&v)) {
    // Every event extending the prefix.
    const auto& ch = spec.channels()[p->channel];
    EventSet out(spec.alphabet_size());
    std::vector<Value> fields = p->fields;
    std::size_t fixed = fields.size();
    if (fixed > ch.payload.size()) mismatch("too many fields for '" + ch.name + "'", pos);
    for (std::size_t i = 0; i < fixed; ++i) {
      if (!ch.payload[i].contains(fields[i])) {
        mismatch("value outside the payload type of '" + ch.name + "'", pos);
      }
    }
    fields.resize(ch.payload.size());
    std::vector<std::size_t> idx(ch.payload.size(), 0);
    for (;;) {
      for (std::size_t i = fixed; i < fields.size(); ++i) fields[i] = ch.payload[i].at(idx[i]);
      out.insert(spec.event_id(p->channel, fields));
      std::size_t i = fields.size();
      for (;;) {
        if (i == fixed) return out;
        --i;
        if (++idx[i] < ch.payload[i].cardinality()) break;
        idx[i] = 0;
      }
    }
  }
  mismatch(std::string("expected an event set, found ") + kind_name(v), pos);
}

RtValue evaluate(const ResolvedSpec& spec, const ValNode& n, Env env) {
  auto kid = [&](std::size_t i) { return evaluate(spec, *n.kids[i], env); };
  switch (n.op) {
    case ValOp::Const: return n.constant;
    case ValOp::Var: return env[n.slot];
    case ValOp::Neg: return Value::integer(-as_int(kid(0), n.pos));
    case ValOp::Not: return Value::boolean(!as_bool(kid(0), n.pos));
    case ValOp::Add:
    case ValOp::Sub:
    case ValOp::Mul:
    case ValOp::Div:
    case ValOp::Mod:
      return Value::integer(arith(n.op, as_int(kid(0), n.pos), as_int(kid(1), n.pos), n.pos));
    case ValOp::Eq:
    case ValOp::Ne: {
      RtValue a = kid(0);
      RtValue b = kid(1);
      if (a.index() != b.index()) {
        mismatch(std::string("comparing ") + kind_name(a) + " with " + kind_name(b), n.pos);
      }
      if (const auto* sa = std::get_if<Value>(&a)) {
        if (sa->kind != std::get<Value>(b).kind) mismatch("comparing values of different types", n.pos);
      }
      return Value::boolean((a == b) == (n.op == ValOp::Eq));
    }
    case ValOp::Lt:
    case ValOp::Le:
    case ValOp::Gt:
    case ValOp::Ge: {
      std::int64_t a = as_int(kid(0), n.pos);
      std::int64_t b = as_int(kid(1), n.pos);
      bool r = n.op == ValOp::Lt ? a < b : n.op == ValOp::Le ? a <= b : n.op == ValOp::Gt ? a > b : a >= b;
      return Value::boolean(r);
    }
    case ValOp::And:
      return Value::boolean(as_bool(kid(0), n.pos) && as_bool(kid(1), n.pos));
    case ValOp::Or:
      return Value::boolean(as_bool(kid(0), n.pos) || as_bool(kid(1), n.pos));
    case ValOp::Dot: {
      RtValue a = kid(0);
      auto* p = std::get_if<EventPrefix>(&a);
      if (!p) mismatch("'.' applied to " + std::string(kind_name(a)), n.pos);
      Value field = as_scalar(kid(1), n.pos);
      const auto& ch = spec.channels()[p->channel];
      if (p->fields.size() >= ch.payload.size()) {
        throw Error(ErrorKind::ArityMismatch, "too many fields for channel '" + ch.name + "'", n.pos);
      }
      if (!ch.payload[p->fields.size()].contains(field)) {
        mismatch("value " + spec.value_name(field) + " is outside the payload type of '" + ch.name +
                     "'",
                 n.pos);
      }
      p->fields.push_back(field);
      return a;
    }
    case ValOp::SetLit: {
      if (n.kids.empty()) return ValueSet{};
      std::vector<RtValue> items;
      items.reserve(n.kids.size());
      for (std::size_t i = 0; i < n.kids.size(); ++i) items.push_back(kid(i));
      if (std::holds_alternative<Value>(items[0])) {
        std::vector<Value> vs;
        for (const auto& it : items) {
          Value v = as_scalar(it, n.pos);
          if (!vs.empty() && v.kind != vs.front().kind) mismatch("mixed element types in set", n.pos);
          vs.push_back(v);
        }
        return ValueSet(std::move(vs));
      }
      EventSet es(spec.alphabet_size());
      for (const auto& it : items) es.insert(as_event(spec, it, n.pos));
      return es;
    }
    case ValOp::Range: {
      std::int64_t lo = as_int(kid(0), n.pos);
      std::int64_t hi = as_int(kid(1), n.pos);
      if (hi >= lo && static_cast<std::uint64_t>(hi - lo) >= kMaxSetSize) {
        throw Error(ErrorKind::NonFiniteSet, "range is too large to materialize", n.pos);
      }
      std::vector<Value> vs;
      for (std::int64_t x = lo; x <= hi; ++x) vs.push_back(Value::integer(x));
      return ValueSet(std::move(vs));
    }
    case ValOp::ChanSet: {
      EventSet es(spec.alphabet_size());
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        RtValue v = kid(i);
        if (!std::holds_alternative<EventPrefix>(v)) {
          mismatch("'{| |}' expects channels or event prefixes", n.pos);
        }
        es = es.unite(to_event_set(spec, v, n.pos));
      }
      return es;
    }
    case ValOp::Union:
    case ValOp::Diff:
    case ValOp::Inter:
      return set_op(spec, n.op, kid(0), kid(1), n.pos);
    case ValOp::Member: {
      RtValue x = kid(0);
      RtValue s = kid(1);
      if (const auto* vs = std::get_if<ValueSet>(&s)) {
        if (std::holds_alternative<EventPrefix>(x)) {
          if (vs->empty()) return Value::boolean(false);
        } else {
          return Value::boolean(vs->contains(as_scalar(x, n.pos)));
        }
      }
      EventSet es = to_event_set(spec, s, n.pos);
      return Value::boolean(es.contains(as_event(spec, x, n.pos)));
    }
    case ValOp::Card: {
      RtValue s = kid(0);
      if (const auto* vs = std::get_if<ValueSet>(&s)) return Value::integer(static_cast<std::int64_t>(vs->size()));
      return Value::integer(static_cast<std::int64_t>(to_event_set(spec, s, n.pos).count()));
    }
  }
  mismatch("unsupported value operation", n.pos);
}

Value evaluate_scalar(const ResolvedSpec& spec, const ValNode& node, Env env) {
  return as_scalar(evaluate(spec, node, env), node.pos);
}

bool evaluate_bool(const ResolvedSpec& spec, const ValNode& node, Env env) {
  return as_bool(evaluate(spec, node, env), node.pos);
}

ValueSet evaluate_value_set(const ResolvedSpec& spec, const ValNode& node, Env env) {
  RtValue v = evaluate(spec, node, env);
  if (auto* s = std::get_if<ValueSet>(&v)) return std::move(*s);
  mismatch(std::string("expected a set of values, found ") + kind_name(v), node.pos);
}

EventSet evaluate_event_set(const ResolvedSpec& spec, const ValNode& node, Env env) {
  return to_event_set(spec, evaluate(spec, node, env), node.pos);
}

}  // namespace cspmon::ir
