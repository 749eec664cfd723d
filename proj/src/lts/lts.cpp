#include "cspmon/lts/lts.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace cspmon::lts {

using ir::ProcNode;
using ir::ProcOp;

std::size_t Lts::KeyHash::operator()(const std::vector<std::uint64_t>& k) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (auto w : k) {
    h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

Lts::Lts(std::shared_ptr<const ResolvedSpec> spec, Limits limits)
    : spec_(std::move(spec)), limits_(limits) {
  stop_ = intern({TermKind::Stop, 0, {}, {}, {}});
  skip_ = intern({TermKind::Skip, 0, {}, {}, {}});
  omega_ = intern({TermKind::Omega, 0, {}, {}, {}});
}

Lts::~Lts() = default;

TermId Lts::stop() { return stop_; }
TermId Lts::skip() { return skip_; }
TermId Lts::omega() { return omega_; }

TermId Lts::intern(Term t) {
  std::vector<std::uint64_t> key;
  key.reserve(4 + t.kids.size() + t.sets.size() + t.values.size());
  key.push_back(static_cast<std::uint64_t>(t.kind));
  key.push_back(t.ref);
  key.push_back(t.kids.size());
  for (auto k : t.kids) key.push_back(k);
  key.push_back(t.sets.size());
  for (auto s : t.sets) key.push_back(s);
  for (const auto& v : t.values) key.push_back(v.pack());
  auto [it, fresh] = index_.try_emplace(std::move(key), static_cast<TermId>(terms_.size()));
  if (fresh) {
    if (terms_.size() >= limits_.max_terms) {
      index_.erase(it);
      throw Error(ErrorKind::StateSpaceExceeded,
                  "more than " + std::to_string(limits_.max_terms) + " distinct terms");
    }
    terms_.push_back(std::move(t));
    succ_.emplace_back();
  }
  return it->second;
}

std::uint32_t Lts::intern_set(EventSet s) {
  auto [it, fresh] = set_index_.try_emplace(s, static_cast<std::uint32_t>(sets_.size()));
  if (fresh) sets_.push_back(std::move(s));
  return it->second;
}

TermId Lts::process(std::string_view name, std::span<const Value> args) {
  auto def = spec_->find_process(name);
  if (!def) throw Error(ErrorKind::UnboundName, "unknown process '" + std::string(name) + "'");
  return process(*def, args);
}

TermId Lts::process(std::uint32_t def, std::span<const Value> args) {
  const ProcessDef& pd = spec_->processes().at(def);
  if (pd.params.size() != args.size()) {
    throw Error(ErrorKind::ArityMismatch, "process '" + pd.name + "' expects " +
                                              std::to_string(pd.params.size()) + " argument(s)");
  }
  return call(def, std::vector<Value>(args.begin(), args.end()));
}

TermId Lts::call(std::uint32_t def, std::vector<Value> args) {
  const ProcessDef& pd = spec_->processes()[def];
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (pd.params[i].type && !pd.params[i].type->contains(args[i])) {
      throw Error(ErrorKind::TypeMismatch, "argument " + spec_->value_name(args[i]) +
                                               " is outside the type of parameter '" +
                                               pd.params[i].name + "' of '" + pd.name + "'");
    }
  }
  return intern({TermKind::Call, def, {}, {}, std::move(args)});
}

TermId Lts::binary(TermKind kind, TermId l, TermId r, std::vector<std::uint32_t> sets) {
  return intern({kind, 0, {l, r}, std::move(sets), {}});
}

TermId Lts::build(const ProcNode& n, std::vector<Value>& env) {
  const ResolvedSpec& s = *spec_;
  switch (n.op) {
    case ProcOp::Stop: return stop_;
    case ProcOp::Skip: return skip_;
    case ProcOp::Prefix: {
      Term t{TermKind::Prefix, n.id, {}, {}, {}};
      t.values.reserve(n.captured.size());
      for (auto slot : n.captured) t.values.push_back(env[slot]);
      return intern(std::move(t));
    }
    case ProcOp::ExtChoice: {
      TermId l = build(*n.kids[0], env);
      return binary(TermKind::ExtChoice, l, build(*n.kids[1], env));
    }
    case ProcOp::IntChoice: {
      TermId l = build(*n.kids[0], env);
      return binary(TermKind::IntChoice, l, build(*n.kids[1], env));
    }
    case ProcOp::Seq: {
      TermId l = build(*n.kids[0], env);
      return binary(TermKind::Seq, l, build(*n.kids[1], env));
    }
    case ProcOp::RepExtChoice: {
      ValueSet set = ir::evaluate_value_set(s, *n.vals[0], env);
      const auto& items = set.items();
      if (items.empty()) return stop_;
      TermId acc = 0;
      for (std::size_t i = items.size(); i-- > 0;) {
        env[n.slot] = items[i];
        TermId b = build(*n.kids[0], env);
        acc = i + 1 == items.size() ? b : binary(TermKind::ExtChoice, b, acc);
      }
      return acc;
    }
    case ProcOp::GenPar:
    case ProcOp::Interleave: {
      std::uint32_t sync = n.op == ProcOp::GenPar
                               ? intern_set(ir::evaluate_event_set(s, *n.vals[0], env))
                               : intern_set(EventSet(s.alphabet_size()));
      TermId l = build(*n.kids[0], env);
      return binary(TermKind::GenPar, l, build(*n.kids[1], env), {sync});
    }
    case ProcOp::AlphaPar: {
      std::uint32_t a = intern_set(ir::evaluate_event_set(s, *n.vals[0], env));
      std::uint32_t b = intern_set(ir::evaluate_event_set(s, *n.vals[1], env));
      TermId l = build(*n.kids[0], env);
      return binary(TermKind::AlphaPar, l, build(*n.kids[1], env), {a, b});
    }
    case ProcOp::Hide: {
      std::uint32_t h = intern_set(ir::evaluate_event_set(s, *n.vals[0], env));
      return intern({TermKind::Hide, 0, {build(*n.kids[0], env)}, {h}, {}});
    }
    case ProcOp::If:
      return build(*n.kids[ir::evaluate_bool(s, *n.vals[0], env) ? 0 : 1], env);
    case ProcOp::Call: {
      std::vector<Value> args;
      args.reserve(n.vals.size());
      for (const auto* v : n.vals) args.push_back(ir::evaluate_scalar(s, *v, env));
      return call(n.def, std::move(args));
    }
  }
  return stop_;
}

void Lts::fire_prefix(const Term& t, std::vector<Transition>& out) {
  const ResolvedSpec& s = *spec_;
  const ProcNode& n = s.node(t.ref);
  const Channel& ch = s.channels()[n.channel];
  std::vector<Value> env(n.frame_size);
  for (std::size_t i = 0; i < n.captured.size(); ++i) env[n.captured[i]] = t.values[i];
  std::vector<Value> fields(n.fields.size());

  auto rec = [&](auto& self, std::size_t i) -> void {
    if (i == n.fields.size()) {
      EventId e = s.event_id(n.channel, fields);
      out.push_back({static_cast<Label>(e), build(*n.kids[0], env)});
      return;
    }
    const ir::PrefixField& f = n.fields[i];
    const ValueType& type = ch.payload[i];
    if (!f.input) {
      Value v = ir::evaluate_scalar(s, *f.value, env);
      if (!type.contains(v)) {
        throw Error(ErrorKind::TypeMismatch, "value " + s.value_name(v) +
                                                 " is outside the payload type of '" + ch.name + "'",
                    f.value->pos);
      }
      fields[i] = v;
      self(self, i + 1);
      return;
    }
    std::optional<ValueSet> restriction;
    if (f.restriction) restriction = ir::evaluate_value_set(s, *f.restriction, env);
    for (const Value& v : type.domain.items()) {
      if (restriction && !restriction->contains(v)) continue;
      fields[i] = v;
      if (f.slot != ir::kNoSlot) env[f.slot] = v;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
}

std::vector<Transition> Lts::compute(TermId id) {
  std::vector<Transition> out;
  // Copy: building terms may grow terms_ and invalidate references.
  const Term t = terms_[id];
  switch (t.kind) {
    case TermKind::Stop:
    case TermKind::Omega:
      break;
    case TermKind::Skip:
      out.push_back({kTick, omega_});
      break;
    case TermKind::Prefix:
      fire_prefix(t, out);
      break;
    case TermKind::Call: {
      const ProcessDef& pd = spec_->processes()[t.ref];
      std::vector<Value> env(pd.frame_size);
      std::copy(t.values.begin(), t.values.end(), env.begin());
      out.push_back({kTau, build(*pd.body, env)});
      break;
    }
    case TermKind::IntChoice:
      out.push_back({kTau, t.kids[0]});
      out.push_back({kTau, t.kids[1]});
      break;
    case TermKind::ExtChoice:
      for (int side = 0; side < 2; ++side) {
        auto moves = successors(t.kids[side]);
        for (const auto& m : moves) {
          if (m.label != kTau) {
            out.push_back(m);
          } else if (side == 0) {
            out.push_back({kTau, binary(TermKind::ExtChoice, m.target, t.kids[1])});
          } else {
            out.push_back({kTau, binary(TermKind::ExtChoice, t.kids[0], m.target)});
          }
        }
      }
      break;
    case TermKind::Seq: {
      auto moves = successors(t.kids[0]);
      for (const auto& m : moves) {
        if (m.label == kTick) {
          out.push_back({kTau, t.kids[1]});
        } else {
          out.push_back({m.label, binary(TermKind::Seq, m.target, t.kids[1])});
        }
      }
      break;
    }
    case TermKind::Hide: {
      const EventSet hidden = sets_[t.sets[0]];  // copy: the set table may grow
      auto moves = successors(t.kids[0]);
      for (const auto& m : moves) {
        if (m.label == kTick) {
          out.push_back({kTick, omega_});
        } else if (m.label >= 0 && hidden.contains(static_cast<EventId>(m.label))) {
          out.push_back({kTau, intern({TermKind::Hide, 0, {m.target}, t.sets, {}})});
        } else {
          out.push_back({m.label, intern({TermKind::Hide, 0, {m.target}, t.sets, {}})});
        }
      }
      break;
    }
    case TermKind::GenPar:
    case TermKind::AlphaPar: {
      bool alpha = t.kind == TermKind::AlphaPar;
      TermId l = t.kids[0];
      TermId r = t.kids[1];
      if (l == omega_ && r == omega_) {
        out.push_back({kTick, omega_});
        break;
      }
      // Copies, since the set table may grow while building.
      EventSet sync = alpha ? sets_[t.sets[0]].intersect(sets_[t.sets[1]]) : sets_[t.sets[0]];
      EventSet own_l = alpha ? sets_[t.sets[0]] : EventSet();
      EventSet own_r = alpha ? sets_[t.sets[1]] : EventSet();
      auto make = [&](TermId a, TermId b) {
        return intern({t.kind, 0, {a, b}, t.sets, {}});
      };
      auto lm = successors(l);
      auto rm = successors(r);
      for (const auto& m : lm) {
        if (m.label == kTau) {
          out.push_back({kTau, make(m.target, r)});
        } else if (m.label == kTick) {
          out.push_back({kTau, make(omega_, r)});
        } else {
          auto e = static_cast<EventId>(m.label);
          if (sync.contains(e)) continue;
          if (alpha && !own_l.contains(e)) continue;
          out.push_back({m.label, make(m.target, r)});
        }
      }
      for (const auto& m : rm) {
        if (m.label == kTau) {
          out.push_back({kTau, make(l, m.target)});
        } else if (m.label == kTick) {
          out.push_back({kTau, make(l, omega_)});
        } else {
          auto e = static_cast<EventId>(m.label);
          if (sync.contains(e)) continue;
          if (alpha && !own_r.contains(e)) continue;
          out.push_back({m.label, make(l, m.target)});
        }
      }
      for (const auto& a : lm) {
        if (a.label < 0 || !sync.contains(static_cast<EventId>(a.label))) continue;
        for (const auto& b : rm) {
          if (b.label == a.label) out.push_back({a.label, make(a.target, b.target)});
        }
      }
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const std::vector<Transition>& Lts::successors(TermId t) {
  if (!succ_[t]) {
    auto moves = compute(t);
    succ_[t] = std::move(moves);
  }
  return *succ_[t];
}

bool Lts::stable(TermId t) {
  const auto& moves = successors(t);
  return moves.empty() || moves.front().label != kTau;
}

ClosureResult Lts::tau_closure(std::span<const TermId> states) {
  ClosureResult out;
  std::unordered_map<TermId, std::uint32_t> local;  // term -> position in order
  std::vector<TermId> order;
  std::deque<TermId> queue;
  for (TermId t : states) {
    if (local.emplace(t, static_cast<std::uint32_t>(order.size())).second) {
      order.push_back(t);
      queue.push_back(t);
    }
  }
  while (!queue.empty()) {
    TermId t = queue.front();
    queue.pop_front();
    for (const auto& m : successors(t)) {
      if (m.label != kTau) break;  // τ sorts first
      if (local.emplace(m.target, static_cast<std::uint32_t>(order.size())).second) {
        if (order.size() >= limits_.max_states) {
          out.truncated = true;
          queue.clear();
          break;
        }
        order.push_back(m.target);
        queue.push_back(m.target);
      }
    }
  }
  // A τ-cycle exists iff Kahn's algorithm cannot consume every member.
  std::vector<std::uint32_t> indeg(order.size(), 0);
  for (TermId t : order) {
    for (const auto& m : successors(t)) {
      if (m.label != kTau) break;
      auto it = local.find(m.target);
      if (it != local.end() && it->second < order.size()) ++indeg[it->second];
    }
  }
  std::vector<std::uint32_t> ready;
  for (std::uint32_t i = 0; i < order.size(); ++i) {
    if (indeg[i] == 0) ready.push_back(i);
  }
  std::size_t consumed = 0;
  while (!ready.empty()) {
    std::uint32_t i = ready.back();
    ready.pop_back();
    ++consumed;
    for (const auto& m : successors(order[i])) {
      if (m.label != kTau) break;
      auto it = local.find(m.target);
      if (it != local.end() && it->second < order.size() && --indeg[it->second] == 0) {
        ready.push_back(it->second);
      }
    }
  }
  out.divergent = consumed < order.size();
  out.states = std::move(order);
  std::sort(out.states.begin(), out.states.end());
  return out;
}

EventSet Lts::visible_initials(std::span<const TermId> states) {
  EventSet out(spec_->alphabet_size());
  for (TermId t : states) {
    for (const auto& m : successors(t)) {
      if (m.label >= 0) out.insert(static_cast<EventId>(m.label));
    }
  }
  return out;
}

std::string Lts::describe(TermId id) const {
  const Term& t = terms_[id];
  const ResolvedSpec& s = *spec_;
  auto sub = [&](std::size_t k) {
    const Term& c = terms_[t.kids[k]];
    bool atomic = c.kind == TermKind::Stop || c.kind == TermKind::Skip || c.kind == TermKind::Omega ||
                  c.kind == TermKind::Call;
    return atomic ? describe(t.kids[k]) : "(" + describe(t.kids[k]) + ")";
  };
  auto set_text = [&](std::uint32_t sid) {
    std::string out = "{";
    bool first = true;
    for (EventId e : sets_[sid].members()) {
      out += (first ? "" : ", ") + s.event_name(e);
      first = false;
    }
    return out + "}";
  };
  switch (t.kind) {
    case TermKind::Stop: return "STOP";
    case TermKind::Skip: return "SKIP";
    case TermKind::Omega: return "OMEGA";
    case TermKind::Prefix: {
      const ProcNode& n = s.node(t.ref);
      std::ostringstream out;
      out << s.channels()[n.channel].name << " -> ...";
      out << "@" << t.ref;
      if (!t.values.empty()) {
        out << '[';
        for (std::size_t i = 0; i < t.values.size(); ++i) out << (i ? "," : "") << s.value_name(t.values[i]);
        out << ']';
      }
      return out.str();
    }
    case TermKind::Call: {
      const ProcessDef& pd = s.processes()[t.ref];
      std::string out = pd.name;
      if (!pd.params.empty()) {
        out += "(";
        for (std::size_t i = 0; i < t.values.size(); ++i) out += (i ? ", " : "") + s.value_name(t.values[i]);
        out += ")";
      }
      return out;
    }
    case TermKind::ExtChoice: return sub(0) + " [] " + sub(1);
    case TermKind::IntChoice: return sub(0) + " |~| " + sub(1);
    case TermKind::Seq: return sub(0) + " ; " + sub(1);
    case TermKind::GenPar:
      if (sets_[t.sets[0]].empty()) return sub(0) + " ||| " + sub(1);
      return sub(0) + " [| " + set_text(t.sets[0]) + " |] " + sub(1);
    case TermKind::AlphaPar:
      return sub(0) + " [ " + set_text(t.sets[0]) + " || " + set_text(t.sets[1]) + " ] " + sub(1);
    case TermKind::Hide: return sub(0) + " \\ " + set_text(t.sets[0]);
  }
  return "?";
}

}  // namespace cspmon::lts
