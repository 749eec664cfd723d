#include <algorithm>
#include <filesystem>
#include <set>

#include "cspmon/syntax/parser.hpp"
#include "cspmon/syntax/printer.hpp"
#include "cspmon/syntax/spec.hpp"

namespace cspmon {

using namespace syntax;
using ir::ProcNode;
using ir::ProcOp;
using ir::RtValue;
using ir::ValNode;
using ir::ValOp;

namespace {

constexpr std::size_t kMaxAlphabet = std::size_t{1} << 20;

const std::set<std::string, std::less<>> kBuiltins = {"Bool", "Int",    "union", "diff",
                                                      "inter", "member", "card"};

bool is_process_kind(ExprKind k) {
  switch (k) {
    case ExprKind::Stop:
    case ExprKind::Skip:
    case ExprKind::Prefix:
    case ExprKind::ExtChoice:
    case ExprKind::IntChoice:
    case ExprKind::RepExtChoice:
    case ExprKind::Seq:
    case ExprKind::GenPar:
    case ExprKind::AlphaPar:
    case ExprKind::Interleave:
    case ExprKind::Hide:
      return true;
    default:
      return false;
  }
}

ValueType classify_type(ValueSet domain, std::string name) {
  ValueType t;
  t.name = std::move(name);
  const auto& items = domain.items();
  if (items.front().kind == ScalarKind::Bool) {
    t.kind = items.size() == 2 ? ValueType::Kind::Bool : ValueType::Kind::Finite;
  } else if (items.front().kind == ScalarKind::Int) {
    bool contiguous = items.back().v - items.front().v + 1 == static_cast<std::int64_t>(items.size());
    t.kind = contiguous ? ValueType::Kind::IntRange : ValueType::Kind::Finite;
  } else {
    t.kind = ValueType::Kind::Finite;
  }
  t.domain = std::move(domain);
  return t;
}

void add_slots(const ValNode* v, std::set<std::uint32_t>& out) {
  if (!v || v->closed) return;
  if (v->op == ValOp::Var) out.insert(v->slot);
  for (const auto* k : v->kids) add_slots(k, out);
}

}  // namespace

class Resolver {
 public:
  explicit Resolver(ResolvedSpec& spec) : s_(spec) {}

  void run(std::vector<Module> modules) {
    s_.modules_ = std::move(modules);
    register_names();
    resolve_channels();
    classify_definitions();
    evaluate_constants();
    compile_processes();
    compile_assertions();
  }

 private:
  enum class NameKind { Channel, Datatype, Ctor, Nametype, Definition };
  struct Global {
    NameKind kind;
    const Module* module = nullptr;
    const void* decl = nullptr;
    SourcePos pos;
  };
  struct Scope {
    std::vector<std::pair<std::string, std::uint32_t>> vars;
    std::uint32_t next_slot = 0;
  };

  // -- diagnostics ----------------------------------------------------------

  [[noreturn]] void fail(ErrorKind kind, const std::string& msg, SourcePos pos) const {
    throw Error(kind, msg, pos, origin_);
  }

  // Re-throws an evaluator error with this module's origin attached.
  template <class F>
  auto with_origin(SourcePos pos, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const Error& err) {
      if (!err.origin().empty()) throw;
      SourcePos at = err.pos().line ? err.pos() : pos;
      throw Error(err.kind(), err.detail(), at, origin_);
    }
  }

  struct OriginGuard {
    Resolver& r;
    std::string saved;
    OriginGuard(Resolver& res, const std::string& o) : r(res), saved(res.origin_) { r.origin_ = o; }
    ~OriginGuard() { r.origin_ = saved; }
  };

  // -- pass 1: names --------------------------------------------------------

  void claim(const std::string& name, Global g) {
    if (kBuiltins.count(name)) {
      fail(ErrorKind::DuplicateDefinition, "'" + name + "' is a builtin name", g.pos);
    }
    if (globals_.count(name)) {
      fail(ErrorKind::DuplicateDefinition, "'" + name + "' is already defined", g.pos);
    }
    globals_.emplace(name, g);
  }

  void register_names() {
    ValueType b;
    b.kind = ValueType::Kind::Bool;
    b.name = "Bool";
    b.domain = ValueSet({Value::boolean(false), Value::boolean(true)});
    s_.types_["Bool"] = b;

    for (const auto& m : s_.modules_) {
      origin_ = m.origin;
      for (const auto& d : m.decls) {
        if (const auto* c = std::get_if<ChannelDecl>(&d)) {
          for (const auto& n : c->names) {
            claim(n, {NameKind::Channel, &m, c, c->loc.pos});
            s_.channel_index_[n] = static_cast<std::uint32_t>(s_.channels_.size());
            Channel ch;
            ch.name = n;
            s_.channels_.push_back(ch);
            channel_decls_.push_back(c);
            channel_modules_.push_back(&m);
          }
        } else if (const auto* t = std::get_if<DatatypeDecl>(&d)) {
          claim(t->name, {NameKind::Datatype, &m, t, t->loc.pos});
          std::vector<Value> dom;
          for (const auto& c : t->constructors) {
            claim(c, {NameKind::Ctor, &m, t, t->loc.pos});
            auto idx = static_cast<std::uint32_t>(s_.ctor_names_.size());
            s_.ctor_index_[c] = idx;
            s_.ctor_names_.push_back(c);
            dom.push_back(Value::ctor(idx));
          }
          if (dom.empty()) fail(ErrorKind::TypeMismatch, "datatype '" + t->name + "' is empty", t->loc.pos);
          ValueType vt;
          vt.kind = ValueType::Kind::Enum;
          vt.name = t->name;
          vt.domain = ValueSet(std::move(dom));
          s_.types_[t->name] = vt;
        } else if (const auto* n = std::get_if<NametypeDecl>(&d)) {
          claim(n->name, {NameKind::Nametype, &m, n, n->loc.pos});
        } else if (const auto* def = std::get_if<Definition>(&d)) {
          claim(def->name, {NameKind::Definition, &m, def, def->loc.pos});
        }
      }
    }
  }

  // -- pass 2: alphabet -----------------------------------------------------

  void resolve_channels() {
    std::size_t next = 0;
    for (std::size_t i = 0; i < s_.channels_.size(); ++i) {
      const ChannelDecl* decl = channel_decls_[i];
      OriginGuard g(*this, channel_modules_[i]->origin);
      Channel& ch = s_.channels_[i];
      std::size_t count = 1;
      for (const auto& te : decl->payload) {
        ValueSet dom = type_expr(*te);
        std::string name = te->kind == ExprKind::Name ? te->text : print_expr(*te);
        ValueType vt;
        auto known = s_.types_.find(name);
        if (te->kind == ExprKind::Name && known != s_.types_.end()) {
          vt = known->second;
        } else {
          vt = classify_type(std::move(dom), name);
        }
        count *= vt.cardinality();
        if (count > kMaxAlphabet) {
          fail(ErrorKind::NonFiniteSet, "channel '" + ch.name + "' has too many events", te->loc.pos);
        }
        ch.payload.push_back(std::move(vt));
      }
      ch.first_event = static_cast<EventId>(next);
      ch.event_count = count;
      next += count;
      if (next > kMaxAlphabet) fail(ErrorKind::NonFiniteSet, "alphabet is too large", decl->loc.pos);
    }
    s_.alphabet_size_ = next;
    s_.universe_ = EventSet::full(next);
    alphabet_ready_ = true;
  }

  ValueSet type_expr(const Expr& e) {
    Scope none;
    const ValNode* v = compile_value(e, none);
    const auto* set = std::get_if<ValueSet>(&v->constant);
    if (!set) fail(ErrorKind::TypeMismatch, "expected a set of values as a type", e.loc.pos);
    if (set->empty()) fail(ErrorKind::TypeMismatch, "empty type", e.loc.pos);
    return *set;
  }

  // -- pass 3: processes vs constants ---------------------------------------

  const Definition* definition(std::string_view name) const {
    auto it = globals_.find(std::string(name));
    if (it == globals_.end() || it->second.kind != NameKind::Definition) return nullptr;
    return static_cast<const Definition*>(it->second.decl);
  }

  bool is_process_def(const std::string& name) {
    const Definition* def = definition(name);
    if (!def) return false;
    if (def->has_params) return true;
    auto it = process_class_.find(name);
    if (it != process_class_.end()) return it->second != 3;  // visiting counts as process
    process_class_[name] = 1;
    bool p = looks_like_process(*def->body);
    process_class_[name] = p ? 2 : 3;
    return p;
  }

  bool looks_like_process(const Expr& e) {
    if (is_process_kind(e.kind)) return true;
    switch (e.kind) {
      case ExprKind::If: return looks_like_process(*e.args[1]) || looks_like_process(*e.args[2]);
      case ExprKind::Name: return is_process_def(e.text);
      case ExprKind::Apply: return definition(e.text) != nullptr;
      default: return false;
    }
  }

  void classify_definitions() {
    for (const auto& m : s_.modules_) {
      for (const auto& d : m.decls) {
        const auto* def = std::get_if<Definition>(&d);
        if (!def || !is_process_def(def->name)) continue;
        s_.process_index_[def->name] = static_cast<std::uint32_t>(s_.processes_.size());
        ProcessDef pd;
        pd.name = def->name;
        for (const auto& p : def->params) pd.params.push_back({p.name, std::nullopt});
        s_.processes_.push_back(std::move(pd));
      }
    }
  }

  // -- pass 4: constants ----------------------------------------------------

  const RtValue& constant(const std::string& name, SourcePos use) {
    auto done = s_.constants_.find(name);
    if (done != s_.constants_.end()) return done->second;
    if (evaluating_.count(name)) fail(ErrorKind::TypeMismatch, "circular definition of '" + name + "'", use);
    const Global& g = globals_.at(name);
    const Expr* body = g.kind == NameKind::Nametype ? static_cast<const NametypeDecl*>(g.decl)->value.get()
                                                     : static_cast<const Definition*>(g.decl)->body.get();
    evaluating_.insert(name);
    OriginGuard guard(*this, g.module->origin);
    Scope none;
    const ValNode* v = compile_value(*body, none);
    evaluating_.erase(name);
    return s_.constants_.emplace(name, v->constant).first->second;
  }

  void evaluate_constants() {
    for (const auto& [name, g] : globals_) {
      if (g.kind == NameKind::Nametype ||
          (g.kind == NameKind::Definition && !s_.process_index_.count(name))) {
        constant(name, g.pos);
      }
    }
  }

  // -- values ---------------------------------------------------------------

  ValNode* new_val(ValOp op, SourcePos pos) {
    s_.val_nodes_.push_back(std::make_unique<ValNode>());
    ValNode* n = s_.val_nodes_.back().get();
    n->op = op;
    n->pos = pos;
    return n;
  }

  const ValNode* constant_node(RtValue v, SourcePos pos) {
    ValNode* n = new_val(ValOp::Const, pos);
    n->constant = std::move(v);
    return n;
  }

  // Folds a node whose operands are all closed.
  const ValNode* finish(ValNode* n) {
    n->closed = std::all_of(n->kids.begin(), n->kids.end(), [](const ValNode* k) { return k->closed; });
    if (!n->closed || n->op == ValOp::Const) return n;
    RtValue v = with_origin(n->pos, [&] { return ir::evaluate(s_, *n, {}); });
    n->op = ValOp::Const;
    n->constant = std::move(v);
    n->kids.clear();
    return n;
  }

  const ValNode* compile_value(const Expr& e, Scope& sc) {
    SourcePos pos = e.loc.pos;
    switch (e.kind) {
      case ExprKind::IntLit: return constant_node(Value::integer(e.number), pos);
      case ExprKind::BoolLit: return constant_node(Value::boolean(e.number != 0), pos);
      case ExprKind::Name: return value_name(e.text, sc, pos);
      case ExprKind::Events:
        require_alphabet(pos);
        return constant_node(s_.universe_, pos);
      case ExprKind::Apply: {
        static const std::map<std::string, std::pair<ValOp, std::size_t>, std::less<>> kFns = {
            {"union", {ValOp::Union, 2}},
            {"diff", {ValOp::Diff, 2}},
            {"inter", {ValOp::Inter, 2}},
            {"member", {ValOp::Member, 2}},
            {"card", {ValOp::Card, 1}}};
        auto fn = kFns.find(e.text);
        if (fn == kFns.end()) {
          if (definition(e.text)) fail(ErrorKind::TypeMismatch, "process '" + e.text + "' used as a value", pos);
          fail(ErrorKind::UnboundName, "unknown function '" + e.text + "'", pos);
        }
        if (e.args.size() != fn->second.second) {
          fail(ErrorKind::ArityMismatch,
               "'" + e.text + "' takes " + std::to_string(fn->second.second) + " argument(s)", pos);
        }
        ValNode* n = new_val(fn->second.first, pos);
        for (const auto& a : e.args) n->kids.push_back(compile_value(*a, sc));
        return finish(n);
      }
      case ExprKind::Dot: return binary(ValOp::Dot, e, sc);
      case ExprKind::Unary: {
        ValNode* n = new_val(e.text == "not" ? ValOp::Not : ValOp::Neg, pos);
        n->kids.push_back(compile_value(*e.args[0], sc));
        return finish(n);
      }
      case ExprKind::Binary: {
        static const std::map<std::string, ValOp, std::less<>> kOps = {
            {"+", ValOp::Add}, {"-", ValOp::Sub}, {"*", ValOp::Mul},  {"/", ValOp::Div},
            {"%", ValOp::Mod}, {"==", ValOp::Eq}, {"!=", ValOp::Ne},  {"<", ValOp::Lt},
            {"<=", ValOp::Le}, {">", ValOp::Gt},  {">=", ValOp::Ge},  {"and", ValOp::And},
            {"or", ValOp::Or}};
        return binary(kOps.at(e.text), e, sc);
      }
      case ExprKind::SetLit:
      case ExprKind::RangeSet:
      case ExprKind::ChanSet: {
        if (e.kind == ExprKind::ChanSet) require_alphabet(pos);
        ValOp op = e.kind == ExprKind::SetLit ? ValOp::SetLit
                   : e.kind == ExprKind::RangeSet ? ValOp::Range
                                                  : ValOp::ChanSet;
        ValNode* n = new_val(op, pos);
        for (const auto& a : e.args) n->kids.push_back(compile_value(*a, sc));
        return finish(n);
      }
      case ExprKind::If:
        fail(ErrorKind::TypeMismatch, "conditional values are not supported", pos);
      default:
        fail(ErrorKind::TypeMismatch, "expected a value, found a process", pos);
    }
  }

  const ValNode* binary(ValOp op, const Expr& e, Scope& sc) {
    ValNode* n = new_val(op, e.loc.pos);
    n->kids.push_back(compile_value(*e.args[0], sc));
    n->kids.push_back(compile_value(*e.args[1], sc));
    return finish(n);
  }

  void require_alphabet(SourcePos pos) const {
    if (!alphabet_ready_) fail(ErrorKind::TypeMismatch, "events used inside a channel type", pos);
  }

  const ValNode* value_name(const std::string& name, Scope& sc, SourcePos pos) {
    for (auto it = sc.vars.rbegin(); it != sc.vars.rend(); ++it) {
      if (it->first == name) {
        ValNode* n = new_val(ValOp::Var, pos);
        n->slot = it->second;
        n->closed = false;
        return n;
      }
    }
    if (name == "Bool") return constant_node(s_.types_.at("Bool").domain, pos);
    if (name == "Int") fail(ErrorKind::NonFiniteSet, "'Int' is not a finite set", pos);
    auto g = globals_.find(name);
    if (g == globals_.end()) fail(ErrorKind::UnboundName, "unbound name '" + name + "'", pos);
    switch (g->second.kind) {
      case NameKind::Ctor: return constant_node(Value::ctor(s_.ctor_index_.at(name)), pos);
      case NameKind::Datatype: return constant_node(s_.types_.at(name).domain, pos);
      case NameKind::Channel:
        require_alphabet(pos);
        return constant_node(ir::EventPrefix{s_.channel_index_.at(name), {}}, pos);
      case NameKind::Nametype: return constant_node(constant(name, pos), pos);
      case NameKind::Definition:
        if (is_process_def(name)) fail(ErrorKind::TypeMismatch, "process '" + name + "' used as a value", pos);
        return constant_node(constant(name, pos), pos);
    }
    fail(ErrorKind::UnboundName, "unbound name '" + name + "'", pos);
  }

  // -- pass 5: processes ----------------------------------------------------

  ProcNode* new_proc(ProcOp op, SourcePos pos) {
    s_.proc_nodes_.push_back(std::make_unique<ProcNode>());
    ProcNode* n = s_.proc_nodes_.back().get();
    n->op = op;
    n->pos = pos;
    n->id = static_cast<std::uint32_t>(s_.proc_nodes_.size() - 1);
    free_.emplace_back();
    return n;
  }

  // Records the free slots of a freshly built node.
  const ProcNode* seal(ProcNode* n) {
    std::set<std::uint32_t> fv;
    for (const auto* k : n->kids) fv.insert(free_[k->id].begin(), free_[k->id].end());
    for (const auto* v : n->vals) add_slots(v, fv);
    std::set<std::uint32_t> bound;
    for (const auto& f : n->fields) {
      add_slots(f.value, fv);
      add_slots(f.restriction, fv);
      if (f.input && f.slot != ir::kNoSlot) bound.insert(f.slot);
    }
    if (n->op == ProcOp::RepExtChoice) bound.insert(n->slot);
    // Restrictions and output values are evaluated before later binders are
    // bound, but slots are unique per binder so removing them is safe.
    for (auto b : bound) fv.erase(b);
    if (n->op == ProcOp::RepExtChoice) add_slots(n->vals[0], fv);
    free_[n->id].assign(fv.begin(), fv.end());
    if (n->op == ProcOp::Prefix) n->captured = free_[n->id];
    return n;
  }

  std::uint32_t bind(Scope& sc, const std::string& name) {
    std::uint32_t slot = sc.next_slot++;
    sc.vars.emplace_back(name, slot);
    return slot;
  }

  void check_event_set(const ValNode* v) {
    if (v->closed) with_origin(v->pos, [&] { return ir::to_event_set(s_, v->constant, v->pos); });
  }

  const ProcNode* call(const std::string& name, const std::vector<ExprRef>& args, Scope& sc,
                       SourcePos pos) {
    auto idx = s_.process_index_.find(name);
    if (idx == s_.process_index_.end()) {
      if (globals_.count(name)) fail(ErrorKind::TypeMismatch, "'" + name + "' is not a process", pos);
      fail(ErrorKind::UnboundName, "unbound process '" + name + "'", pos);
    }
    const ProcessDef& def = s_.processes_[idx->second];
    if (def.params.size() != args.size()) {
      fail(ErrorKind::ArityMismatch,
           "'" + name + "' expects " + std::to_string(def.params.size()) + " argument(s), got " +
               std::to_string(args.size()),
           pos);
    }
    ProcNode* n = new_proc(ProcOp::Call, pos);
    n->def = idx->second;
    for (std::size_t i = 0; i < args.size(); ++i) {
      const ValNode* v = compile_value(*args[i], sc);
      if (v->closed) {
        const auto* scalar = std::get_if<Value>(&v->constant);
        if (!scalar) fail(ErrorKind::TypeMismatch, "process arguments must be scalars", args[i]->loc.pos);
        const auto& type = def.params[i].type;
        if (type && !type->contains(*scalar)) {
          fail(ErrorKind::TypeMismatch,
               "argument " + s_.value_name(*scalar) + " is outside the type of parameter '" +
                   def.params[i].name + "' of '" + name + "'",
               args[i]->loc.pos);
        }
      }
      n->vals.push_back(v);
    }
    return seal(n);
  }

  const ProcNode* compile_proc(const Expr& e, Scope& sc) {
    SourcePos pos = e.loc.pos;
    switch (e.kind) {
      case ExprKind::Stop: return seal(new_proc(ProcOp::Stop, pos));
      case ExprKind::Skip: return seal(new_proc(ProcOp::Skip, pos));
      case ExprKind::Prefix: return prefix(e, sc);
      case ExprKind::ExtChoice: return kids(ProcOp::ExtChoice, e, sc);
      case ExprKind::IntChoice: return kids(ProcOp::IntChoice, e, sc);
      case ExprKind::Seq: return kids(ProcOp::Seq, e, sc);
      case ExprKind::Interleave: return kids(ProcOp::Interleave, e, sc);
      case ExprKind::RepExtChoice: {
        ProcNode* n = new_proc(ProcOp::RepExtChoice, pos);
        const ValNode* set = compile_value(*e.args[0], sc);
        if (set->closed && !std::holds_alternative<ValueSet>(set->constant)) {
          fail(ErrorKind::TypeMismatch, "replicated choice needs a set of values", e.args[0]->loc.pos);
        }
        n->vals.push_back(set);
        n->slot = bind(sc, e.text);
        n->kids.push_back(compile_proc(*e.args[1], sc));
        sc.vars.pop_back();
        return seal(n);
      }
      case ExprKind::GenPar: {
        ProcNode* n = new_proc(ProcOp::GenPar, pos);
        n->kids.push_back(compile_proc(*e.args[0], sc));
        n->vals.push_back(compile_value(*e.args[1], sc));
        n->kids.push_back(compile_proc(*e.args[2], sc));
        check_event_set(n->vals[0]);
        return seal(n);
      }
      case ExprKind::AlphaPar: {
        ProcNode* n = new_proc(ProcOp::AlphaPar, pos);
        n->kids.push_back(compile_proc(*e.args[0], sc));
        n->vals.push_back(compile_value(*e.args[1], sc));
        n->vals.push_back(compile_value(*e.args[2], sc));
        n->kids.push_back(compile_proc(*e.args[3], sc));
        check_event_set(n->vals[0]);
        check_event_set(n->vals[1]);
        return seal(n);
      }
      case ExprKind::Hide: {
        ProcNode* n = new_proc(ProcOp::Hide, pos);
        n->kids.push_back(compile_proc(*e.args[0], sc));
        n->vals.push_back(compile_value(*e.args[1], sc));
        check_event_set(n->vals[0]);
        return seal(n);
      }
      case ExprKind::If: {
        ProcNode* n = new_proc(ProcOp::If, pos);
        n->vals.push_back(compile_value(*e.args[0], sc));
        const ValNode* c = n->vals[0];
        if (c->closed) {
          const auto* b = std::get_if<Value>(&c->constant);
          if (!b || b->kind != ScalarKind::Bool) fail(ErrorKind::TypeMismatch, "condition must be boolean", c->pos);
        }
        n->kids.push_back(compile_proc(*e.args[1], sc));
        n->kids.push_back(compile_proc(*e.args[2], sc));
        return seal(n);
      }
      case ExprKind::Name:
        for (const auto& v : sc.vars) {
          if (v.first == e.text) fail(ErrorKind::TypeMismatch, "value '" + e.text + "' used as a process", pos);
        }
        return call(e.text, {}, sc, pos);
      case ExprKind::Apply: return call(e.text, e.args, sc, pos);
      default: fail(ErrorKind::TypeMismatch, "expected a process, found a value", pos);
    }
  }

  const ProcNode* kids(ProcOp op, const Expr& e, Scope& sc) {
    ProcNode* n = new_proc(op, e.loc.pos);
    n->kids.push_back(compile_proc(*e.args[0], sc));
    n->kids.push_back(compile_proc(*e.args[1], sc));
    return seal(n);
  }

  const ProcNode* prefix(const Expr& e, Scope& sc) {
    SourcePos pos = e.loc.pos;
    auto ci = s_.channel_index_.find(e.text);
    if (ci == s_.channel_index_.end()) {
      if (globals_.count(e.text)) fail(ErrorKind::TypeMismatch, "'" + e.text + "' is not a channel", pos);
      fail(ErrorKind::UnboundName, "unknown channel '" + e.text + "'", pos);
    }
    const Channel& ch = s_.channels_[ci->second];
    if (e.fields.size() != ch.payload.size()) {
      fail(ErrorKind::ArityMismatch,
           "channel '" + ch.name + "' carries " + std::to_string(ch.payload.size()) + " field(s), got " +
               std::to_string(e.fields.size()),
           pos);
    }
    ProcNode* n = new_proc(ProcOp::Prefix, pos);
    n->channel = ci->second;
    std::size_t bound = 0;
    for (std::size_t i = 0; i < e.fields.size(); ++i) {
      const EventField& f = e.fields[i];
      const ValueType& type = ch.payload[i];
      ir::PrefixField pf;
      if (f.kind == EventField::Kind::Input) {
        pf.input = true;
        if (f.restriction) {
          pf.restriction = compile_value(*f.restriction, sc);
          if (pf.restriction->closed) {
            const auto* set = std::get_if<ValueSet>(&pf.restriction->constant);
            if (!set) fail(ErrorKind::TypeMismatch, "input restriction must be a set of values", pf.restriction->pos);
            if (!set->subset_of(type.domain)) {
              fail(ErrorKind::TypeMismatch,
                   "input restriction is not a subset of the payload type of '" + ch.name + "'",
                   pf.restriction->pos);
            }
          }
        }
        if (f.binder != "_") {
          pf.slot = bind(sc, f.binder);
          ++bound;
        }
      } else {
        pf.value = compile_value(*f.value, sc);
        if (pf.value->closed) {
          const auto* v = std::get_if<Value>(&pf.value->constant);
          if (!v) fail(ErrorKind::TypeMismatch, "event field must be a scalar", pf.value->pos);
          if (!type.contains(*v)) {
            fail(ErrorKind::TypeMismatch,
                 "value " + s_.value_name(*v) + " is outside the payload type of '" + ch.name + "'",
                 pf.value->pos);
          }
        }
      }
      n->fields.push_back(pf);
    }
    n->kids.push_back(compile_proc(*e.args[0], sc));
    sc.vars.resize(sc.vars.size() - bound);
    return seal(n);
  }

  void compile_processes() {
    for (auto& pd : s_.processes_) {
      const Definition* def = definition(pd.name);
      const Global& g = globals_.at(pd.name);
      OriginGuard guard(*this, g.module->origin);
      for (std::size_t i = 0; i < def->params.size(); ++i) {
        if (def->params[i].type) pd.params[i].type = type_expr(*def->params[i].type);
      }
    }
    for (std::size_t i = 0; i < s_.processes_.size(); ++i) {
      const Definition* def = definition(s_.processes_[i].name);
      const Global& g = globals_.at(def->name);
      OriginGuard guard(*this, g.module->origin);
      Scope sc;
      for (const auto& p : def->params) bind(sc, p.name);
      compile_body(i, *def->body, sc);
    }
  }

  void compile_body(std::size_t index, const Expr& body, Scope& sc) {
    std::size_t first = s_.proc_nodes_.size();
    const ProcNode* root = compile_proc(body, sc);
    for (std::size_t k = first; k < s_.proc_nodes_.size(); ++k) s_.proc_nodes_[k]->frame_size = sc.next_slot;
    s_.processes_[index].body = root;
    s_.processes_[index].frame_size = sc.next_slot;
  }

  // -- pass 6: assertions ---------------------------------------------------

  std::uint32_t assertion_process(const Expr& e, std::size_t n) {
    if (e.kind == ExprKind::Name) {
      auto it = s_.process_index_.find(e.text);
      if (it != s_.process_index_.end() && s_.processes_[it->second].params.empty()) return it->second;
    }
    ProcessDef pd;
    pd.name = "assert#" + std::to_string(n) + ":" + print_expr(e);
    pd.anonymous = true;
    auto index = static_cast<std::uint32_t>(s_.processes_.size());
    s_.processes_.push_back(std::move(pd));
    Scope sc;
    compile_body(index, e, sc);
    return index;
  }

  void compile_assertions() {
    for (const auto& m : s_.modules_) {
      origin_ = m.origin;
      for (const auto& d : m.decls) {
        const auto* a = std::get_if<AssertDecl>(&d);
        if (!a) continue;
        std::size_t n = s_.assertions_.size();
        Assertion out;
        out.kind = a->kind;
        out.pos = a->loc.pos;
        out.text = print_declaration(d);
        out.process = assertion_process(*a->process, n);
        if (a->kind == AssertKind::TracesRefinement) out.impl = assertion_process(*a->impl, n);
        for (const auto& ev : a->trace) {
          Scope none;
          const ValNode* v = compile_value(*ev, none);
          out.trace.push_back(with_origin(ev->loc.pos, [&] {
            const auto* p = std::get_if<ir::EventPrefix>(&v->constant);
            if (!p || p->fields.size() != s_.channels_[p->channel].payload.size()) {
              throw Error(ErrorKind::BadPayload, "trace element is not a complete event", ev->loc.pos);
            }
            return s_.event_id(p->channel, p->fields);
          }));
        }
        s_.assertions_.push_back(std::move(out));
      }
    }
  }

  ResolvedSpec& s_;
  std::string origin_;
  std::map<std::string, Global> globals_;
  std::vector<const ChannelDecl*> channel_decls_;
  std::vector<const Module*> channel_modules_;
  std::map<std::string, int> process_class_;
  std::set<std::string> evaluating_;
  std::vector<std::vector<std::uint32_t>> free_;
  bool alphabet_ready_ = false;
};

// -- ResolvedSpec -------------------------------------------------------------

ResolvedSpec::ResolvedSpec() = default;
ResolvedSpec::~ResolvedSpec() = default;

std::optional<std::uint32_t> ResolvedSpec::find_channel(std::string_view name) const {
  auto it = channel_index_.find(name);
  if (it == channel_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> ResolvedSpec::find_process(std::string_view name) const {
  auto it = process_index_.find(name);
  if (it == process_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Value> ResolvedSpec::find_constructor(std::string_view name) const {
  auto it = ctor_index_.find(name);
  if (it == ctor_index_.end()) return std::nullopt;
  return Value::ctor(it->second);
}

std::optional<std::int64_t> ResolvedSpec::int_constant(std::string_view name) const {
  auto it = constants_.find(std::string(name));
  if (it == constants_.end()) return std::nullopt;
  const auto* v = std::get_if<Value>(&it->second);
  if (!v || v->kind != ScalarKind::Int) return std::nullopt;
  return v->v;
}

std::optional<ValueSet> ResolvedSpec::set_constant(std::string_view name) const {
  auto it = constants_.find(std::string(name));
  if (it == constants_.end()) return std::nullopt;
  const auto* v = std::get_if<ValueSet>(&it->second);
  if (!v) return std::nullopt;
  return *v;
}

EventId ResolvedSpec::event_id(std::uint32_t channel, std::span<const Value> fields) const {
  const Channel& ch = channels_.at(channel);
  if (fields.size() != ch.payload.size()) {
    throw Error(ErrorKind::BadPayload, "channel '" + ch.name + "' carries " +
                                           std::to_string(ch.payload.size()) + " field(s), got " +
                                           std::to_string(fields.size()));
  }
  std::size_t index = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    auto k = ch.payload[i].index_of(fields[i]);
    if (!k) {
      throw Error(ErrorKind::BadPayload,
                  "value " + value_name(fields[i]) + " is outside the payload type of '" + ch.name + "'");
    }
    index = index * ch.payload[i].cardinality() + *k;
  }
  return static_cast<EventId>(ch.first_event + index);
}

std::uint32_t ResolvedSpec::channel_of(EventId e) const {
  auto it = std::upper_bound(channels_.begin(), channels_.end(), e,
                             [](EventId x, const Channel& c) { return x < c.first_event; });
  return static_cast<std::uint32_t>(it - channels_.begin() - 1);
}

std::vector<Value> ResolvedSpec::fields_of(EventId e) const {
  const Channel& ch = channels_[channel_of(e)];
  std::size_t index = e - ch.first_event;
  std::vector<Value> out(ch.payload.size());
  for (std::size_t i = ch.payload.size(); i-- > 0;) {
    std::size_t card = ch.payload[i].cardinality();
    out[i] = ch.payload[i].at(index % card);
    index /= card;
  }
  return out;
}

std::string ResolvedSpec::value_name(Value v) const {
  switch (v.kind) {
    case ScalarKind::Int: return std::to_string(v.v);
    case ScalarKind::Bool: return v.v ? "True" : "False";
    case ScalarKind::Ctor:
      if (v.v >= 0 && static_cast<std::size_t>(v.v) < ctor_names_.size()) return ctor_names_[v.v];
      return "<ctor " + std::to_string(v.v) + ">";
  }
  return "?";
}

std::string ResolvedSpec::event_name(EventId e) const {
  std::uint32_t c = channel_of(e);
  std::string out = channels_[c].name;
  for (const auto& f : fields_of(e)) out += "." + value_name(f);
  return out;
}

EventId ResolvedSpec::ground_event(const Expr& e) const {
  std::vector<const Expr*> parts;
  const Expr* cur = &e;
  while (cur->kind == ExprKind::Dot) {
    parts.push_back(cur->args[1].get());
    cur = cur->args[0].get();
  }
  std::reverse(parts.begin(), parts.end());
  if (cur->kind != ExprKind::Name) throw Error(ErrorKind::Syntax, "expected an event name", cur->loc.pos);
  auto ch = find_channel(cur->text);
  if (!ch) throw Error(ErrorKind::UnknownChannel, "unknown channel '" + cur->text + "'", cur->loc.pos);
  std::vector<Value> fields;
  for (const Expr* p : parts) {
    switch (p->kind) {
      case ExprKind::IntLit: fields.push_back(Value::integer(p->number)); break;
      case ExprKind::BoolLit: fields.push_back(Value::boolean(p->number != 0)); break;
      case ExprKind::Name: {
        if (auto c = find_constructor(p->text)) {
          fields.push_back(*c);
          break;
        }
        auto k = constants_.find(p->text);
        if (k != constants_.end() && std::holds_alternative<Value>(k->second)) {
          fields.push_back(std::get<Value>(k->second));
          break;
        }
        throw Error(ErrorKind::BadPayload, "unknown value '" + p->text + "'", p->loc.pos);
      }
      default: throw Error(ErrorKind::Syntax, "expected a ground value", p->loc.pos);
    }
  }
  try {
    return event_id(*ch, fields);
  } catch (const Error& err) {
    throw Error(err.kind(), err.detail(), cur->loc.pos);
  }
}

EventId ResolvedSpec::parse_event(std::string_view text) const {
  auto e = parse_expression(text, "<event>");
  return ground_event(*e);
}

std::vector<EventId> ResolvedSpec::parse_trace_literal(std::string_view text) const {
  std::vector<EventId> out;
  for (const auto& e : parse_trace_expressions(text)) out.push_back(ground_event(*e));
  return out;
}

// -- entry points -------------------------------------------------------------

std::shared_ptr<ResolvedSpec> resolve(std::vector<Module> modules) {
  auto spec = std::make_shared<ResolvedSpec>();
  Resolver r(*spec);
  r.run(std::move(modules));
  return spec;
}

std::shared_ptr<ResolvedSpec> resolve(const Module& module) {
  return resolve(std::vector<Module>{module});
}

std::shared_ptr<ResolvedSpec> load_spec(const std::string& path,
                                        const std::vector<std::string>& extra_files) {
  std::vector<Module> modules = load_modules(path);
  std::set<std::string> seen;
  auto key = [](const std::string& p) { return std::filesystem::weakly_canonical(p).string(); };
  for (const auto& m : modules) seen.insert(key(m.origin));
  for (const auto& extra : extra_files) {
    for (auto& m : load_modules(extra)) {
      if (seen.insert(key(m.origin)).second) modules.push_back(std::move(m));
    }
  }
  return resolve(std::move(modules));
}

std::shared_ptr<ResolvedSpec> resolve_text(std::string_view text, const std::string& origin) {
  return resolve(parse_spec(SpecSource{std::string(text), origin}));
}

}  // namespace cspmon
