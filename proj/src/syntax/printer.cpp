#include "cspmon/syntax/printer.hpp"

#include <sstream>

namespace cspmon::syntax {

namespace {

// Binding strength, loosest first. Mirrors the parser's descent order.
enum Level : int {
  kLowest = 0,  // if-then-else, replicated choice
  kHide = 1,
  kPar = 2,
  kIntChoice = 3,
  kExtChoice = 4,
  kSeq = 5,
  kPrefix = 6,
  kOr = 7,
  kAnd = 8,
  kNot = 9,
  kCmp = 10,
  kDot = 11,
  kAdd = 12,
  kMul = 13,
  kUnary = 14,
  kPrimary = 15,
};

int binary_level(const std::string& op) {
  if (op == "or") return kOr;
  if (op == "and") return kAnd;
  if (op == "+" || op == "-") return kAdd;
  if (op == "*" || op == "/" || op == "%") return kMul;
  return kCmp;
}

int level_of(const Expr& e) {
  switch (e.kind) {
    case ExprKind::If:
    case ExprKind::RepExtChoice: return kLowest;
    case ExprKind::Hide: return kHide;
    case ExprKind::GenPar:
    case ExprKind::AlphaPar:
    case ExprKind::Interleave: return kPar;
    case ExprKind::IntChoice: return kIntChoice;
    case ExprKind::ExtChoice: return kExtChoice;
    case ExprKind::Seq: return kSeq;
    case ExprKind::Prefix: return kPrefix;
    case ExprKind::Binary: return binary_level(e.text);
    case ExprKind::Unary: return e.text == "not" ? kNot : kUnary;
    case ExprKind::Dot: return kDot;
    default: return kPrimary;
  }
}

class Printer {
 public:
  std::string str() const { return out_.str(); }

  // `open` marks a position whose right end is delimited, where the parser
  // accepts an unparenthesized if-then-else or replicated choice after `->`.
  void expr(const Expr& e, int min_level, bool open) {
    bool lowest = e.kind == ExprKind::If || e.kind == ExprKind::RepExtChoice;
    bool wrap = lowest ? min_level != kLowest : level_of(e) < min_level;
    if (wrap) {
      out_ << '(';
      bare(e, true);
      out_ << ')';
    } else {
      bare(e, open || min_level == kLowest);
    }
  }

 private:
  void continuation(const Expr& e, bool open) {
    bool lowest = e.kind == ExprKind::If || e.kind == ExprKind::RepExtChoice;
    if (lowest && open) {
      bare(e, true);
    } else {
      expr(e, kPrefix, open);
    }
  }

  void binary(const Expr& e, const char* op, int level, bool open) {
    expr(*e.args[0], level, false);
    out_ << ' ' << op << ' ';
    expr(*e.args[1], level + 1, open);
  }

  void list(const std::vector<ExprRef>& items, int level) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out_ << ", ";
      expr(*items[i], level, true);
    }
  }

  void bare(const Expr& e, bool open) {
    switch (e.kind) {
      case ExprKind::IntLit: out_ << e.number; break;
      case ExprKind::BoolLit: out_ << (e.number ? "True" : "False"); break;
      case ExprKind::Name: out_ << e.text; break;
      case ExprKind::Events: out_ << "Events"; break;
      case ExprKind::Stop: out_ << "STOP"; break;
      case ExprKind::Skip: out_ << "SKIP"; break;
      case ExprKind::Apply:
        out_ << e.text << '(';
        list(e.args, kLowest);
        out_ << ')';
        break;
      case ExprKind::Dot:
        expr(*e.args[0], kDot, false);
        out_ << '.';
        expr(*e.args[1], kAdd, false);
        break;
      case ExprKind::Unary:
        if (e.text == "not") {
          out_ << "not ";
          expr(*e.args[0], kNot, open);
        } else {
          const Expr& x = *e.args[0];
          bool plain = x.kind == ExprKind::Name || x.kind == ExprKind::Apply;
          out_ << '-';
          if (plain) {
            bare(x, false);
          } else {
            out_ << '(';
            bare(x, true);
            out_ << ')';
          }
        }
        break;
      case ExprKind::Binary: {
        int level = binary_level(e.text);
        if (level == kCmp) {
          expr(*e.args[0], kDot, false);
          out_ << ' ' << e.text << ' ';
          expr(*e.args[1], kDot, false);
        } else {
          binary(e, e.text.c_str(), level, open);
        }
        break;
      }
      case ExprKind::SetLit:
      case ExprKind::RangeSet: {
        Printer inner;
        if (e.kind == ExprKind::SetLit) {
          inner.list(e.args, kOr);
        } else {
          inner.expr(*e.args[0], kOr, false);
          inner.out_ << "..";
          inner.expr(*e.args[1], kOr, false);
        }
        std::string body = inner.str();
        // "{-" would open a block comment.
        out_ << (body.starts_with('-') ? "{ " : "{") << body << '}';
        break;
      }
      case ExprKind::ChanSet:
        out_ << "{| ";
        list(e.args, kOr);
        out_ << " |}";
        break;
      case ExprKind::Prefix:
        out_ << e.text;
        for (const auto& f : e.fields) {
          switch (f.kind) {
            case EventField::Kind::Dot:
              out_ << '.';
              expr(*f.value, kAdd, false);
              break;
            case EventField::Kind::Output:
              out_ << '!';
              expr(*f.value, kAdd, false);
              break;
            case EventField::Kind::Input:
              out_ << '?' << f.binder;
              if (f.restriction) {
                out_ << ':';
                expr(*f.restriction, kAdd, false);
              }
              break;
          }
        }
        out_ << " -> ";
        continuation(*e.args[0], open);
        break;
      case ExprKind::ExtChoice: binary(e, "[]", kExtChoice, open); break;
      case ExprKind::IntChoice: binary(e, "|~|", kIntChoice, open); break;
      case ExprKind::Seq: binary(e, ";", kSeq, open); break;
      case ExprKind::Interleave: binary(e, "|||", kPar, open); break;
      case ExprKind::GenPar:
        expr(*e.args[0], kPar, false);
        out_ << " [| ";
        expr(*e.args[1], kOr, false);
        out_ << " |] ";
        expr(*e.args[2], kPar + 1, open);
        break;
      case ExprKind::AlphaPar:
        expr(*e.args[0], kPar, false);
        out_ << " [ ";
        expr(*e.args[1], kOr, false);
        out_ << " || ";
        expr(*e.args[2], kOr, false);
        out_ << " ] ";
        expr(*e.args[3], kPar + 1, open);
        break;
      case ExprKind::Hide:
        expr(*e.args[0], kHide, false);
        out_ << " \\ ";
        expr(*e.args[1], kOr, false);
        break;
      case ExprKind::RepExtChoice:
        out_ << "[] " << e.text << " : ";
        expr(*e.args[0], kOr, false);
        out_ << " @ ";
        expr(*e.args[1], kLowest, true);
        break;
      case ExprKind::If:
        out_ << "if ";
        expr(*e.args[0], kOr, false);
        out_ << " then ";
        expr(*e.args[1], kLowest, true);
        out_ << " else ";
        expr(*e.args[2], kLowest, true);
        break;
    }
  }

  std::ostringstream out_;
};

}  // namespace

std::string print_expr(const Expr& e) {
  Printer p;
  p.expr(e, kLowest, true);
  return p.str();
}

namespace {

std::string print_type(const Expr& e) {
  Printer p;
  p.expr(e, kAdd, false);
  return p.str();
}

}  // namespace

std::string print_declaration(const Declaration& d) {
  std::ostringstream out;
  if (const auto* c = std::get_if<ChannelDecl>(&d)) {
    out << "channel ";
    for (std::size_t i = 0; i < c->names.size(); ++i) out << (i ? ", " : "") << c->names[i];
    for (std::size_t i = 0; i < c->payload.size(); ++i) {
      out << (i ? "." : " : ") << print_type(*c->payload[i]);
    }
  } else if (const auto* t = std::get_if<DatatypeDecl>(&d)) {
    out << "datatype " << t->name << " = ";
    for (std::size_t i = 0; i < t->constructors.size(); ++i) {
      out << (i ? " | " : "") << t->constructors[i];
    }
  } else if (const auto* n = std::get_if<NametypeDecl>(&d)) {
    Printer p;
    p.expr(*n->value, kOr, false);
    out << "nametype " << n->name << " = " << p.str();
  } else if (const auto* def = std::get_if<Definition>(&d)) {
    out << def->name;
    if (def->has_params) {
      out << '(';
      for (std::size_t i = 0; i < def->params.size(); ++i) {
        if (i) out << ", ";
        out << def->params[i].name;
        if (def->params[i].type) out << " : " << print_type(*def->params[i].type);
      }
      out << ')';
    }
    out << " = " << print_expr(*def->body);
  } else if (const auto* a = std::get_if<AssertDecl>(&d)) {
    out << "assert " << print_expr(*a->process);
    switch (a->kind) {
      case AssertKind::TracesRefinement: out << " [T= " << print_expr(*a->impl); break;
      case AssertKind::DeadlockFree: out << " :[deadlock free]"; break;
      case AssertKind::DivergenceFree: out << " :[divergence free]"; break;
      case AssertKind::Deterministic: out << " :[deterministic]"; break;
      case AssertKind::HasTrace: {
        out << " :[has trace]: <";
        for (std::size_t i = 0; i < a->trace.size(); ++i) {
          Printer p;
          p.expr(*a->trace[i], kDot, false);
          out << (i ? ", " : "") << p.str();
        }
        out << '>';
        break;
      }
    }
  } else if (const auto* inc = std::get_if<IncludeDecl>(&d)) {
    out << "include \"" << inc->path << '"';
  }
  return out.str();
}

std::string print_module(const Module& m) {
  std::string out;
  for (const auto& d : m.decls) {
    out += print_declaration(d);
    out += '\n';
  }
  return out;
}

}  // namespace cspmon::syntax
