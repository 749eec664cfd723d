#include "cspmon/syntax/parser.hpp"

#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace cspmon::syntax {

ExprRef make_expr(ExprKind kind, std::vector<ExprRef> args, std::string text, std::int64_t number,
                  SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->args = std::move(args);
  e->text = std::move(text);
  e->number = number;
  e->loc.pos = pos;
  return ExprRef(std::move(e));
}

ExprRef make_int(std::int64_t v, SourcePos pos) { return make_expr(ExprKind::IntLit, {}, {}, v, pos); }
ExprRef make_bool(bool v, SourcePos pos) { return make_expr(ExprKind::BoolLit, {}, {}, v ? 1 : 0, pos); }
ExprRef make_name(std::string name, SourcePos pos) {
  return make_expr(ExprKind::Name, {}, std::move(name), 0, pos);
}

ExprRef make_prefix(std::string channel, std::vector<EventField> fields, ExprRef cont,
                    SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Prefix;
  e->text = std::move(channel);
  e->fields = std::move(fields);
  e->args.push_back(std::move(cont));
  e->loc.pos = pos;
  return ExprRef(std::move(e));
}

std::size_t Module::channel_count() const {
  std::size_t n = 0;
  for (const auto& d : decls) {
    if (const auto* c = std::get_if<ChannelDecl>(&d)) n += c->names.size();
  }
  return n;
}

std::size_t Module::definition_count() const {
  std::size_t n = 0;
  for (const auto& d : decls) n += std::holds_alternative<Definition>(d) ? 1 : 0;
  return n;
}

std::size_t Module::assertion_count() const {
  std::size_t n = 0;
  for (const auto& d : decls) n += std::holds_alternative<AssertDecl>(d) ? 1 : 0;
  return n;
}

namespace {

constexpr std::array<std::string_view, 16> kReserved = {
    "channel", "datatype", "nametype", "assert", "include", "if",  "then", "else", "STOP",
    "SKIP",    "True",     "False",    "Events", "and",     "or",  "not"};

constexpr std::array<std::string_view, 15> kLongSymbols = {
    "[T=", "|||", "|~|", "[|", "|]", "{|", "|}", "[]", "->", "..", "==", "!=", "<=", ">=", "||"};

constexpr std::string_view kShortSymbols = "()[]{},.!?:;=<>+-*/%\\@|";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

}  // namespace

bool is_reserved_word(std::string_view word) {
  for (auto r : kReserved) {
    if (r == word) return true;
  }
  return false;
}

std::vector<Token> tokenize(std::string_view text, const std::string& origin) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (text.substr(i, 2) == "--") {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (text.substr(i, 2) == "{-") {
      SourcePos start{line, col};
      int depth = 0;
      while (i < text.size()) {
        if (text.substr(i, 2) == "{-") {
          ++depth;
          advance(2);
        } else if (text.substr(i, 2) == "-}") {
          advance(2);
          if (--depth == 0) break;
        } else {
          advance(1);
        }
      }
      if (depth != 0) throw Error(ErrorKind::Syntax, "unterminated block comment", start, origin);
      continue;
    }
    Token tok;
    tok.pos = {line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      tok.kind = TokenKind::Ident;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      tok.kind = TokenKind::Int;
      tok.text = std::string(text.substr(i, j - i));
      try {
        tok.value = std::stoll(tok.text);
      } catch (const std::out_of_range&) {
        throw Error(ErrorKind::Syntax, "integer literal out of range", tok.pos, origin);
      }
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"' && text[j] != '\n') ++j;
      if (j >= text.size() || text[j] != '"') {
        throw Error(ErrorKind::Syntax, "unterminated string literal", tok.pos, origin);
      }
      tok.kind = TokenKind::String;
      tok.text = std::string(text.substr(i + 1, j - i - 1));
      advance(j - i + 1);
      out.push_back(std::move(tok));
      continue;
    }
    bool matched = false;
    for (auto sym : kLongSymbols) {
      if (text.substr(i, sym.size()) == sym) {
        tok.kind = TokenKind::Symbol;
        tok.text = std::string(sym);
        advance(sym.size());
        matched = true;
        break;
      }
    }
    if (!matched && kShortSymbols.find(c) != std::string_view::npos) {
      tok.kind = TokenKind::Symbol;
      tok.text = std::string(1, c);
      advance(1);
      matched = true;
    }
    if (!matched) {
      throw Error(ErrorKind::Syntax, std::string("unexpected character '") + c + "'", tok.pos,
                  origin);
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokenKind::End;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

namespace {

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string origin)
      : toks_(std::move(tokens)), origin_(std::move(origin)) {}

  Module parse_module() {
    Module m;
    m.origin = origin_;
    std::set<std::string> names;
    auto claim = [&](const std::string& name, SourcePos pos) {
      if (!names.insert(name).second) {
        throw Error(ErrorKind::DuplicateDefinition, "'" + name + "' is already defined", pos,
                    origin_);
      }
    };
    while (peek().kind != TokenKind::End) {
      SourcePos at = peek().pos;
      m.decls.push_back(parse_declaration());
      const auto& d = m.decls.back();
      if (const auto* c = std::get_if<ChannelDecl>(&d)) {
        for (const auto& n : c->names) claim(n, at);
      } else if (const auto* t = std::get_if<DatatypeDecl>(&d)) {
        claim(t->name, at);
        for (const auto& n : t->constructors) claim(n, at);
      } else if (const auto* n = std::get_if<NametypeDecl>(&d)) {
        claim(n->name, at);
      } else if (const auto* def = std::get_if<Definition>(&d)) {
        claim(def->name, at);
      }
    }
    return m;
  }

  ExprRef parse_standalone() {
    auto e = parse_expr();
    expect_end();
    return e;
  }

  std::vector<ExprRef> parse_standalone_trace() {
    auto t = parse_trace_literal();
    expect_end();
    return t;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool sym(std::string_view s, std::size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind == TokenKind::Symbol && t.text == s;
  }
  bool word(std::string_view w, std::size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind == TokenKind::Ident && t.text == w;
  }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::End: return "end of input";
      case TokenKind::String: return "string \"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw Error(ErrorKind::Syntax, "expected " + expected + ", found " + describe(peek()),
                peek().pos, origin_);
  }

  void expect_sym(std::string_view s) {
    if (!sym(s)) fail("'" + std::string(s) + "'");
    take();
  }
  void expect_word(std::string_view w) {
    if (!word(w)) fail("'" + std::string(w) + "'");
    take();
  }
  void expect_end() {
    if (peek().kind != TokenKind::End) fail("end of input");
  }

  std::string take_identifier(const char* what) {
    const auto& t = peek();
    if (t.kind != TokenKind::Ident || is_reserved_word(t.text)) fail(what);
    return take().text;
  }

  // ---- declarations ------------------------------------------------------

  Declaration parse_declaration() {
    SourcePos at = peek().pos;
    if (word("channel")) {
      take();
      ChannelDecl d;
      d.loc.pos = at;
      d.names.push_back(take_identifier("channel name"));
      while (sym(",")) {
        take();
        d.names.push_back(take_identifier("channel name"));
      }
      if (sym(":")) {
        take();
        d.payload.push_back(parse_additive());
        while (sym(".")) {
          take();
          d.payload.push_back(parse_additive());
        }
      }
      return d;
    }
    if (word("datatype")) {
      take();
      DatatypeDecl d;
      d.loc.pos = at;
      d.name = take_identifier("datatype name");
      expect_sym("=");
      d.constructors.push_back(take_identifier("constructor name"));
      while (sym("|")) {
        take();
        d.constructors.push_back(take_identifier("constructor name"));
      }
      return d;
    }
    if (word("nametype")) {
      take();
      NametypeDecl d;
      d.loc.pos = at;
      d.name = take_identifier("type name");
      expect_sym("=");
      d.value = parse_value();
      return d;
    }
    if (word("assert")) {
      take();
      return parse_assert(at);
    }
    if (word("include")) {
      take();
      if (peek().kind != TokenKind::String) fail("quoted file name");
      IncludeDecl d;
      d.loc.pos = at;
      d.path = take().text;
      return d;
    }
    if (peek().kind == TokenKind::Ident && !is_reserved_word(peek().text)) {
      Definition d;
      d.loc.pos = at;
      d.name = take().text;
      if (sym("(")) {
        take();
        d.has_params = true;
        if (!sym(")")) {
          d.params.push_back(parse_param());
          while (sym(",")) {
            take();
            d.params.push_back(parse_param());
          }
        }
        expect_sym(")");
      }
      expect_sym("=");
      d.body = parse_expr();
      return d;
    }
    fail("declaration");
  }

  Param parse_param() {
    Param p;
    p.name = take_identifier("parameter name");
    if (sym(":")) {
      take();
      p.type = parse_additive();
    }
    return p;
  }

  AssertDecl parse_assert(SourcePos at) {
    AssertDecl a;
    a.loc.pos = at;
    a.process = parse_expr();
    if (sym("[T=")) {
      take();
      a.kind = AssertKind::TracesRefinement;
      a.impl = parse_expr();
      return a;
    }
    expect_sym(":");
    expect_sym("[");
    if (word("deadlock")) {
      take();
      expect_word("free");
      a.kind = AssertKind::DeadlockFree;
    } else if (word("divergence")) {
      take();
      expect_word("free");
      a.kind = AssertKind::DivergenceFree;
    } else if (word("deterministic")) {
      take();
      a.kind = AssertKind::Deterministic;
    } else if (word("has")) {
      take();
      expect_word("trace");
      expect_sym("]");
      expect_sym(":");
      a.kind = AssertKind::HasTrace;
      a.trace = parse_trace_literal();
      return a;
    } else {
      fail("'deadlock free', 'divergence free', 'deterministic' or 'has trace'");
    }
    expect_sym("]");
    return a;
  }

  std::vector<ExprRef> parse_trace_literal() {
    expect_sym("<");
    std::vector<ExprRef> out;
    if (!sym(">")) {
      out.push_back(parse_dotted());
      while (sym(",")) {
        take();
        out.push_back(parse_dotted());
      }
    }
    expect_sym(">");
    return out;
  }

  // ---- process level -------------------------------------------------------

  ExprRef parse_expr() {
    SourcePos at = peek().pos;
    if (word("if")) {
      take();
      auto cond = parse_value();
      expect_word("then");
      auto then_branch = parse_expr();
      expect_word("else");
      auto else_branch = parse_expr();
      return make_expr(ExprKind::If, {cond, then_branch, else_branch}, {}, 0, at);
    }
    if (sym("[]")) {
      take();
      std::string binder = take_identifier("binder name");
      expect_sym(":");
      auto set = parse_value();
      expect_sym("@");
      auto body = parse_expr();
      return make_expr(ExprKind::RepExtChoice, {set, body}, binder, 0, at);
    }
    return parse_hide();
  }

  ExprRef parse_hide() {
    auto lhs = parse_par();
    while (sym("\\")) {
      SourcePos at = take().pos;
      auto set = parse_value();
      lhs = make_expr(ExprKind::Hide, {lhs, set}, {}, 0, at);
    }
    return lhs;
  }

  ExprRef parse_par() {
    auto lhs = parse_intc();
    while (true) {
      SourcePos at = peek().pos;
      if (sym("[|")) {
        take();
        auto sync = parse_value();
        expect_sym("|]");
        auto rhs = parse_intc();
        lhs = make_expr(ExprKind::GenPar, {lhs, sync, rhs}, {}, 0, at);
      } else if (sym("[")) {
        take();
        auto alpha_l = parse_value();
        expect_sym("||");
        auto alpha_r = parse_value();
        expect_sym("]");
        auto rhs = parse_intc();
        lhs = make_expr(ExprKind::AlphaPar, {lhs, alpha_l, alpha_r, rhs}, {}, 0, at);
      } else if (sym("|||")) {
        take();
        auto rhs = parse_intc();
        lhs = make_expr(ExprKind::Interleave, {lhs, rhs}, {}, 0, at);
      } else {
        return lhs;
      }
    }
  }

  ExprRef parse_intc() {
    auto lhs = parse_extc();
    while (sym("|~|")) {
      SourcePos at = take().pos;
      lhs = make_expr(ExprKind::IntChoice, {lhs, parse_extc()}, {}, 0, at);
    }
    return lhs;
  }

  ExprRef parse_extc() {
    auto lhs = parse_seq();
    while (sym("[]")) {
      SourcePos at = take().pos;
      lhs = make_expr(ExprKind::ExtChoice, {lhs, parse_seq()}, {}, 0, at);
    }
    return lhs;
  }

  ExprRef parse_seq() {
    auto lhs = parse_prefix();
    while (sym(";")) {
      SourcePos at = take().pos;
      lhs = make_expr(ExprKind::Seq, {lhs, parse_prefix()}, {}, 0, at);
    }
    return lhs;
  }

  ExprRef parse_prefix() {
    SourcePos at = peek().pos;
    auto head = parse_value();
    if (!(sym("!") || sym("?") || sym("->"))) return head;

    // The head is a dotted chain `c.e1.e2`; split it into channel + fields.
    std::vector<ExprRef> dots;
    const Expr* cur = head.get();
    ExprRef cur_ref = head;
    while (cur->kind == ExprKind::Dot) {
      dots.push_back(cur->args[1]);
      cur_ref = cur->args[0];
      cur = cur_ref.get();
    }
    if (cur->kind != ExprKind::Name) {
      throw Error(ErrorKind::Syntax, "event prefix must start with a channel name", at, origin_);
    }
    std::vector<EventField> fields;
    for (auto it = dots.rbegin(); it != dots.rend(); ++it) {
      fields.push_back(EventField{EventField::Kind::Dot, *it, {}, {}});
    }
    while (true) {
      if (sym("!")) {
        take();
        fields.push_back(EventField{EventField::Kind::Output, parse_additive(), {}, {}});
      } else if (sym("?")) {
        take();
        EventField f;
        f.kind = EventField::Kind::Input;
        f.binder = take_identifier("input binder");
        if (sym(":")) {
          take();
          f.restriction = parse_additive();
        }
        fields.push_back(std::move(f));
      } else if (sym(".")) {
        take();
        fields.push_back(EventField{EventField::Kind::Dot, parse_additive(), {}, {}});
      } else {
        break;
      }
    }
    expect_sym("->");
    ExprRef cont = (word("if") || sym("[]")) ? parse_expr() : parse_prefix();
    return make_prefix(cur->text, std::move(fields), cont, at);
  }

  // ---- value level ---------------------------------------------------------

  ExprRef parse_value() {
    auto lhs = parse_and();
    while (word("or")) {
      SourcePos at = take().pos;
      lhs = make_expr(ExprKind::Binary, {lhs, parse_and()}, "or", 0, at);
    }
    return lhs;
  }

  ExprRef parse_and() {
    auto lhs = parse_not();
    while (word("and")) {
      SourcePos at = take().pos;
      lhs = make_expr(ExprKind::Binary, {lhs, parse_not()}, "and", 0, at);
    }
    return lhs;
  }

  ExprRef parse_not() {
    if (word("not")) {
      SourcePos at = take().pos;
      return make_expr(ExprKind::Unary, {parse_not()}, "not", 0, at);
    }
    return parse_cmp();
  }

  ExprRef parse_cmp() {
    auto lhs = parse_dotted();
    for (std::string_view op : {"==", "!=", "<=", ">=", "<", ">"}) {
      if (sym(op)) {
        SourcePos at = take().pos;
        return make_expr(ExprKind::Binary, {lhs, parse_dotted()}, std::string(op), 0, at);
      }
    }
    return lhs;
  }

  ExprRef parse_dotted() {
    auto lhs = parse_additive();
    while (sym(".")) {
      SourcePos at = take().pos;
      lhs = make_expr(ExprKind::Dot, {lhs, parse_additive()}, {}, 0, at);
    }
    return lhs;
  }

  ExprRef parse_additive() {
    auto lhs = parse_mul();
    while (sym("+") || sym("-")) {
      Token op = take();
      lhs = make_expr(ExprKind::Binary, {lhs, parse_mul()}, op.text, 0, op.pos);
    }
    return lhs;
  }

  ExprRef parse_mul() {
    auto lhs = parse_unary();
    while (sym("*") || sym("/") || sym("%")) {
      Token op = take();
      lhs = make_expr(ExprKind::Binary, {lhs, parse_unary()}, op.text, 0, op.pos);
    }
    return lhs;
  }

  ExprRef parse_unary() {
    if (sym("-")) {
      SourcePos at = take().pos;
      if (peek().kind == TokenKind::Int) return make_int(-take().value, at);
      return make_expr(ExprKind::Unary, {parse_unary()}, "-", 0, at);
    }
    return parse_primary();
  }

  ExprRef parse_primary() {
    const Token& t = peek();
    SourcePos at = t.pos;
    if (t.kind == TokenKind::Int) return make_int(take().value, at);
    if (t.kind == TokenKind::Ident) {
      if (t.text == "True" || t.text == "False") return make_bool(take().text == "True", at);
      if (t.text == "STOP") {
        take();
        return make_expr(ExprKind::Stop, {}, {}, 0, at);
      }
      if (t.text == "SKIP") {
        take();
        return make_expr(ExprKind::Skip, {}, {}, 0, at);
      }
      if (t.text == "Events") {
        take();
        return make_expr(ExprKind::Events, {}, {}, 0, at);
      }
      if (!is_reserved_word(t.text)) {
        std::string name = take().text;
        if (!sym("(")) return make_name(std::move(name), at);
        take();
        std::vector<ExprRef> args;
        if (!sym(")")) {
          args.push_back(parse_expr());
          while (sym(",")) {
            take();
            args.push_back(parse_expr());
          }
        }
        expect_sym(")");
        return make_expr(ExprKind::Apply, std::move(args), std::move(name), 0, at);
      }
    }
    if (sym("(")) {
      take();
      auto e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (sym("{|")) {
      take();
      std::vector<ExprRef> items;
      items.push_back(parse_value());
      while (sym(",")) {
        take();
        items.push_back(parse_value());
      }
      expect_sym("|}");
      return make_expr(ExprKind::ChanSet, std::move(items), {}, 0, at);
    }
    if (sym("{")) {
      take();
      if (sym("}")) {
        take();
        return make_expr(ExprKind::SetLit, {}, {}, 0, at);
      }
      auto first = parse_value();
      if (sym("..")) {
        take();
        auto hi = parse_value();
        expect_sym("}");
        return make_expr(ExprKind::RangeSet, {first, hi}, {}, 0, at);
      }
      std::vector<ExprRef> items{first};
      while (sym(",")) {
        take();
        items.push_back(parse_value());
      }
      expect_sym("}");
      return make_expr(ExprKind::SetLit, std::move(items), {}, 0, at);
    }
    fail("expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string origin_;
};

}  // namespace

Module parse_spec(const SpecSource& source) {
  Parser p(tokenize(source.text, source.origin), source.origin);
  return p.parse_module();
}

ExprRef parse_expression(std::string_view text, const std::string& origin) {
  Parser p(tokenize(text, origin), origin);
  return p.parse_standalone();
}

std::vector<ExprRef> parse_trace_expressions(std::string_view text, const std::string& origin) {
  Parser p(tokenize(text, origin), origin);
  return p.parse_standalone_trace();
}

SpecSource read_source(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return SpecSource{ss.str(), path};
}

namespace {

void load_into(const std::filesystem::path& path, std::vector<Module>& out,
               std::vector<std::filesystem::path>& active, std::vector<std::string>& seen) {
  auto canonical = std::filesystem::weakly_canonical(path);
  for (const auto& a : active) {
    if (a == canonical) throw Error(ErrorKind::Syntax, "include cycle through '" + path.string() + "'");
  }
  for (const auto& s : seen) {
    if (s == canonical.string()) return;
  }
  seen.push_back(canonical.string());
  active.push_back(canonical);
  Module m = parse_spec(read_source(path.string()));
  for (const auto& d : m.decls) {
    if (const auto* inc = std::get_if<IncludeDecl>(&d)) {
      load_into(path.parent_path() / inc->path, out, active, seen);
    }
  }
  active.pop_back();
  out.push_back(std::move(m));
}

}  // namespace

std::vector<Module> load_modules(const std::string& path) {
  std::vector<Module> out;
  std::vector<std::filesystem::path> active;
  std::vector<std::string> seen;
  load_into(path, out, active, seen);
  return out;
}

}  // namespace cspmon::syntax
