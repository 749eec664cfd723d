#include "cspmon/gateway/mapping.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cspmon/error.hpp"

namespace cspmon::gateway {

using nlohmann::json;

RawEvent raw_event_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Format, "raw event is not a JSON object");
  auto name = j.find("name");
  if (name == j.end() || !name->is_string() || name->get<std::string>().empty()) {
    throw Error(ErrorKind::Format, "raw event needs a non-empty string \"name\"");
  }
  RawEvent r;
  r.name = name->get<std::string>();
  if (auto ts = j.find("ts"); ts != j.end() && !ts->is_null()) {
    if (!ts->is_number()) throw Error(ErrorKind::Format, "\"ts\" must be a number");
    r.ts = ts->get<double>();
  }
  if (auto f = j.find("fields"); f != j.end()) {
    if (!f->is_object()) throw Error(ErrorKind::Format, "\"fields\" must be an object");
    r.fields = *f;
  } else {
    for (const auto& [k, v] : j.items()) {
      if (k != "name" && k != "ts") r.fields[k] = v;
    }
  }
  for (const auto& [k, v] : r.fields.items()) {
    if (!v.is_primitive() || v.is_null()) {
      throw Error(ErrorKind::Format, "field '" + k + "' is not a scalar");
    }
  }
  return r;
}

namespace {

/// Tokens of one mapping line: words, numbers, quoted strings, punctuation.
struct Tok {
  enum class Kind { Word, Number, String, Punct, End } kind = Kind::End;
  std::string text;
  double number = 0;
};

class LineParser {
 public:
  LineParser(std::string_view line, int lineno, const std::string& origin)
      : s_(line), line_(lineno), origin_(origin) {
    advance();
  }

  [[noreturn]] void fail(const std::string& msg, ErrorKind kind = ErrorKind::Syntax) const {
    throw Error(kind, msg, SourcePos{line_, static_cast<int>(tok_start_) + 1}, origin_);
  }

  const Tok& peek() const { return tok_; }
  bool at_end() const { return tok_.kind == Tok::Kind::End; }

  Tok next() {
    Tok t = tok_;
    advance();
    return t;
  }

  bool accept(std::string_view text) {
    if (tok_.kind != Tok::Kind::String && tok_.text == text) {
      advance();
      return true;
    }
    return false;
  }

  void expect(std::string_view text) {
    if (!accept(text)) fail("expected '" + std::string(text) + "'");
  }

  std::string word() {
    if (tok_.kind != Tok::Kind::Word) fail("expected a name");
    return next().text;
  }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    tok_start_ = pos_;
    tok_ = Tok{};
    if (pos_ >= s_.size()) return;
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t b = pos_++;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      tok_ = {Tok::Kind::Word, std::string(s_.substr(b, pos_ - b))};
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      std::size_t b = pos_++;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                  s_[pos_] == 'e' || s_[pos_] == 'E')) {
        ++pos_;
      }
      std::string text(s_.substr(b, pos_ - b));
      // A trailing '.' belongs to the next payload field, not the number.
      while (text.size() > 1 && text.back() == '.') {
        text.pop_back();
        --pos_;
      }
      try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        tok_ = {Tok::Kind::Number, text, v};
      } catch (const std::exception&) {
        fail("bad number '" + text + "'");
      }
    } else if (c == '"') {
      std::size_t b = ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') ++pos_;
      if (pos_ >= s_.size()) fail("unterminated string");
      tok_ = {Tok::Kind::String, std::string(s_.substr(b, pos_ - b))};
      ++pos_;
    } else {
      static const char* kTwo[] = {"==", "!=", "<=", ">="};
      for (const char* op : kTwo) {
        if (s_.substr(pos_, 2) == op) {
          tok_ = {Tok::Kind::Punct, op};
          pos_ += 2;
          return;
        }
      }
      tok_ = {Tok::Kind::Punct, std::string(1, c)};
      ++pos_;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t tok_start_ = 0;
  int line_;
  const std::string& origin_;
  Tok tok_;
};

json literal(LineParser& p) {
  Tok t = p.next();
  switch (t.kind) {
    case Tok::Kind::Number:
      if (t.text.find_first_of(".eE") == std::string::npos) return json(static_cast<std::int64_t>(t.number));
      return json(t.number);
    case Tok::Kind::String: return json(t.text);
    case Tok::Kind::Word:
      if (t.text == "true") return json(true);
      if (t.text == "false") return json(false);
      if (t.text[0] == '$') p.fail("a condition compares against a literal");
      return json(t.text);
    default: p.fail("expected a literal");
  }
}

CompareOp compare_op(LineParser& p) {
  static const std::pair<const char*, CompareOp> kOps[] = {{"==", CompareOp::Eq}, {"!=", CompareOp::Ne},
                                                           {"<=", CompareOp::Le}, {">=", CompareOp::Ge},
                                                           {"<", CompareOp::Lt},  {">", CompareOp::Gt}};
  for (auto [text, op] : kOps) {
    if (p.accept(text)) return op;
  }
  p.fail("expected a comparison operator");
}

Value constant_payload(const Tok& t, const ResolvedSpec& spec, LineParser& p) {
  if (t.kind == Tok::Kind::Number) {
    if (t.text.find_first_of(".eE") != std::string::npos) p.fail("payload literals are integers");
    return Value::integer(static_cast<std::int64_t>(t.number));
  }
  if (t.text == "True") return Value::boolean(true);
  if (t.text == "False") return Value::boolean(false);
  if (auto c = spec.find_constructor(t.text)) return *c;
  p.fail("unknown payload value '" + t.text + "'", ErrorKind::BadPayload);
}

PayloadExpr payload(LineParser& p, const ResolvedSpec& spec) {
  PayloadExpr e;
  if (p.peek().kind == Tok::Kind::Word && p.peek().text == "bin") {
    p.next();
    p.expect("(");
    std::string f = p.word();
    if (f.size() < 2 || f[0] != '$') p.fail("bin() takes a $field");
    p.expect(",");
    Tok s = p.next();
    if (s.kind != Tok::Kind::Number || !(s.number > 0)) p.fail("bin() scale must be a positive number");
    p.expect(")");
    e.kind = PayloadExpr::Kind::Bin;
    e.field = f.substr(1);
    e.scale = s.number;
    return e;
  }
  Tok t = p.next();
  if (t.kind == Tok::Kind::Word && t.text[0] == '$') {
    if (t.text.size() < 2) p.fail("empty field reference");
    e.kind = PayloadExpr::Kind::Field;
    e.field = t.text.substr(1);
    return e;
  }
  if (t.kind != Tok::Kind::Word && t.kind != Tok::Kind::Number) p.fail("expected a payload");
  e.constant = constant_payload(t, spec, p);
  return e;
}

MappingRule rule(LineParser& p, const ResolvedSpec& spec, int lineno) {
  MappingRule r;
  r.line = lineno;
  Tok prio = p.next();
  if (prio.kind != Tok::Kind::Number || prio.text.find('.') != std::string::npos) p.fail("expected an integer priority");
  r.priority = static_cast<int>(prio.number);
  Tok name = p.next();
  if (name.kind != Tok::Kind::Word && name.kind != Tok::Kind::String) p.fail("expected a raw event name");
  r.raw_name = name.text;
  if (p.accept("when")) {
    do {
      Condition c;
      c.field = p.word();
      c.op = compare_op(p);
      c.value = literal(p);
      r.conditions.push_back(std::move(c));
    } while (p.accept("and"));
  }
  p.expect("emit");
  std::string chan = p.word();
  auto ci = spec.find_channel(chan);
  if (!ci) p.fail("unknown channel '" + chan + "'", ErrorKind::UnknownChannel);
  r.channel = *ci;
  while (p.accept(".")) r.payload.push_back(payload(p, spec));
  if (!p.at_end()) p.fail("unexpected '" + p.peek().text + "'");
  const Channel& ch = spec.channels()[r.channel];
  if (r.payload.size() != ch.payload.size()) {
    p.fail("channel '" + chan + "' takes " + std::to_string(ch.payload.size()) + " field(s), rule gives " +
               std::to_string(r.payload.size()),
           ErrorKind::ArityMismatch);
  }
  for (std::size_t i = 0; i < r.payload.size(); ++i) {
    const auto& pe = r.payload[i];
    if (pe.kind == PayloadExpr::Kind::Constant && !ch.payload[i].contains(pe.constant)) {
      p.fail(spec.value_name(pe.constant) + " is outside field " + std::to_string(i + 1) + " of '" + chan + "'",
             ErrorKind::BadPayload);
    }
  }
  return r;
}

bool compare(const json& actual, CompareOp op, const json& want) {
  if (actual.is_number() && want.is_number()) {
    double a = actual.get<double>();
    double b = want.get<double>();
    switch (op) {
      case CompareOp::Eq: return a == b;
      case CompareOp::Ne: return a != b;
      case CompareOp::Lt: return a < b;
      case CompareOp::Le: return a <= b;
      case CompareOp::Gt: return a > b;
      case CompareOp::Ge: return a >= b;
    }
  }
  bool same = actual == want;
  if (op == CompareOp::Eq) return same;
  if (op == CompareOp::Ne) return !same;
  return false;  // ordering only applies to numbers
}

bool matches(const MappingRule& r, const RawEvent& raw) {
  if (r.raw_name != raw.name) return false;
  for (const auto& c : r.conditions) {
    auto it = raw.fields.find(c.field);
    if (it == raw.fields.end() || !compare(*it, c.op, c.value)) return false;
  }
  return true;
}

[[noreturn]] void out_of_range(const RawEvent& raw, const std::string& what) {
  throw Error(ErrorKind::PayloadOutOfRange, "raw event '" + raw.name + "': " + what);
}

Value field_value(const RawEvent& raw, const PayloadExpr& pe, const ResolvedSpec& spec) {
  auto it = raw.fields.find(pe.field);
  if (it == raw.fields.end()) out_of_range(raw, "missing field '" + pe.field + "'");
  const json& v = *it;
  if (pe.kind == PayloadExpr::Kind::Bin) {
    if (!v.is_number()) out_of_range(raw, "field '" + pe.field + "' is not a number");
    double scaled = std::floor(v.get<double>() * pe.scale);
    if (!std::isfinite(scaled) || std::fabs(scaled) > 1e15) out_of_range(raw, "field '" + pe.field + "' overflows");
    return Value::integer(static_cast<std::int64_t>(scaled));
  }
  if (v.is_boolean()) return Value::boolean(v.get<bool>());
  if (v.is_number_integer()) return Value::integer(v.get<std::int64_t>());
  if (v.is_number()) {
    double d = v.get<double>();
    if (d != std::floor(d)) out_of_range(raw, "field '" + pe.field + "' is not an integer");
    return Value::integer(static_cast<std::int64_t>(d));
  }
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "True") return Value::boolean(true);
    if (s == "False") return Value::boolean(false);
    if (auto c = spec.find_constructor(s)) return *c;
    out_of_range(raw, "field '" + pe.field + "' names no value: '" + s + "'");
  }
  out_of_range(raw, "field '" + pe.field + "' has no payload value");
}

}  // namespace

MappingTable parse_mapping(std::string_view text, const ResolvedSpec& spec, const std::string& origin) {
  MappingTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::size_t order = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    LineParser p(line, lineno, origin);
    if (p.at_end()) continue;
    std::string head = p.word();
    if (head == "rule") {
      MappingRule r = rule(p, spec, lineno);
      r.order = order++;
      table.rules.push_back(std::move(r));
    } else if (head == "unmatched") {
      p.expect("=");
      std::string v = p.word();
      if (v == "drop") {
        table.unmatched = UnmatchedPolicy::Drop;
      } else if (v == "error") {
        table.unmatched = UnmatchedPolicy::Error;
      } else {
        p.fail("unmatched must be 'drop' or 'error'");
      }
      if (!p.at_end()) p.fail("unexpected '" + p.peek().text + "'");
    } else if (head == "prelude") {
      p.expect("=");
      std::size_t eq = line.find('=');
      std::string rest = line.substr(eq + 1);
      table.prelude.clear();
      std::istringstream items(rest);
      std::string item;
      while (std::getline(items, item, ',')) {
        auto b = item.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = item.find_last_not_of(" \t\r");
        try {
          table.prelude.push_back(spec.parse_event(item.substr(b, e - b + 1)));
        } catch (const Error& err) {
          throw Error(err.kind(), err.detail(), SourcePos{lineno, static_cast<int>(eq + 2 + b)}, origin);
        }
      }
    } else {
      p.fail("expected 'rule', 'unmatched' or 'prelude'");
    }
  }
  std::stable_sort(table.rules.begin(), table.rules.end(),
                   [](const MappingRule& a, const MappingRule& b) { return a.priority > b.priority; });
  return table;
}

MappingTable load_mapping(const std::string& path, const ResolvedSpec& spec) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open mapping file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mapping(buf.str(), spec, path);
}

MapResult map_event(const RawEvent& raw, const MappingTable& table, const ResolvedSpec& spec) {
  for (const auto& r : table.rules) {
    if (!matches(r, raw)) continue;
    std::vector<Value> fields;
    fields.reserve(r.payload.size());
    for (const auto& pe : r.payload) {
      fields.push_back(pe.kind == PayloadExpr::Kind::Constant ? pe.constant : field_value(raw, pe, spec));
    }
    const Channel& ch = spec.channels()[r.channel];
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!ch.payload[i].contains(fields[i])) {
        out_of_range(raw, spec.value_name(fields[i]) + " is outside field " + std::to_string(i + 1) + " of '" +
                              ch.name + "' (rule on line " + std::to_string(r.line) + ")");
      }
    }
    return spec.event_id(r.channel, fields);
  }
  if (table.unmatched == UnmatchedPolicy::Drop) return Dropped{};
  throw Error(ErrorKind::UnmatchedEvent, "no mapping rule matches raw event '" + raw.name + "'");
}

}  // namespace cspmon::gateway
