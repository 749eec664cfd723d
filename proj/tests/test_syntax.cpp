#include "doctest.h"

#include "cspmon/syntax/parser.hpp"
#include "cspmon/syntax/printer.hpp"
#include "cspmon/syntax/spec.hpp"

using namespace cspmon;
using namespace cspmon::syntax;

namespace {

Module parse(const std::string& text) { return parse_spec({text, "<test>"}); }

ErrorKind error_kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("parse minimal spec") {
  auto m = parse("channel a\nP = a -> STOP");
  CHECK(m.channel_count() == 1);
  CHECK(m.definition_count() == 1);
}

TEST_CASE("truncated input is a syntax error at end of input") {
  try {
    parse("P = a -> ");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Syntax);
    CHECK(std::string(e.what()).find("end of input") != std::string::npos);
    CHECK(e.pos().line == 1);
  }
}

TEST_CASE("duplicate definitions are rejected") {
  CHECK(error_kind_of([] { parse("channel a\nchannel a"); }) == ErrorKind::DuplicateDefinition);
  CHECK(error_kind_of([] { parse("P = STOP\nP = SKIP"); }) == ErrorKind::DuplicateDefinition);
  CHECK(error_kind_of([] {
          resolve({parse("channel a"), parse("datatype T = a | b")});
        }) == ErrorKind::DuplicateDefinition);
}

TEST_CASE("comments are skipped") {
  auto m = parse("-- line\n{- block\n -} channel a {- x -}\nP = a -> STOP -- tail");
  CHECK(m.channel_count() == 1);
}

TEST_CASE("resolve reports payload range violations") {
  CHECK(error_kind_of([] { resolve_text("channel c : {0..2}\nP = c!5 -> STOP"); }) ==
        ErrorKind::TypeMismatch);
  CHECK(error_kind_of([] { resolve_text("P = Q"); }) == ErrorKind::UnboundName);
  CHECK(error_kind_of([] { resolve_text("channel c : Int"); }) == ErrorKind::NonFiniteSet);
  CHECK(error_kind_of([] { resolve_text("channel c : {0..2}\nP = c -> STOP"); }) ==
        ErrorKind::ArityMismatch);
  CHECK(error_kind_of([] { resolve_text("P(x) = STOP\nQ = P"); }) == ErrorKind::ArityMismatch);
  CHECK(error_kind_of([] {
          resolve_text("channel c : {0..2}\nP = c?x:{1..4} -> STOP");
        }) == ErrorKind::TypeMismatch);
}

TEST_CASE("alphabet size is the sum of payload products") {
  auto s = resolve_text(
      "datatype Mode = AM | HM\n"
      "N = 3\n"
      "channel a, b\n"
      "channel c : {0..N}\n"
      "channel d : Mode.Bool\n"
      "P = a -> STOP");
  CHECK(s->alphabet_size() == 2 + 4 + 4);
  CHECK(s->channels().size() == 4);
  CHECK(s->event_name(s->parse_event("d.HM.True")) == "d.HM.True");
  CHECK(s->event_name(s->parse_event("c.3")) == "c.3");
  CHECK(s->parse_event("c.0") == s->channels()[2].first_event);
  for (EventId e = 0; e < s->alphabet_size(); ++e) {
    CHECK(s->parse_event(s->event_name(e)) == e);
  }
}

TEST_CASE("trace literals") {
  auto s = resolve_text("channel a\nchannel c : {0..4}\nP = a -> STOP");
  CHECK(s->parse_trace_literal("<>").empty());
  CHECK(s->parse_trace_literal("<a, c.1, a>").size() == 3);
  CHECK(error_kind_of([&] { s->parse_trace_literal("<c.9>"); }) == ErrorKind::BadPayload);
  CHECK(error_kind_of([&] { s->parse_trace_literal("<zz>"); }) == ErrorKind::UnknownChannel);
  CHECK(error_kind_of([&] { s->parse_trace_literal("<a"); }) == ErrorKind::Syntax);
}

TEST_CASE("named sets and constants are evaluated") {
  auto s = resolve_text(
      "Max = 4\nH = 2\nA = H / 2\n"
      "Safe = {0..A}\nUnsafe = {A+1..Max}\n"
      "All = union(Safe, Unsafe)\n"
      "channel speed : {0..Max}\n"
      "E = {| speed |}\n"
      "P = speed?s:Safe -> STOP");
  CHECK(s->int_constant("A") == 1);
  CHECK(s->set_constant("Safe")->size() == 2);
  CHECK(s->set_constant("Unsafe")->size() == 3);
  CHECK(s->set_constant("All")->size() == 5);
  CHECK(std::get<EventSet>(s->constants().at("E")).count() == 5);
  CHECK(s->processes().size() == 1);
}

TEST_CASE("pretty printer basics") {
  CHECK(print_expr(*make_expr(ExprKind::Stop)) == "STOP");
  CHECK(print_expr(*make_prefix("a", {}, make_expr(ExprKind::Skip))) == "a -> SKIP");
  auto e = parse_expression("(a -> STOP [] b -> STOP) ; c -> SKIP");
  CHECK(print_expr(*e) == "(a -> STOP [] b -> STOP) ; c -> SKIP");
  auto f = parse_expression("a -> (b -> STOP [] c -> STOP)");
  CHECK(print_expr(*f) == "a -> (b -> STOP [] c -> STOP)");
  CHECK(*parse_expression(print_expr(*f)) == *f);
}

TEST_CASE("assertions are parsed and resolved") {
  auto s = resolve_text(
      "channel a, b\n"
      "P = a -> b -> P\n"
      "assert P :[deadlock free]\n"
      "assert P :[divergence free]\n"
      "assert P :[deterministic]\n"
      "assert P [T= P \\ {b}\n"
      "assert P :[has trace]: <a, b>\n");
  REQUIRE(s->assertions().size() == 5);
  CHECK(s->assertions()[3].kind == AssertKind::TracesRefinement);
  CHECK(s->processes()[s->assertions()[3].impl].anonymous);
  CHECK(s->assertions()[4].trace.size() == 2);
  CHECK(s->assertions()[1].text == "assert P :[divergence free]");
}

TEST_CASE("resolution is deterministic") {
  const char* text = "channel a, b\nchannel c : {0..3}\nS = {1, 3}\nP = c?x:S -> a -> P [] b -> STOP";
  auto s1 = resolve_text(text);
  auto s2 = resolve_text(text);
  CHECK(s1->alphabet_size() == s2->alphabet_size());
  CHECK(s1->node_count() == s2->node_count());
  CHECK(s1->constants() == s2->constants());
}
