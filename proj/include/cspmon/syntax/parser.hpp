#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cspmon/syntax/ast.hpp"

namespace cspmon::syntax {

/// A specification text together with where it came from.
struct SpecSource {
  std::string text;
  std::string origin;  // file path or an inline label
};

enum class TokenKind { Ident, Int, String, Symbol, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::int64_t value = 0;
  SourcePos pos;
};

/// Splits source text into tokens. Handles `--` line comments and `{- -}`
/// block comments. Throws Error(Syntax) on stray characters.
std::vector<Token> tokenize(std::string_view text, const std::string& origin = {});

/// Parses one source file. Include directives are kept as declarations; see
/// load_modules() for expansion.
Module parse_spec(const SpecSource& source);

/// Parses a standalone expression (process or value).
ExprRef parse_expression(std::string_view text, const std::string& origin = "<expr>");

/// Parses `<e1, e2, ...>` into dotted event expressions, unresolved.
std::vector<ExprRef> parse_trace_expressions(std::string_view text,
                                             const std::string& origin = "<trace>");

/// Reads a file and every file it includes (paths relative to the including
/// file), returning modules in include order with the root last.
std::vector<Module> load_modules(const std::string& path);

/// Reads a whole file into a SpecSource; throws Error(Io).
SpecSource read_source(const std::string& path);

bool is_reserved_word(std::string_view word);

}  // namespace cspmon::syntax
