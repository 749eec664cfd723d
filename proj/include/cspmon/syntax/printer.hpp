#pragma once

#include <string>

#include "cspmon/syntax/ast.hpp"

namespace cspmon::syntax {

/// Renders an expression as parseable text, inserting only the parentheses
/// the grammar needs.
std::string print_expr(const Expr& e);

std::string print_declaration(const Declaration& d);

/// Renders a module, one declaration per line. parse_spec(print_module(m))
/// is structurally equal to m.
std::string print_module(const Module& m);

}  // namespace cspmon::syntax
