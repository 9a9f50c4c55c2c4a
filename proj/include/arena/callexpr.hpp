#pragma once

// Parser for single literal-argument call statements:
//
//   statement := name ('.' name)* '(' [ args ] ')' [ comment ]
//   args      := arg (',' arg)* [',']
//   arg       := literal | name '=' literal
//   literal   := string | number | 'True' | 'False'
//   comment   := '#' any*
//
// Positional arguments must precede keyword arguments. Nothing else is
// accepted: no expressions, no nesting, no assignments, no chaining.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "arena/common.hpp"

namespace arena::callexpr {

using Literal = std::variant<std::string, std::int64_t, double, bool>;

std::string literal_type_name(const Literal& v);
/// Renders a literal as source text that parses back to the same value.
std::string render_literal(const Literal& v);
json literal_to_json(const Literal& v);
Literal literal_from_json(const json& j);
/// Numeric view of int or real literals; nullopt otherwise.
std::optional<double> as_number(const Literal& v);

struct CallExpr {
  std::vector<std::string> path;  // {"computer", "mouse", "move_id"}
  std::vector<Literal> args;
  std::vector<std::pair<std::string, Literal>> kwargs;

  std::string dotted() const;
  bool operator==(const CallExpr&) const = default;
};

/// Thrown for any grammar violation; `column` is 0-based within the input.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t column)
      : Error("DslSyntaxError", message), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Parses exactly one statement occupying the whole input (surrounding
/// whitespace and a trailing comment allowed).
CallExpr parse_statement(std::string_view text);

/// Splits on ';' outside of string literals. Used for one-line command
/// strings such as "import time; time.sleep(0.5)".
std::vector<std::string> split_statements(std::string_view text);

}  // namespace arena::callexpr
