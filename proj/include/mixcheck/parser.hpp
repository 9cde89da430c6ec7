// Reader for `.mix` files: declarations and commands, each terminated by a
// full stop. See docs/grammar.md for the grammar.

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mixcheck/core.hpp"

namespace mixcheck {

struct CheckEntail {
  Formula ante;
  Formula conseq;
  SourceSpan span;
  std::string source;
};

struct CheckSubtype {
  TypeExpr sub;
  TypeExpr super;
  SourceSpan span;
  std::string source;
};

struct Linearize {
  Ident name;
  SourceSpan span;
  std::string source;
};

/// `study Label: Sub <: Super, ...`; pairs are (sub, super).
struct Study {
  std::string label;
  std::vector<std::pair<TypeExpr, TypeExpr>> pairs;
  SourceSpan span;
  std::string source;
};

using Command = std::variant<CheckEntail, CheckSubtype, Linearize, Study>;

const SourceSpan& command_span(const Command& c);
const std::string& command_source(const Command& c);
/// Input-syntax rendering, terminated by a full stop.
std::string to_string(const Command& c);

struct ParseResult {
  Program program;
  std::vector<Command> commands;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

/// Parses and checks a whole file. On failure the program and command list
/// are empty and at least one diagnostic is present.
ParseResult parse_program(std::string_view text, const std::string& file = "<input>");
/// Same, with the declarations of `base` in scope; the returned program
/// holds `base` followed by the new declarations.
ParseResult parse_program(std::string_view text, const Program& base, const std::string& file = "<input>");

/// Raised by the single-item entry points below.
class ParseError : public Error {
 public:
  explicit ParseError(std::vector<Diagnostic> ds);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

/// Syntax only; no declarations are consulted.
Formula parse_formula(std::string_view text);
TypeExpr parse_type_expr(std::string_view text);

}  // namespace mixcheck
