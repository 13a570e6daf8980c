#pragma once

// Concrete syntax: a Prolog subset with the arithmetic builtins as infix
// operators, plus `&` inside parenthesised body groups for residual code.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "andpe/term.hpp"

namespace andpe {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct ParseOptions {
  /// Accept `(L & R)` groups in clause bodies.
  bool allow_parallel = false;
};

Program parse_program(std::string_view source, ParseOptions opts = {});
/// Parses a comma-separated conjunction of atoms, optionally ended by `.`.
std::vector<Atom> parse_query(std::string_view source);
Atom parse_atom(std::string_view source);
Term parse_term(std::string_view source);

struct PrintOptions {
  /// Rename the variables of each clause to A, B, ..., Z, A1, ... by first
  /// occurrence.
  bool normalize_variables = false;
};

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Clause& c, PrintOptions opts = {});
std::string to_string(const Program& p, PrintOptions opts = {});
std::string to_string(std::span<const Atom> query);

/// The n-th name in the A..Z, A1..Z1, ... sequence.
std::string normalized_variable_name(std::size_t n);
/// Clause with variables renamed as for `normalize_variables`.
Clause normalize_variables(const Clause& c);

}  // namespace andpe
