#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "irsmith/ir.hpp"

namespace irsmith {

struct EmitOptions {
  int indent_width = 2;
  /// SSA names are `<prefix><n>` in definition order; must start with '%'.
  std::string value_prefix = "%v";
};

/// Syntax error or unsupported construct, with a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Prints `module` in MLIR pretty syntax. Deterministic; one op per line,
/// LF line endings, trailing newline. Throws IRError if the module does
/// not verify.
std::string emit(const Module& module, const EmitOptions& options = {});

/// Same as emit() without the verification gate; for diagnostics only.
std::string emit_unverified(const Module& module, const EmitOptions& options = {});

/// Parses the textual subset produced by emit(). Values may use any SSA
/// names. The result is not verified.
Module parse(std::string_view text);

/// Canonical float literal for a bit pattern: shortest round-tripping
/// decimal (always containing '.') or an MLIR hex literal (`0x7FC00000`).
std::string format_float_literal(std::uint64_t bits, unsigned width);

}  // namespace irsmith
