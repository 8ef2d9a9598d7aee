#pragma once

#include <string>
#include <vector>

#include "irsmith/ir.hpp"

namespace irsmith {

struct Violation {
  /// Rule that failed, e.g. "dominance", "terminator", "index out of bounds".
  std::string kind;
  /// Op path such as `@main/3/scf.if#1/0` (function, op index, region, op index).
  std::string path;
  std::string message;
};

struct VerificationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  /// One violation per line; empty when ok.
  std::string str() const;
  bool has(std::string_view kind) const;
};

/// Checks SSA dominance, isolation, terminators, yield/return/call typing,
/// per-op signatures, constant memref indices and module-level rules (a
/// single `main() -> i32`, acyclic calls). Never mutates the module.
VerificationReport verify(const Module& module);

}  // namespace irsmith
