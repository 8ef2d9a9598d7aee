#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irsmith/ir.hpp"

namespace irsmith {

/// Signature-table entry for an op that is not built in. Built-in ops
/// (func/scf/arith/math/memref) have fixed entries; extension dialects add
/// theirs here so the verifier, printer and interpreter accept them.
///
/// Custom ops are region-free and printed in generic form.
struct OpSchema {
  std::string name;
  bool side_effects = false;
  /// Local signature check; returns a diagnostic on mismatch.
  std::function<std::optional<std::string>(const Operation&, const Module&)> check;
  /// Evaluation over raw interpreter slots (see interpreter.hpp for the
  /// slot encoding). Optional; ops without it cannot be executed.
  std::function<std::vector<std::uint64_t>(std::span<const std::uint64_t>, const Operation&,
                                           const Module&)>
      evaluate;
};

/// Registers a custom op schema. Not synchronized: register at startup,
/// before modules are verified or executed concurrently.
void register_op_schema(OpSchema schema);
void unregister_op_schema(std::string_view name);
const OpSchema* find_custom_schema(std::string_view name);

/// Built-in or registered custom op.
bool is_known_op(std::string_view name);

/// Checks operand/result/attribute/region structure of one op in isolation.
/// Context rules (terminator placement, yield types, callee signatures) are
/// the verifier's job.
std::optional<std::string> check_signature(const Operation& op, const Module& module);

bool is_terminator(OpCode code);
bool has_regions(OpCode code);

/// Writes, frees or allocates memory (memref.store/copy/dealloc/alloc/alloca).
bool has_memory_effects(const Operation& op);

}  // namespace irsmith
