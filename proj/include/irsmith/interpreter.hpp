#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "irsmith/ir.hpp"

namespace irsmith {

// Slot encoding: every runtime value is one 64-bit slot. Integers hold their
// bits zero-extended from the type width, index holds all 64 bits, floats
// hold the raw bit pattern of their own width and memrefs hold an opaque
// buffer handle.

enum class ExecStatus : std::uint8_t { Completed, FuelExhausted, Trap };

enum class TrapKind : std::uint8_t {
  DivZero,
  OutOfBounds,
  UseAfterFree,
  DoubleFree,
  ShiftOverflow,
  OverflowMinMax,
  /// Custom op without an evaluate hook.
  Unsupported,
};

std::string_view trap_name(TrapKind kind);

struct ExecOutcome {
  ExecStatus status = ExecStatus::Completed;
  std::optional<TrapKind> trap;
  /// Path of the trapping op, in verifier path syntax.
  std::string trap_path;
  /// Value returned by main; meaningful only when completed.
  std::uint32_t checksum = 0;
  std::uint8_t exit_code = 0;
  std::uint64_t steps_used = 0;

  /// `completed checksum=…`, `fuel_exhausted` or `trap(kind) at path`.
  std::string str() const;
};

/// Executes `main` of a verified module. Every executed op, terminators
/// included, costs one unit of fuel; the run stops with FuelExhausted when an
/// op is reached with no fuel left.
ExecOutcome run(const Module& module, std::uint64_t fuel);

/// Comparison key for differential testing.
struct ObservableBehavior {
  enum class Class : std::uint8_t { Completed, Timeout, Trap };
  Class cls = Class::Completed;
  std::uint32_t checksum = 0;

  /// Traps never compare equal, not even to themselves.
  friend bool operator==(const ObservableBehavior& a, const ObservableBehavior& b) {
    if (a.cls == Class::Trap || b.cls == Class::Trap) return false;
    if (a.cls != b.cls) return false;
    return a.cls != Class::Completed || a.checksum == b.checksum;
  }
  std::string str() const;
};

ObservableBehavior observable(const ExecOutcome& outcome);

// ---------------------------------------------------------------------------
// Scalar semantics, shared with constant folding
// ---------------------------------------------------------------------------

/// A side-effect-free scalar op reduced to what evaluation needs.
struct ScalarOp {
  OpCode code = OpCode::Custom;
  OpKind kind = OpKind::Custom;
  /// cmpi/cmpf predicate as its enum value.
  std::uint8_t predicate = 0;
  /// Type of operand 0 (operand 1 for select) and of the result.
  TypeKind in_kind = TypeKind::Int;
  unsigned in_width = 0;
  TypeKind out_kind = TypeKind::Int;
  unsigned out_width = 0;
  /// Slot value of an arith.constant.
  std::uint64_t imm = 0;
};

/// Decodes a builtin scalar op (arith.*, math.*); nullopt for anything else.
std::optional<ScalarOp> decode_scalar(const Operation& op, const Module& module);

/// Evaluates `op` over operand slots; returns the trap it raises, if any.
std::optional<TrapKind> eval_scalar(const ScalarOp& op, const std::uint64_t* args,
                                    std::uint64_t& out);

/// Slot value of an arith.constant attribute.
std::uint64_t constant_slot(const Operation& constant);

/// Verifier-style path (`@f/3:scf.if/r1/0:arith.addi`) of an op in `module`.
std::string op_path(const Module& module, const Operation* op);

}  // namespace irsmith
