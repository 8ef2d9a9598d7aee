#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace irsmith {

enum class OpKind : std::uint8_t {
  Function,
  Return,
  Call,
  If,
  For,
  While,
  Yield,
  Condition,
  Constant,
  IntBinary,
  FloatBinary,
  FloatUnary,
  FloatTernary,
  CmpI,
  CmpF,
  Select,
  IntExt,
  IntTrunc,
  FloatExt,
  FloatTrunc,
  IntToFloat,
  FloatToInt,
  IndexCast,
  Bitcast,
  Alloc,
  Alloca,
  Load,
  Store,
  Dealloc,
  Copy,
  Custom,
};

// X(enumerator, "mlir.name", kind)
#define IRSMITH_BUILTIN_OPS(X)                          \
  X(FuncFunc, "func.func", Function)                    \
  X(FuncReturn, "func.return", Return)                  \
  X(FuncCall, "func.call", Call)                        \
  X(ScfIf, "scf.if", If)                                \
  X(ScfFor, "scf.for", For)                             \
  X(ScfWhile, "scf.while", While)                       \
  X(ScfYield, "scf.yield", Yield)                       \
  X(ScfCondition, "scf.condition", Condition)           \
  X(Constant, "arith.constant", Constant)               \
  X(AddI, "arith.addi", IntBinary)                      \
  X(SubI, "arith.subi", IntBinary)                      \
  X(MulI, "arith.muli", IntBinary)                      \
  X(DivSI, "arith.divsi", IntBinary)                    \
  X(DivUI, "arith.divui", IntBinary)                    \
  X(CeilDivSI, "arith.ceildivsi", IntBinary)            \
  X(CeilDivUI, "arith.ceildivui", IntBinary)            \
  X(FloorDivSI, "arith.floordivsi", IntBinary)          \
  X(RemSI, "arith.remsi", IntBinary)                    \
  X(RemUI, "arith.remui", IntBinary)                    \
  X(AndI, "arith.andi", IntBinary)                      \
  X(OrI, "arith.ori", IntBinary)                        \
  X(XOrI, "arith.xori", IntBinary)                      \
  X(ShLI, "arith.shli", IntBinary)                      \
  X(ShRSI, "arith.shrsi", IntBinary)                    \
  X(ShRUI, "arith.shrui", IntBinary)                    \
  X(MaxSI, "arith.maxsi", IntBinary)                    \
  X(MaxUI, "arith.maxui", IntBinary)                    \
  X(MinSI, "arith.minsi", IntBinary)                    \
  X(MinUI, "arith.minui", IntBinary)                    \
  X(AddF, "arith.addf", FloatBinary)                    \
  X(SubF, "arith.subf", FloatBinary)                    \
  X(MulF, "arith.mulf", FloatBinary)                    \
  X(DivF, "arith.divf", FloatBinary)                    \
  X(RemF, "arith.remf", FloatBinary)                    \
  X(MaximumF, "arith.maximumf", FloatBinary)            \
  X(MinimumF, "arith.minimumf", FloatBinary)            \
  X(MaxNumF, "arith.maxnumf", FloatBinary)              \
  X(MinNumF, "arith.minnumf", FloatBinary)              \
  X(NegF, "arith.negf", FloatUnary)                     \
  X(CmpI, "arith.cmpi", CmpI)                           \
  X(CmpF, "arith.cmpf", CmpF)                           \
  X(Select, "arith.select", Select)                     \
  X(ExtSI, "arith.extsi", IntExt)                       \
  X(ExtUI, "arith.extui", IntExt)                       \
  X(TruncI, "arith.trunci", IntTrunc)                   \
  X(ExtF, "arith.extf", FloatExt)                       \
  X(TruncF, "arith.truncf", FloatTrunc)                 \
  X(SIToFP, "arith.sitofp", IntToFloat)                 \
  X(UIToFP, "arith.uitofp", IntToFloat)                 \
  X(FPToSI, "arith.fptosi", FloatToInt)                 \
  X(FPToUI, "arith.fptoui", FloatToInt)                 \
  X(IndexCast, "arith.index_cast", IndexCast)           \
  X(IndexCastUI, "arith.index_castui", IndexCast)       \
  X(Bitcast, "arith.bitcast", Bitcast)                  \
  X(AbsF, "math.absf", FloatUnary)                      \
  X(Atan, "math.atan", FloatUnary)                      \
  X(Atan2, "math.atan2", FloatBinary)                   \
  X(Cbrt, "math.cbrt", FloatUnary)                      \
  X(Ceil, "math.ceil", FloatUnary)                      \
  X(CopySign, "math.copysign", FloatBinary)             \
  X(Cos, "math.cos", FloatUnary)                        \
  X(Erf, "math.erf", FloatUnary)                        \
  X(Exp, "math.exp", FloatUnary)                        \
  X(Exp2, "math.exp2", FloatUnary)                      \
  X(ExpM1, "math.expm1", FloatUnary)                    \
  X(Floor, "math.floor", FloatUnary)                    \
  X(Fma, "math.fma", FloatTernary)                      \
  X(Log, "math.log", FloatUnary)                        \
  X(Log10, "math.log10", FloatUnary)                    \
  X(Log1p, "math.log1p", FloatUnary)                    \
  X(Log2, "math.log2", FloatUnary)                      \
  X(PowF, "math.powf", FloatBinary)                     \
  X(Round, "math.round", FloatUnary)                    \
  X(RoundEven, "math.roundeven", FloatUnary)            \
  X(Rsqrt, "math.rsqrt", FloatUnary)                    \
  X(Sin, "math.sin", FloatUnary)                        \
  X(Sqrt, "math.sqrt", FloatUnary)                      \
  X(Tan, "math.tan", FloatUnary)                        \
  X(Tanh, "math.tanh", FloatUnary)                      \
  X(Trunc, "math.trunc", FloatUnary)                    \
  X(Alloc, "memref.alloc", Alloc)                       \
  X(Alloca, "memref.alloca", Alloca)                    \
  X(Load, "memref.load", Load)                          \
  X(Store, "memref.store", Store)                       \
  X(Dealloc, "memref.dealloc", Dealloc)                 \
  X(Copy, "memref.copy", Copy)

enum class OpCode : std::uint16_t {
#define IRSMITH_ENUM(e, n, k) e,
  IRSMITH_BUILTIN_OPS(IRSMITH_ENUM)
#undef IRSMITH_ENUM
  Custom,
};

/// Op name -> code; Custom for anything not built in.
OpCode opcode_for(std::string_view name);
std::string_view opcode_name(OpCode code);
OpKind opcode_kind(OpCode code);
std::span<const OpCode> builtin_opcodes();

/// Dialect prefix of a qualified op name ("arith" for "arith.addi").
std::string_view dialect_of(std::string_view op_name);

// Comparison predicates, spelled as in MLIR.
enum class CmpIPredicate : std::uint8_t { eq, ne, slt, sle, sgt, sge, ult, ule, ugt, uge };
enum class CmpFPredicate : std::uint8_t {
  false_, oeq, ogt, oge, olt, ole, one, ord, ueq, ugt, uge, ult, ule, une, uno, true_
};

std::span<const std::string_view> cmpi_predicate_names();
std::span<const std::string_view> cmpf_predicate_names();
std::optional<CmpIPredicate> parse_cmpi_predicate(std::string_view s);
std::optional<CmpFPredicate> parse_cmpf_predicate(std::string_view s);

}  // namespace irsmith
