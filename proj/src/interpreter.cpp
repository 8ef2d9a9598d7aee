#include "irsmith/interpreter.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "irsmith/numeric.hpp"
#include "irsmith/op_schema.hpp"

namespace irsmith {

std::string_view trap_name(TrapKind kind) {
  switch (kind) {
    case TrapKind::DivZero: return "div_zero";
    case TrapKind::OutOfBounds: return "oob";
    case TrapKind::UseAfterFree: return "use_after_free";
    case TrapKind::DoubleFree: return "double_free";
    case TrapKind::ShiftOverflow: return "shift_overflow";
    case TrapKind::OverflowMinMax: return "overflow_minmax";
    case TrapKind::Unsupported: return "unsupported";
  }
  return "?";
}

std::string ExecOutcome::str() const {
  switch (status) {
    case ExecStatus::Completed:
      return fmt::format("completed checksum={} exit_code={} steps={}", checksum, exit_code,
                         steps_used);
    case ExecStatus::FuelExhausted:
      return fmt::format("fuel_exhausted steps={}", steps_used);
    case ExecStatus::Trap:
      return fmt::format("trap({}) at {}", trap_name(*trap), trap_path);
  }
  return "?";
}

std::string ObservableBehavior::str() const {
  switch (cls) {
    case Class::Completed: return fmt::format("completed({})", checksum);
    case Class::Timeout: return "timeout";
    case Class::Trap: return "trap";
  }
  return "?";
}

ObservableBehavior observable(const ExecOutcome& outcome) {
  switch (outcome.status) {
    case ExecStatus::Completed: return {ObservableBehavior::Class::Completed, outcome.checksum};
    case ExecStatus::FuelExhausted: return {ObservableBehavior::Class::Timeout, 0};
    case ExecStatus::Trap: return {ObservableBehavior::Class::Trap, 0};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Scalar semantics
// ---------------------------------------------------------------------------

std::uint64_t constant_slot(const Operation& constant) {
  if (const auto* i = constant.attr_as<IntegerAttr>("value")) {
    return static_cast<std::uint64_t>(i->value) & width_mask(i->type.width());
  }
  if (const auto* f = constant.attr_as<FloatAttr>("value")) return f->bits;
  throw IRError("arith.constant without a value attribute");
}

std::optional<ScalarOp> decode_scalar(const Operation& op, const Module& module) {
  switch (opcode_kind(op.code)) {
    case OpKind::Constant:
    case OpKind::IntBinary:
    case OpKind::FloatBinary:
    case OpKind::FloatUnary:
    case OpKind::FloatTernary:
    case OpKind::CmpI:
    case OpKind::CmpF:
    case OpKind::Select:
    case OpKind::IntExt:
    case OpKind::IntTrunc:
    case OpKind::FloatExt:
    case OpKind::FloatTrunc:
    case OpKind::IntToFloat:
    case OpKind::FloatToInt:
    case OpKind::IndexCast:
    case OpKind::Bitcast:
      break;
    default:
      return std::nullopt;
  }
  ScalarOp s;
  s.code = op.code;
  s.kind = opcode_kind(op.code);
  const Type& out = module.type_of(op.results.at(0));
  s.out_kind = out.kind();
  s.out_width = out.width();
  if (op.code == OpCode::Constant) {
    s.imm = constant_slot(op);
    return s;
  }
  const Type& in = module.type_of(op.operands.at(op.code == OpCode::Select ? 1 : 0));
  s.in_kind = in.kind();
  s.in_width = in.width();
  if (op.code == OpCode::CmpI || op.code == OpCode::CmpF) {
    const auto* pred = op.attr_as<std::string>("predicate");
    if (!pred) throw IRError("comparison without a predicate");
    if (op.code == OpCode::CmpI) {
      auto p = parse_cmpi_predicate(*pred);
      if (!p) throw IRError("unknown cmpi predicate " + *pred);
      s.predicate = static_cast<std::uint8_t>(*p);
    } else {
      auto p = parse_cmpf_predicate(*pred);
      if (!p) throw IRError("unknown cmpf predicate " + *pred);
      s.predicate = static_cast<std::uint8_t>(*p);
    }
  }
  return s;
}

namespace {

constexpr std::uint64_t kSignBit16 = 0x8000;
constexpr std::uint64_t kSignBit32 = 0x80000000;
constexpr std::uint64_t kSignBit64 = 0x8000000000000000;

std::uint64_t sign_bit(unsigned width) {
  return width == 16 ? kSignBit16 : width == 32 ? kSignBit32 : kSignBit64;
}

double fval(std::uint64_t bits, unsigned width) {
  if (width == 64) return std::bit_cast<double>(bits);
  if (width == 32) return std::bit_cast<float>(static_cast<std::uint32_t>(bits));
  return bits_to_float(bits, width);
}

std::uint64_t fbits(double v, unsigned width) {
  if (width == 64) return std::bit_cast<std::uint64_t>(v);
  if (width == 32) return std::bit_cast<std::uint32_t>(static_cast<float>(v));
  return float_to_bits(v, width);
}

std::uint64_t float_from_int(std::int64_t s, std::uint64_t u, bool is_signed, unsigned width) {
  switch (width) {
    case 32: {
      float f = is_signed ? static_cast<float>(s) : static_cast<float>(u);
      return std::bit_cast<std::uint32_t>(f);
    }
    case 64: {
      double d = is_signed ? static_cast<double>(s) : static_cast<double>(u);
      return std::bit_cast<std::uint64_t>(d);
    }
    default:
      // Every integer that rounds to a finite f16 is exact in double.
      return double_to_half(is_signed ? static_cast<double>(s) : static_cast<double>(u));
  }
}

// Out-of-range conversions are undefined upstream; here they saturate and
// NaN maps to 0.
std::uint64_t int_from_float(double x, bool is_signed, unsigned width) {
  if (std::isnan(x)) return 0;
  x = std::trunc(x);
  if (is_signed) {
    const double lo = -std::ldexp(1.0, static_cast<int>(width) - 1);
    const double hi = std::ldexp(1.0, static_cast<int>(width) - 1);
    std::int64_t v;
    if (x < lo) v = width >= 64 ? std::numeric_limits<std::int64_t>::min()
                                : -(std::int64_t{1} << (width - 1));
    else if (x >= hi) v = static_cast<std::int64_t>(width_mask(width) >> 1);
    else v = static_cast<std::int64_t>(x);
    return static_cast<std::uint64_t>(v) & width_mask(width);
  }
  if (x <= 0) return 0;
  if (x >= std::ldexp(1.0, static_cast<int>(width))) return width_mask(width);
  return static_cast<std::uint64_t>(x);
}

double maximum(double a, double b, bool propagate_nan, bool want_max) {
  if (std::isnan(a)) return propagate_nan ? a : b;
  if (std::isnan(b)) return propagate_nan ? b : a;
  if (a == b && a == 0.0) {
    // -0 < +0
    const bool a_neg = std::signbit(a);
    return (a_neg == want_max) ? b : a;
  }
  return want_max ? (a > b ? a : b) : (a < b ? a : b);
}

bool compare_int(CmpIPredicate p, std::uint64_t a, std::uint64_t b, unsigned w) {
  const std::int64_t sa = sign_extend(a, w);
  const std::int64_t sb = sign_extend(b, w);
  switch (p) {
    case CmpIPredicate::eq: return a == b;
    case CmpIPredicate::ne: return a != b;
    case CmpIPredicate::slt: return sa < sb;
    case CmpIPredicate::sle: return sa <= sb;
    case CmpIPredicate::sgt: return sa > sb;
    case CmpIPredicate::sge: return sa >= sb;
    case CmpIPredicate::ult: return a < b;
    case CmpIPredicate::ule: return a <= b;
    case CmpIPredicate::ugt: return a > b;
    case CmpIPredicate::uge: return a >= b;
  }
  return false;
}

bool compare_float(CmpFPredicate p, double a, double b) {
  const bool unordered = std::isnan(a) || std::isnan(b);
  switch (p) {
    case CmpFPredicate::false_: return false;
    case CmpFPredicate::oeq: return !unordered && a == b;
    case CmpFPredicate::ogt: return !unordered && a > b;
    case CmpFPredicate::oge: return !unordered && a >= b;
    case CmpFPredicate::olt: return !unordered && a < b;
    case CmpFPredicate::ole: return !unordered && a <= b;
    case CmpFPredicate::one: return !unordered && a != b;
    case CmpFPredicate::ord: return !unordered;
    case CmpFPredicate::ueq: return unordered || a == b;
    case CmpFPredicate::ugt: return unordered || a > b;
    case CmpFPredicate::uge: return unordered || a >= b;
    case CmpFPredicate::ult: return unordered || a < b;
    case CmpFPredicate::ule: return unordered || a <= b;
    case CmpFPredicate::une: return unordered || a != b;
    case CmpFPredicate::uno: return unordered;
    case CmpFPredicate::true_: return true;
  }
  return false;
}

std::optional<TrapKind> eval_int_binary(OpCode code, std::uint64_t a, std::uint64_t b,
                                        unsigned w, std::uint64_t& out) {
  const std::uint64_t m = width_mask(w);
  const std::int64_t sa = sign_extend(a, w);
  const std::int64_t sb = sign_extend(b, w);
  const std::int64_t smin =
      w >= 64 ? std::numeric_limits<std::int64_t>::min() : -(std::int64_t{1} << (w - 1));
  auto signed_checks = [&]() -> std::optional<TrapKind> {
    if (b == 0) return TrapKind::DivZero;
    if (sa == smin && sb == -1) return TrapKind::OverflowMinMax;
    return std::nullopt;
  };
  switch (code) {
    case OpCode::AddI: out = (a + b) & m; break;
    case OpCode::SubI: out = (a - b) & m; break;
    case OpCode::MulI: out = (a * b) & m; break;
    case OpCode::AndI: out = a & b; break;
    case OpCode::OrI: out = a | b; break;
    case OpCode::XOrI: out = a ^ b; break;
    case OpCode::DivUI:
      if (b == 0) return TrapKind::DivZero;
      out = a / b;
      break;
    case OpCode::CeilDivUI:
      if (b == 0) return TrapKind::DivZero;
      out = a / b + (a % b != 0 ? 1 : 0);
      break;
    case OpCode::RemUI:
      if (b == 0) return TrapKind::DivZero;
      out = a % b;
      break;
    case OpCode::DivSI: {
      if (auto t = signed_checks()) return t;
      out = static_cast<std::uint64_t>(sa / sb) & m;
      break;
    }
    case OpCode::CeilDivSI: {
      if (auto t = signed_checks()) return t;
      std::int64_t q = sa / sb;
      const std::int64_t r = sa % sb;
      if (r != 0 && ((r > 0) == (sb > 0))) ++q;
      out = static_cast<std::uint64_t>(q) & m;
      break;
    }
    case OpCode::FloorDivSI: {
      if (auto t = signed_checks()) return t;
      std::int64_t q = sa / sb;
      const std::int64_t r = sa % sb;
      if (r != 0 && ((r < 0) != (sb < 0))) --q;
      out = static_cast<std::uint64_t>(q) & m;
      break;
    }
    case OpCode::RemSI: {
      if (auto t = signed_checks()) return t;
      out = static_cast<std::uint64_t>(sa % sb) & m;
      break;
    }
    case OpCode::ShLI:
      if (b >= w) return TrapKind::ShiftOverflow;
      out = (a << b) & m;
      break;
    case OpCode::ShRUI:
      if (b >= w) return TrapKind::ShiftOverflow;
      out = a >> b;
      break;
    case OpCode::ShRSI:
      if (b >= w) return TrapKind::ShiftOverflow;
      out = static_cast<std::uint64_t>(sa >> b) & m;
      break;
    case OpCode::MaxSI: out = sa >= sb ? a : b; break;
    case OpCode::MinSI: out = sa <= sb ? a : b; break;
    case OpCode::MaxUI: out = a >= b ? a : b; break;
    case OpCode::MinUI: out = a <= b ? a : b; break;
    default: return TrapKind::Unsupported;
  }
  return std::nullopt;
}

double unary_math(OpCode code, double x) {
  switch (code) {
    case OpCode::Atan: return std::atan(x);
    case OpCode::Cbrt: return std::cbrt(x);
    case OpCode::Ceil: return std::ceil(x);
    case OpCode::Cos: return std::cos(x);
    case OpCode::Erf: return std::erf(x);
    case OpCode::Exp: return std::exp(x);
    case OpCode::Exp2: return std::exp2(x);
    case OpCode::ExpM1: return std::expm1(x);
    case OpCode::Floor: return std::floor(x);
    case OpCode::Log: return std::log(x);
    case OpCode::Log10: return std::log10(x);
    case OpCode::Log1p: return std::log1p(x);
    case OpCode::Log2: return std::log2(x);
    case OpCode::Round: return std::round(x);
    case OpCode::RoundEven: return std::nearbyint(x);
    case OpCode::Rsqrt: return 1.0 / std::sqrt(x);
    case OpCode::Sin: return std::sin(x);
    case OpCode::Sqrt: return std::sqrt(x);
    case OpCode::Tan: return std::tan(x);
    case OpCode::Tanh: return std::tanh(x);
    case OpCode::Trunc: return std::trunc(x);
    default: return x;
  }
}

}  // namespace

std::optional<TrapKind> eval_scalar(const ScalarOp& op, const std::uint64_t* args,
                                    std::uint64_t& out) {
  const unsigned ow = op.out_width;
  switch (op.kind) {
    case OpKind::Constant:
      out = op.imm;
      return std::nullopt;
    case OpKind::IntBinary:
      return eval_int_binary(op.code, args[0], args[1], ow, out);
    case OpKind::FloatUnary: {
      if (op.code == OpCode::NegF) {
        out = args[0] ^ sign_bit(ow);
      } else if (op.code == OpCode::AbsF) {
        out = args[0] & ~sign_bit(ow);
      } else {
        out = fbits(unary_math(op.code, fval(args[0], ow)), ow);
      }
      return std::nullopt;
    }
    case OpKind::FloatBinary: {
      if (op.code == OpCode::CopySign) {
        const std::uint64_t s = sign_bit(ow);
        out = (args[0] & ~s) | (args[1] & s);
        return std::nullopt;
      }
      const double a = fval(args[0], ow);
      const double b = fval(args[1], ow);
      double r = 0;
      switch (op.code) {
        case OpCode::AddF: r = a + b; break;
        case OpCode::SubF: r = a - b; break;
        case OpCode::MulF: r = a * b; break;
        case OpCode::DivF: r = a / b; break;
        case OpCode::RemF: r = std::fmod(a, b); break;
        case OpCode::MaximumF: r = maximum(a, b, true, true); break;
        case OpCode::MinimumF: r = maximum(a, b, true, false); break;
        case OpCode::MaxNumF: r = maximum(a, b, false, true); break;
        case OpCode::MinNumF: r = maximum(a, b, false, false); break;
        case OpCode::Atan2: r = std::atan2(a, b); break;
        case OpCode::PowF: r = std::pow(a, b); break;
        default: return TrapKind::Unsupported;
      }
      out = fbits(r, ow);
      return std::nullopt;
    }
    case OpKind::FloatTernary:
      out = fbits(std::fma(fval(args[0], ow), fval(args[1], ow), fval(args[2], ow)), ow);
      return std::nullopt;
    case OpKind::CmpI:
      out = compare_int(static_cast<CmpIPredicate>(op.predicate), args[0], args[1], op.in_width);
      return std::nullopt;
    case OpKind::CmpF:
      out = compare_float(static_cast<CmpFPredicate>(op.predicate), fval(args[0], op.in_width),
                          fval(args[1], op.in_width));
      return std::nullopt;
    case OpKind::Select:
      out = (args[0] & 1) ? args[1] : args[2];
      return std::nullopt;
    case OpKind::IntExt:
      out = op.code == OpCode::ExtSI
                ? static_cast<std::uint64_t>(sign_extend(args[0], op.in_width)) & width_mask(ow)
                : args[0];
      return std::nullopt;
    case OpKind::IntTrunc:
      out = args[0] & width_mask(ow);
      return std::nullopt;
    case OpKind::FloatExt:
    case OpKind::FloatTrunc:
      out = fbits(fval(args[0], op.in_width), ow);
      return std::nullopt;
    case OpKind::IntToFloat:
      out = float_from_int(sign_extend(args[0], op.in_width), args[0],
                           op.code == OpCode::SIToFP, ow);
      return std::nullopt;
    case OpKind::FloatToInt:
      out = int_from_float(fval(args[0], op.in_width), op.code == OpCode::FPToSI, ow);
      return std::nullopt;
    case OpKind::IndexCast:
      if (op.code == OpCode::IndexCast && op.in_kind == TypeKind::Int) {
        out = static_cast<std::uint64_t>(sign_extend(args[0], op.in_width)) & width_mask(ow);
      } else {
        out = args[0] & width_mask(ow);
      }
      return std::nullopt;
    case OpKind::Bitcast:
      out = args[0];
      return std::nullopt;
    default:
      return TrapKind::Unsupported;
  }
}

// ---------------------------------------------------------------------------
// Op paths
// ---------------------------------------------------------------------------

namespace {

bool find_path(const Block& block, const Operation* target, std::string& path) {
  for (std::size_t i = 0; i < block.ops.size(); ++i) {
    const Operation& op = block.ops[i];
    const std::size_t mark = path.size();
    path += fmt::format("/{}:{}", i, op.name);
    if (&op == target) return true;
    for (std::size_t r = 0; r < op.regions.size(); ++r) {
      const std::size_t rmark = path.size();
      path += fmt::format("/r{}", r);
      for (const Block& b : op.regions[r].blocks) {
        if (find_path(b, target, path)) return true;
      }
      path.resize(rmark);
    }
    path.resize(mark);
  }
  return false;
}

}  // namespace

std::string op_path(const Module& module, const Operation* op) {
  for (const Operation& f : module.functions) {
    std::string path = "@" + symbol_name(f);
    if (&f == op) return path;
    for (const Block& b : f.regions.at(0).blocks) {
      if (find_path(b, op, path)) return path;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
// Buffers above this many elements are stored sparsely.
constexpr std::uint64_t kDenseLimit = 16384;

struct Instr {
  OpKind kind = OpKind::Custom;
  ScalarOp scalar;
  std::uint32_t operands = 0;  // offset into the slot pool
  std::uint16_t num_operands = 0;
  std::uint16_t num_results = 0;
  std::uint32_t results = 0;
  std::uint32_t regions[2] = {kNone, kNone};
  std::uint32_t aux = kNone;  // callee block / memref type
  const Operation* src = nullptr;
};

struct CBlock {
  std::uint32_t args = 0;
  std::uint32_t num_args = 0;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

struct MemType {
  unsigned width = 0;
  std::vector<std::uint64_t> shape;
  std::uint64_t size = 0;
};

struct Buffer {
  std::uint32_t generation = 0;
  bool live = false;
  std::uint32_t type = 0;
  std::vector<std::uint64_t> dense;
  std::unordered_map<std::uint64_t, std::uint64_t> sparse;
};

class Compiler {
 public:
  Compiler(const Module& m, std::vector<Instr>& code, std::vector<CBlock>& blocks,
           std::vector<std::uint32_t>& pool, std::vector<MemType>& memtypes)
      : m_(m), code_(code), blocks_(blocks), pool_(pool), memtypes_(memtypes) {}

  /// Compiles every function; returns the body block index of each.
  std::vector<std::uint32_t> compile_functions() {
    std::vector<std::uint32_t> bodies(m_.functions.size(), kNone);
    for (std::size_t i = 0; i < m_.functions.size(); ++i) {
      bodies[i] = reserve_block();
      index_[symbol_name(m_.functions[i])] = bodies[i];
    }
    for (std::size_t i = 0; i < m_.functions.size(); ++i) {
      fill_block(bodies[i], m_.functions[i].regions.at(0).entry());
    }
    for (auto& [instr, callee] : calls_) {
      auto it = index_.find(callee);
      if (it == index_.end()) throw IRError("call to unknown function @" + callee);
      code_[instr].aux = it->second;
    }
    return bodies;
  }

 private:
  std::uint32_t reserve_block() {
    blocks_.emplace_back();
    return static_cast<std::uint32_t>(blocks_.size() - 1);
  }

  std::uint32_t push_slots(const std::vector<ValueId>& values) {
    const auto at = static_cast<std::uint32_t>(pool_.size());
    pool_.insert(pool_.end(), values.begin(), values.end());
    return at;
  }

  std::uint32_t memtype_of(const Type& t) {
    for (std::size_t i = 0; i < memtypes_.size(); ++i) {
      if (memtypes_[i].width == t.width() &&
          std::equal(memtypes_[i].shape.begin(), memtypes_[i].shape.end(), t.shape().begin(),
                     t.shape().end())) {
        return static_cast<std::uint32_t>(i);
      }
    }
    MemType mt;
    mt.width = t.width();
    mt.shape.assign(t.shape().begin(), t.shape().end());
    mt.size = t.num_elements();
    memtypes_.push_back(std::move(mt));
    return static_cast<std::uint32_t>(memtypes_.size() - 1);
  }

  void fill_block(std::uint32_t bi, const Block& block) {
    // Nested blocks are compiled first so this block's code is contiguous.
    std::vector<std::array<std::uint32_t, 2>> nested(block.ops.size(), {kNone, kNone});
    for (std::size_t i = 0; i < block.ops.size(); ++i) {
      const Operation& op = block.ops[i];
      if (op.regions.size() > 2) throw IRError("op with more than two regions: " + op.name);
      for (std::size_t r = 0; r < op.regions.size(); ++r) {
        const std::uint32_t nb = reserve_block();
        fill_block(nb, op.regions[r].entry());
        nested[i][r] = nb;
      }
    }
    CBlock cb;
    cb.args = push_slots(block.arguments);
    cb.num_args = static_cast<std::uint32_t>(block.arguments.size());
    cb.begin = static_cast<std::uint32_t>(code_.size());
    for (std::size_t i = 0; i < block.ops.size(); ++i) {
      const Operation& op = block.ops[i];
      Instr in;
      in.kind = opcode_kind(op.code);
      in.src = &op;
      in.operands = push_slots(op.operands);
      in.num_operands = static_cast<std::uint16_t>(op.operands.size());
      in.results = push_slots(op.results);
      in.num_results = static_cast<std::uint16_t>(op.results.size());
      in.regions[0] = nested[i][0];
      in.regions[1] = nested[i][1];
      if (auto s = decode_scalar(op, m_)) in.scalar = *s;
      if (in.kind == OpKind::Alloc || in.kind == OpKind::Alloca) {
        in.aux = memtype_of(m_.type_of(op.results.at(0)));
      } else if (in.kind == OpKind::Call) {
        const auto* callee = op.attr_as<std::string>("callee");
        if (!callee) throw IRError("func.call without callee");
        calls_.emplace_back(code_.size(), *callee);
      }
      code_.push_back(in);
    }
    cb.end = static_cast<std::uint32_t>(code_.size());
    blocks_[bi] = cb;
  }

  const Module& m_;
  std::vector<Instr>& code_;
  std::vector<CBlock>& blocks_;
  std::vector<std::uint32_t>& pool_;
  std::vector<MemType>& memtypes_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::pair<std::size_t, std::string>> calls_;
};

class Machine {
 public:
  Machine(const Module& m, std::uint64_t fuel) : m_(m), fuel_(fuel) {
    Compiler c(m, code_, blocks_, pool_, memtypes_);
    bodies_ = c.compile_functions();
    regs_.assign(m.num_values(), 0);
  }

  ExecOutcome run() {
    ExecOutcome out;
    auto main = m_.main_index();
    if (!main) throw IRError("module has no main function");
    const Instr* ret = exec_block(bodies_[*main]);
    out.steps_used = steps_;
    if (ret) {
      out.status = ExecStatus::Completed;
      out.checksum = ret->num_operands ? static_cast<std::uint32_t>(reg(ret, 0)) : 0;
      out.exit_code = static_cast<std::uint8_t>(out.checksum & 0xFF);
    } else if (trap_) {
      out.status = ExecStatus::Trap;
      out.trap = trap_;
      out.trap_path = op_path(m_, trap_op_);
    } else {
      out.status = ExecStatus::FuelExhausted;
    }
    return out;
  }

 private:
  std::uint64_t reg(const Instr* in, std::size_t i) const {
    return regs_[pool_[in->operands + i]];
  }

  bool fail(TrapKind k, const Instr* in) {
    trap_ = k;
    trap_op_ = in->src;
    return false;
  }

  // Copies terminator operands into the slots at `dst`.
  void forward(const Instr* term, std::size_t first, std::uint32_t dst, std::size_t n) {
    tmp_.resize(n);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = reg(term, first + i);
    for (std::size_t i = 0; i < n; ++i) regs_[pool_[dst + i]] = tmp_[i];
  }

  void set_args(std::uint32_t bi, const Instr* from, std::size_t first) {
    const CBlock& b = blocks_[bi];
    forward(from, first, b.args, b.num_args);
  }

  /// Runs a block; returns its terminator, or null on trap/fuel exhaustion.
  const Instr* exec_block(std::uint32_t bi) {
    const CBlock b = blocks_[bi];
    const std::size_t alloca_mark = allocas_.size();
    const Instr* term = nullptr;
    for (std::uint32_t pc = b.begin; pc < b.end; ++pc) {
      const Instr* in = &code_[pc];
      if (steps_ >= fuel_) return nullptr;
      ++steps_;
      if (in->kind == OpKind::Return || in->kind == OpKind::Yield ||
          in->kind == OpKind::Condition) {
        term = in;
        break;
      }
      if (!exec(in)) return nullptr;
    }
    while (allocas_.size() > alloca_mark) {
      release(allocas_.back());
      allocas_.pop_back();
    }
    return term;
  }

  bool exec(const Instr* in) {
    switch (in->kind) {
      case OpKind::Constant:
        regs_[pool_[in->results]] = in->scalar.imm;
        return true;
      case OpKind::IntBinary:
      case OpKind::FloatBinary:
      case OpKind::FloatUnary:
      case OpKind::FloatTernary:
      case OpKind::CmpI:
      case OpKind::CmpF:
      case OpKind::Select:
      case OpKind::IntExt:
      case OpKind::IntTrunc:
      case OpKind::FloatExt:
      case OpKind::FloatTrunc:
      case OpKind::IntToFloat:
      case OpKind::FloatToInt:
      case OpKind::IndexCast:
      case OpKind::Bitcast: {
        std::uint64_t args[3];
        for (std::size_t i = 0; i < in->num_operands && i < 3; ++i) args[i] = reg(in, i);
        std::uint64_t out = 0;
        if (auto t = eval_scalar(in->scalar, args, out)) return fail(*t, in);
        regs_[pool_[in->results]] = out;
        return true;
      }
      case OpKind::If: {
        const std::uint32_t region = (reg(in, 0) & 1) ? in->regions[0] : in->regions[1];
        const Instr* y = exec_block(region);
        if (!y) return false;
        forward(y, 0, in->results, in->num_results);
        return true;
      }
      case OpKind::For: {
        const auto lb = static_cast<std::int64_t>(reg(in, 0));
        const auto ub = static_cast<std::int64_t>(reg(in, 1));
        const auto step = static_cast<std::int64_t>(reg(in, 2));
        const std::uint32_t iv = pool_[blocks_[in->regions[0]].args];
        for (std::int64_t i = lb; i < ub;) {
          regs_[iv] = static_cast<std::uint64_t>(i);
          if (!exec_block(in->regions[0])) return false;
          if (__builtin_add_overflow(i, step, &i)) break;
        }
        return true;
      }
      case OpKind::While: {
        set_args(in->regions[0], in, 0);
        for (;;) {
          const Instr* c = exec_block(in->regions[0]);
          if (!c) return false;
          if (!(reg(c, 0) & 1)) {
            forward(c, 1, in->results, in->num_results);
            return true;
          }
          set_args(in->regions[1], c, 1);
          const Instr* y = exec_block(in->regions[1]);
          if (!y) return false;
          set_args(in->regions[0], y, 0);
        }
      }
      case OpKind::Call: {
        set_args(in->aux, in, 0);
        const Instr* r = exec_block(in->aux);
        if (!r) return false;
        forward(r, 0, in->results, in->num_results);
        return true;
      }
      case OpKind::Alloc:
      case OpKind::Alloca: {
        const std::uint64_t h = allocate(in->aux);
        regs_[pool_[in->results]] = h;
        if (in->kind == OpKind::Alloca) allocas_.push_back(h);
        return true;
      }
      case OpKind::Dealloc: {
        Buffer* b = buffer(reg(in, 0));
        if (!b) return fail(TrapKind::DoubleFree, in);
        free_buffer(reg(in, 0));
        return true;
      }
      case OpKind::Load: {
        Buffer* b = buffer(reg(in, 0));
        if (!b) return fail(TrapKind::UseAfterFree, in);
        auto at = linear_index(*b, in, 1);
        if (!at) return fail(TrapKind::OutOfBounds, in);
        regs_[pool_[in->results]] = read(*b, *at);
        return true;
      }
      case OpKind::Store: {
        Buffer* b = buffer(reg(in, 1));
        if (!b) return fail(TrapKind::UseAfterFree, in);
        auto at = linear_index(*b, in, 2);
        if (!at) return fail(TrapKind::OutOfBounds, in);
        write(*b, *at, reg(in, 0));
        return true;
      }
      case OpKind::Copy: {
        Buffer* src = buffer(reg(in, 0));
        Buffer* dst = buffer(reg(in, 1));
        if (!src || !dst) return fail(TrapKind::UseAfterFree, in);
        if (memtypes_[src->type].size != memtypes_[dst->type].size) {
          return fail(TrapKind::OutOfBounds, in);
        }
        if (src != dst) {
          dst->dense = src->dense;
          dst->sparse = src->sparse;
        }
        return true;
      }
      case OpKind::Custom: {
        const OpSchema* s = find_custom_schema(in->src->name);
        if (!s || !s->evaluate) return fail(TrapKind::Unsupported, in);
        std::vector<std::uint64_t> args(in->num_operands);
        for (std::size_t i = 0; i < args.size(); ++i) args[i] = reg(in, i);
        auto res = s->evaluate(args, *in->src, m_);
        if (res.size() != in->num_results) return fail(TrapKind::Unsupported, in);
        for (std::size_t i = 0; i < res.size(); ++i) regs_[pool_[in->results + i]] = res[i];
        return true;
      }
      default:
        return fail(TrapKind::Unsupported, in);
    }
  }

  // --- memory ---------------------------------------------------------------

  std::uint64_t allocate(std::uint32_t type) {
    std::uint32_t slot;
    if (!free_slots_.empty()) {
      slot = free_slots_.back();
      free_slots_.pop_back();
    } else {
      slot = static_cast<std::uint32_t>(buffers_.size());
      buffers_.emplace_back();
    }
    Buffer& b = buffers_[slot];
    b.live = true;
    b.type = type;
    return (std::uint64_t{b.generation} << 32) | slot;
  }

  Buffer* buffer(std::uint64_t handle) {
    const auto slot = static_cast<std::uint32_t>(handle);
    if (slot >= buffers_.size()) return nullptr;
    Buffer& b = buffers_[slot];
    if (!b.live || b.generation != static_cast<std::uint32_t>(handle >> 32)) return nullptr;
    return &b;
  }

  void free_buffer(std::uint64_t handle) {
    Buffer* b = buffer(handle);
    b->live = false;
    ++b->generation;
    b->dense.clear();
    b->sparse.clear();
    free_slots_.push_back(static_cast<std::uint32_t>(handle));
  }

  void release(std::uint64_t handle) {
    if (buffer(handle)) free_buffer(handle);
  }

  std::optional<std::uint64_t> linear_index(const Buffer& b, const Instr* in, std::size_t first) {
    const MemType& t = memtypes_[b.type];
    std::uint64_t at = 0;
    for (std::size_t d = 0; d < t.shape.size(); ++d) {
      const std::uint64_t i = reg(in, first + d);
      if (i >= t.shape[d]) return std::nullopt;
      at = at * t.shape[d] + i;
    }
    return at;
  }

  std::uint64_t read(const Buffer& b, std::uint64_t at) const {
    if (memtypes_[b.type].size <= kDenseLimit) return b.dense.empty() ? 0 : b.dense[at];
    auto it = b.sparse.find(at);
    return it == b.sparse.end() ? 0 : it->second;
  }

  void write(Buffer& b, std::uint64_t at, std::uint64_t v) {
    const std::uint64_t n = memtypes_[b.type].size;
    if (n > kDenseLimit) {
      b.sparse[at] = v;
      return;
    }
    // Dense storage is zero-filled on first write.
    if (b.dense.empty()) b.dense.assign(n, 0);
    b.dense[at] = v;
  }

  const Module& m_;
  std::uint64_t fuel_;
  std::uint64_t steps_ = 0;
  std::vector<Instr> code_;
  std::vector<CBlock> blocks_;
  std::vector<std::uint32_t> pool_;
  std::vector<MemType> memtypes_;
  std::vector<std::uint32_t> bodies_;
  std::vector<std::uint64_t> regs_;
  std::vector<std::uint64_t> tmp_;
  std::vector<Buffer> buffers_;
  std::vector<std::uint32_t> free_slots_;
  std::vector<std::uint64_t> allocas_;
  std::optional<TrapKind> trap_;
  const Operation* trap_op_ = nullptr;
};

}  // namespace

ExecOutcome run(const Module& module, std::uint64_t fuel) {
  Machine machine(module, fuel);
  return machine.run();
}

}  // namespace irsmith
