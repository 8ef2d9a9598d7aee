#include "irsmith/op_schema.hpp"

#include <fmt/format.h>

#include <map>

namespace irsmith {

namespace {

std::map<std::string, OpSchema, std::less<>>& custom_schemas() {
  static std::map<std::string, OpSchema, std::less<>> table;
  return table;
}

using Diag = std::optional<std::string>;

Diag expect_counts(const Operation& op, std::size_t operands, std::size_t results,
                   std::size_t regions = 0) {
  if (op.operands.size() != operands) {
    return fmt::format("expected {} operands, got {}", operands, op.operands.size());
  }
  if (op.results.size() != results) {
    return fmt::format("expected {} results, got {}", results, op.results.size());
  }
  if (op.regions.size() != regions) {
    return fmt::format("expected {} regions, got {}", regions, op.regions.size());
  }
  return std::nullopt;
}

Diag expect_single_block(const Operation& op, std::size_t region,
                         const std::vector<Type>& arg_types, const Module& m) {
  const Region& r = op.regions[region];
  if (r.blocks.size() != 1) {
    return fmt::format("region #{} must have exactly one block", region);
  }
  if (r.isolated_from_above) {
    return fmt::format("region #{} must not be isolated from above", region);
  }
  const Block& b = r.entry();
  if (b.arguments.size() != arg_types.size()) {
    return fmt::format("region #{} block expects {} arguments, got {}", region,
                       arg_types.size(), b.arguments.size());
  }
  for (std::size_t i = 0; i < arg_types.size(); ++i) {
    if (m.type_of(b.arguments[i]) != arg_types[i]) {
      return fmt::format("region #{} argument #{} has type {}, expected {}", region, i,
                         m.type_of(b.arguments[i]).str(), arg_types[i].str());
    }
  }
  return std::nullopt;
}

std::vector<Type> types_of(const Module& m, const std::vector<ValueId>& values) {
  std::vector<Type> out;
  out.reserve(values.size());
  for (auto v : values) out.push_back(m.type_of(v));
  return out;
}

Diag all_same(const Module& m, const Operation& op, bool (Type::*pred)() const,
              std::string_view what) {
  const Type& t = m.type_of(op.results.front());
  if (!(t.*pred)()) return fmt::format("result must be {}, got {}", what, t.str());
  for (auto v : op.operands) {
    if (m.type_of(v) != t) {
      return fmt::format("operand type {} does not match result type {}",
                         m.type_of(v).str(), t.str());
    }
  }
  return std::nullopt;
}

Diag check_constant(const Operation& op, const Module& m) {
  if (auto d = expect_counts(op, 0, 1)) return d;
  const Type& t = m.type_of(op.results[0]);
  const Attribute* a = op.attr("value");
  if (!a) return "missing 'value' attribute";
  if (const auto* ia = std::get_if<IntegerAttr>(a)) {
    if (!t.is_int_like() || ia->type != t) return "integer literal type mismatch";
    if (t.width() < 64) {
      std::int64_t lo = -(std::int64_t{1} << (t.width() - 1));
      std::int64_t hi = (std::int64_t{1} << (t.width() - 1)) - 1;
      if (ia->value < lo || ia->value > hi) {
        return fmt::format("literal {} does not fit {}", ia->value, t.str());
      }
    }
    return std::nullopt;
  }
  if (const auto* fa = std::get_if<FloatAttr>(a)) {
    if (!t.is_float() || fa->type != t) return "float literal type mismatch";
    if (t.width() < 64 && (fa->bits >> t.width()) != 0) return "float bits exceed width";
    return std::nullopt;
  }
  return "'value' must be an integer or float literal";
}

Diag check_cast(const Operation& op, const Module& m) {
  if (auto d = expect_counts(op, 1, 1)) return d;
  const Type& src = m.type_of(op.operands[0]);
  const Type& dst = m.type_of(op.results[0]);
  auto bad = [&] { return fmt::format("invalid cast {} to {}", src.str(), dst.str()); };
  switch (opcode_kind(op.code)) {
    case OpKind::IntExt:
      if (!src.is_int() || !dst.is_int() || src.width() >= dst.width()) return bad();
      break;
    case OpKind::IntTrunc:
      if (!src.is_int() || !dst.is_int() || src.width() <= dst.width()) return bad();
      break;
    case OpKind::FloatExt:
      if (!src.is_float() || !dst.is_float() || src.width() >= dst.width()) return bad();
      break;
    case OpKind::FloatTrunc:
      if (!src.is_float() || !dst.is_float() || src.width() <= dst.width()) return bad();
      break;
    case OpKind::IntToFloat:
      if (!src.is_int() || !dst.is_float()) return bad();
      break;
    case OpKind::FloatToInt:
      if (!src.is_float() || !dst.is_int()) return bad();
      break;
    case OpKind::IndexCast:
      if (!((src.is_index() && dst.is_int()) || (src.is_int() && dst.is_index()))) {
        return bad();
      }
      break;
    case OpKind::Bitcast:
      if (src.is_index() || dst.is_index() || !src.is_scalar() || !dst.is_scalar() ||
          src.width() != dst.width()) {
        return bad();
      }
      break;
    default:
      return bad();
  }
  return std::nullopt;
}

Diag check_indices(const Module& m, const Operation& op, std::size_t first,
                   const Type& memref) {
  if (op.operands.size() != first + memref.rank()) {
    return fmt::format("expected {} indices for {}", memref.rank(), memref.str());
  }
  for (std::size_t i = first; i < op.operands.size(); ++i) {
    if (!m.type_of(op.operands[i]).is_index()) return "indices must be of index type";
  }
  return std::nullopt;
}

Diag check_builtin(const Operation& op, const Module& m) {
  for (auto r : op.results) {
    if (!m.type_of(r).well_formed()) {
      return fmt::format("malformed result type {}", m.type_of(r).str());
    }
  }
  if (!has_regions(op.code) && !op.regions.empty()) return "op does not take regions";

  switch (opcode_kind(op.code)) {
    case OpKind::Function: {
      if (auto d = expect_counts(op, 0, 0, 1)) return d;
      const auto* sym = op.attr_as<std::string>("sym_name");
      const auto* fty = op.attr_as<FunctionTypeAttr>("function_type");
      if (!sym || sym->empty()) return "missing 'sym_name'";
      if (!fty) return "missing 'function_type'";
      const Region& r = op.regions[0];
      if (!r.isolated_from_above) return "function body must be isolated from above";
      if (r.blocks.size() != 1) return "function body must have exactly one block";
      if (types_of(m, r.entry().arguments) != fty->inputs) {
        return "entry block arguments do not match function inputs";
      }
      return std::nullopt;
    }
    case OpKind::Return:
    case OpKind::Yield:
      return expect_counts(op, op.operands.size(), 0);
    case OpKind::Call: {
      if (op.regions.size() != 0) return "func.call takes no regions";
      const auto* callee = op.attr_as<std::string>("callee");
      if (!callee || callee->empty()) return "missing 'callee'";
      return std::nullopt;
    }
    case OpKind::Condition:
      if (op.operands.empty() || m.type_of(op.operands[0]) != Type::integer(1)) {
        return "scf.condition needs a leading i1 operand";
      }
      return expect_counts(op, op.operands.size(), 0);
    case OpKind::If: {
      if (auto d = expect_counts(op, 1, op.results.size(), 2)) return d;
      if (m.type_of(op.operands[0]) != Type::integer(1)) return "condition must be i1";
      for (std::size_t i = 0; i < 2; ++i) {
        if (auto d = expect_single_block(op, i, {}, m)) return d;
      }
      return std::nullopt;
    }
    case OpKind::For: {
      if (auto d = expect_counts(op, 3, 0, 1)) return d;
      for (auto v : op.operands) {
        if (!m.type_of(v).is_index()) return "loop bounds must be index";
      }
      return expect_single_block(op, 0, {Type::index()}, m);
    }
    case OpKind::While: {
      if (auto d = expect_counts(op, op.operands.size(), op.results.size(), 2)) return d;
      if (auto d = expect_single_block(op, 0, types_of(m, op.operands), m)) return d;
      return expect_single_block(op, 1, types_of(m, op.results), m);
    }
    case OpKind::Constant:
      return check_constant(op, m);
    case OpKind::IntBinary:
      if (auto d = expect_counts(op, 2, 1)) return d;
      return all_same(m, op, &Type::is_int_like, "integer or index");
    case OpKind::FloatBinary:
      if (auto d = expect_counts(op, 2, 1)) return d;
      return all_same(m, op, &Type::is_float, "float");
    case OpKind::FloatUnary:
      if (auto d = expect_counts(op, 1, 1)) return d;
      return all_same(m, op, &Type::is_float, "float");
    case OpKind::FloatTernary:
      if (auto d = expect_counts(op, 3, 1)) return d;
      return all_same(m, op, &Type::is_float, "float");
    case OpKind::CmpI:
    case OpKind::CmpF: {
      if (auto d = expect_counts(op, 2, 1)) return d;
      const auto* pred = op.attr_as<std::string>("predicate");
      bool is_i = opcode_kind(op.code) == OpKind::CmpI;
      if (!pred || (is_i ? !parse_cmpi_predicate(*pred).has_value()
                         : !parse_cmpf_predicate(*pred).has_value())) {
        return "missing or invalid 'predicate'";
      }
      const Type& lhs = m.type_of(op.operands[0]);
      if (lhs != m.type_of(op.operands[1])) return "comparison operands differ in type";
      if (is_i ? !lhs.is_int_like() : !lhs.is_float()) return "bad comparison operand type";
      if (m.type_of(op.results[0]) != Type::integer(1)) return "comparison result must be i1";
      return std::nullopt;
    }
    case OpKind::Select: {
      if (auto d = expect_counts(op, 3, 1)) return d;
      if (m.type_of(op.operands[0]) != Type::integer(1)) return "selector must be i1";
      const Type& t = m.type_of(op.results[0]);
      if (!t.is_scalar() || m.type_of(op.operands[1]) != t || m.type_of(op.operands[2]) != t) {
        return "select arms must match the scalar result type";
      }
      return std::nullopt;
    }
    case OpKind::IntExt:
    case OpKind::IntTrunc:
    case OpKind::FloatExt:
    case OpKind::FloatTrunc:
    case OpKind::IntToFloat:
    case OpKind::FloatToInt:
    case OpKind::IndexCast:
    case OpKind::Bitcast:
      return check_cast(op, m);
    case OpKind::Alloc:
    case OpKind::Alloca:
      if (auto d = expect_counts(op, 0, 1)) return d;
      if (!m.type_of(op.results[0]).is_memref()) return "allocation must produce a memref";
      return std::nullopt;
    case OpKind::Load: {
      if (op.operands.empty() || op.results.size() != 1) return "malformed memref.load";
      const Type& mt = m.type_of(op.operands[0]);
      if (!mt.is_memref()) return "memref.load expects a memref operand";
      if (m.type_of(op.results[0]) != mt.element()) return "load result must be the element type";
      return check_indices(m, op, 1, mt);
    }
    case OpKind::Store: {
      if (op.operands.size() < 2 || !op.results.empty()) return "malformed memref.store";
      const Type& mt = m.type_of(op.operands[1]);
      if (!mt.is_memref()) return "memref.store expects a memref operand";
      if (m.type_of(op.operands[0]) != mt.element()) return "stored value must be the element type";
      return check_indices(m, op, 2, mt);
    }
    case OpKind::Dealloc:
      if (auto d = expect_counts(op, 1, 0)) return d;
      if (!m.type_of(op.operands[0]).is_memref()) return "memref.dealloc expects a memref";
      return std::nullopt;
    case OpKind::Copy:
      if (auto d = expect_counts(op, 2, 0)) return d;
      if (!m.type_of(op.operands[0]).is_memref() ||
          m.type_of(op.operands[0]) != m.type_of(op.operands[1])) {
        return "memref.copy expects two memrefs of identical type";
      }
      return std::nullopt;
    case OpKind::Custom:
      break;
  }
  return "unknown op";
}

}  // namespace

void register_op_schema(OpSchema schema) {
  if (opcode_for(schema.name) != OpCode::Custom) {
    throw IRError("cannot override built-in op '" + schema.name + "'");
  }
  auto name = schema.name;
  custom_schemas().insert_or_assign(std::move(name), std::move(schema));
}

void unregister_op_schema(std::string_view name) {
  auto& table = custom_schemas();
  auto it = table.find(name);
  if (it != table.end()) table.erase(it);
}

const OpSchema* find_custom_schema(std::string_view name) {
  const auto& table = custom_schemas();
  auto it = table.find(name);
  return it == table.end() ? nullptr : &it->second;
}

bool is_known_op(std::string_view name) {
  return opcode_for(name) != OpCode::Custom || find_custom_schema(name) != nullptr;
}

std::optional<std::string> check_signature(const Operation& op, const Module& module) {
  for (auto v : op.operands) {
    if (!module.is_valid(v)) return fmt::format("operand refers to a dead or unknown value");
  }
  if (op.code != OpCode::Custom) {
    if (op.name != opcode_name(op.code)) return "op name and code disagree";
    return check_builtin(op, module);
  }
  const OpSchema* schema = find_custom_schema(op.name);
  if (!schema) return fmt::format("unknown op '{}'", op.name);
  if (!op.regions.empty()) return "custom ops take no regions";
  return schema->check ? schema->check(op, module) : std::nullopt;
}

bool is_terminator(OpCode code) {
  auto k = opcode_kind(code);
  return k == OpKind::Return || k == OpKind::Yield || k == OpKind::Condition;
}

bool has_regions(OpCode code) {
  auto k = opcode_kind(code);
  return k == OpKind::Function || k == OpKind::If || k == OpKind::For || k == OpKind::While;
}

bool has_memory_effects(const Operation& op) {
  switch (opcode_kind(op.code)) {
    case OpKind::Store:
    case OpKind::Copy:
    case OpKind::Dealloc:
    case OpKind::Alloc:
    case OpKind::Alloca:
      return true;
    case OpKind::Custom: {
      const OpSchema* s = find_custom_schema(op.name);
      return s == nullptr || s->side_effects;
    }
    default:
      return false;
  }
}

}  // namespace irsmith
