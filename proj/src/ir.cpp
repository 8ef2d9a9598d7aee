#include "irsmith/ir.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "irsmith/numeric.hpp"
#include "irsmith/op_schema.hpp"

namespace irsmith {

const Attribute* Operation::attr(std::string_view key) const {
  for (const auto& a : attributes) {
    if (a.name == key) return &a.value;
  }
  return nullptr;
}

void Operation::set_attr(std::string key, Attribute value) {
  for (auto& a : attributes) {
    if (a.name == key) {
      a.value = std::move(value);
      return;
    }
  }
  attributes.push_back({std::move(key), std::move(value)});
}

ValueId Module::new_value(const Type& type, DefSite def) {
  values_.push_back(ValueInfo{type, def, true});
  return static_cast<ValueId>(values_.size() - 1);
}

void Module::truncate_values(std::size_t count) {
  if (count < values_.size()) values_.resize(count);
}

std::optional<std::size_t> Module::main_index() const {
  for (std::size_t i = 0; i < functions.size(); ++i) {
    if (const auto* s = functions[i].attr_as<std::string>("sym_name"); s && *s == "main") {
      return i;
    }
  }
  return std::nullopt;
}

const Operation* Module::find_function(std::string_view name) const {
  for (const auto& f : functions) {
    if (const auto* s = f.attr_as<std::string>("sym_name"); s && *s == name) return &f;
  }
  return nullptr;
}

Block make_block(Module& module, const std::vector<Type>& arg_types) {
  Block b;
  b.id = module.new_block_id();
  for (std::uint32_t i = 0; i < arg_types.size(); ++i) {
    b.arguments.push_back(
        module.new_value(arg_types[i], DefSite{DefSite::Kind::BlockArgument, b.id, i}));
  }
  return b;
}

Region make_region(Module& module, const std::vector<Type>& arg_types,
                   bool isolated_from_above) {
  Region r;
  r.isolated_from_above = isolated_from_above;
  r.blocks.push_back(make_block(module, arg_types));
  return r;
}

Operation make_op_unchecked(Module& module, OpBuild build) {
  Operation op;
  op.code = opcode_for(build.name);
  op.name = std::move(build.name);
  op.id = module.new_op_id();
  op.operands = std::move(build.operands);
  op.attributes = std::move(build.attributes);
  op.regions = std::move(build.regions);
  op.results.reserve(build.result_types.size());
  for (std::uint32_t i = 0; i < build.result_types.size(); ++i) {
    op.results.push_back(
        module.new_value(build.result_types[i], DefSite{DefSite::Kind::OpResult, op.id, i}));
  }
  return op;
}

Operation make_op(Module& module, OpBuild build) {
  std::string name = build.name;
  if (!is_known_op(name)) throw IRError("unknown op '" + name + "'");
  Operation op = make_op_unchecked(module, std::move(build));
  if (auto diag = check_signature(op, module)) {
    invalidate_values(module, op);
    throw IRError(fmt::format("signature mismatch for '{}': {}", name, *diag));
  }
  return op;
}

std::vector<ValueId> insert_op(Module& module, Block& block, std::size_t position,
                               OpBuild build) {
  if (position > block.ops.size()) {
    throw IRError(fmt::format("insertion position {} past block end ({})", position,
                              block.ops.size()));
  }
  for (auto v : build.operands) {
    if (!module.is_valid(v)) throw IRError(fmt::format("operand %{} does not exist", v));
  }
  Operation op = make_op(module, std::move(build));
  std::vector<ValueId> results = op.results;
  block.ops.insert(block.ops.begin() + static_cast<std::ptrdiff_t>(position), std::move(op));
  return results;
}

OpBuild int_constant(const Type& type, std::int64_t value) {
  OpBuild b;
  b.name = "arith.constant";
  b.result_types = {type};
  std::int64_t v = type.is_int() ? sign_extend(static_cast<std::uint64_t>(value), type.width()) : value;
  b.attributes.push_back({"value", IntegerAttr{v, type}});
  return b;
}

OpBuild float_constant_bits(const Type& type, std::uint64_t bits) {
  OpBuild b;
  b.name = "arith.constant";
  b.result_types = {type};
  b.attributes.push_back({"value", FloatAttr{bits, type}});
  return b;
}

OpBuild float_constant(const Type& type, double value) {
  return float_constant_bits(type, float_to_bits(value, type.width()));
}

Operation make_function(Module& module, std::string name, const std::vector<Type>& params,
                        const std::vector<Type>& results) {
  OpBuild b;
  b.name = "func.func";
  b.attributes.push_back({"sym_name", std::move(name)});
  b.attributes.push_back({"function_type", FunctionTypeAttr{params, results}});
  b.regions.push_back(make_region(module, params, /*isolated_from_above=*/true));
  return make_op(module, std::move(b));
}

void invalidate_values(Module& module, const Operation& op) {
  for (auto r : op.results) {
    if (r < module.num_values()) module.value(r).alive = false;
  }
  for (const auto& region : op.regions) {
    for (const auto& block : region.blocks) {
      for (auto a : block.arguments) {
        if (a < module.num_values()) module.value(a).alive = false;
      }
      for (const auto& inner : block.ops) invalidate_values(module, inner);
    }
  }
}

namespace {

void collect_defs(const Operation& op, std::unordered_set<ValueId>& out) {
  out.insert(op.results.begin(), op.results.end());
  for (const auto& region : op.regions) {
    for (const auto& block : region.blocks) {
      out.insert(block.arguments.begin(), block.arguments.end());
      for (const auto& inner : block.ops) collect_defs(inner, out);
    }
  }
}

const Operation* find_user(const Operation& op, const std::unordered_set<ValueId>& defs) {
  for (auto v : op.operands) {
    if (defs.contains(v)) return &op;
  }
  for (const auto& region : op.regions) {
    for (const auto& block : region.blocks) {
      for (const auto& inner : block.ops) {
        if (const auto* u = find_user(inner, defs)) return u;
      }
    }
  }
  return nullptr;
}

}  // namespace

std::size_t erase_ops_from(Module& module, Block& block, std::size_t position) {
  if (position >= block.ops.size()) return 0;
  std::unordered_set<ValueId> erased;
  for (std::size_t i = position; i < block.ops.size(); ++i) collect_defs(block.ops[i], erased);

  if (!erased.empty()) {
    auto report = [&](const Operation& user) {
      throw IRError(fmt::format("cannot erase: '{}' (op #{}) still uses an erased value",
                                user.name, user.id));
    };
    for (std::size_t i = 0; i < position; ++i) {
      if (const auto* u = find_user(block.ops[i], erased)) report(*u);
    }
    for (const auto& f : module.functions) {
      // The block may live inside this function; its erased suffix must not
      // be mistaken for a surviving user.
      std::vector<const Operation*> stack{&f};
      while (!stack.empty()) {
        const Operation* op = stack.back();
        stack.pop_back();
        for (auto v : op->operands) {
          if (erased.contains(v)) report(*op);
        }
        for (const auto& region : op->regions) {
          for (const auto& b : region.blocks) {
            std::size_t limit = &b == &block ? position : b.ops.size();
            for (std::size_t i = 0; i < limit; ++i) stack.push_back(&b.ops[i]);
          }
        }
      }
    }
  }

  std::size_t count = block.ops.size() - position;
  for (std::size_t i = position; i < block.ops.size(); ++i) {
    invalidate_values(module, block.ops[i]);
  }
  block.ops.erase(block.ops.begin() + static_cast<std::ptrdiff_t>(position), block.ops.end());
  return count;
}

void walk_ops(const Operation& op, const std::function<void(const Operation&)>& fn) {
  fn(op);
  for (const auto& region : op.regions) {
    for (const auto& block : region.blocks) walk_ops(block, fn);
  }
}

void walk_ops(const Block& block, const std::function<void(const Operation&)>& fn) {
  for (const auto& op : block.ops) walk_ops(op, fn);
}

void walk_module(const Module& module, const std::function<void(const Operation&)>& fn) {
  for (const auto& f : module.functions) walk_ops(f, fn);
}

std::vector<std::uint32_t> count_uses(const Module& module) {
  std::vector<std::uint32_t> uses(module.num_values(), 0);
  walk_module(module, [&](const Operation& op) {
    for (auto v : op.operands) {
      if (v < uses.size()) ++uses[v];
    }
  });
  return uses;
}

void replace_all_uses(Operation& root, ValueId from, ValueId to) {
  for (auto& v : root.operands) {
    if (v == from) v = to;
  }
  for (auto& region : root.regions) {
    for (auto& block : region.blocks) {
      for (auto& op : block.ops) replace_all_uses(op, from, to);
    }
  }
}

const FunctionTypeAttr& function_type(const Operation& func) {
  const auto* fty = func.attr_as<FunctionTypeAttr>("function_type");
  if (!fty) throw IRError("func.func without function_type");
  return *fty;
}

const std::string& symbol_name(const Operation& func) {
  const auto* s = func.attr_as<std::string>("sym_name");
  if (!s) throw IRError("func.func without sym_name");
  return *s;
}

namespace {

class StructuralComparer {
 public:
  StructuralComparer(const Module& a, const Module& b, std::string* why)
      : a_(a), b_(b), why_(why) {}

  bool modules() {
    if (a_.functions.size() != b_.functions.size()) {
      return fail(fmt::format("function count {} vs {}", a_.functions.size(),
                              b_.functions.size()));
    }
    for (std::size_t i = 0; i < a_.functions.size(); ++i) {
      if (!op(a_.functions[i], b_.functions[i])) return false;
    }
    return true;
  }

 private:
  bool fail(std::string msg) {
    if (why_) *why_ = std::move(msg);
    return false;
  }

  bool bind(ValueId x, ValueId y) {
    if (a_.type_of(x) != b_.type_of(y)) {
      return fail(fmt::format("type {} vs {}", a_.type_of(x).str(), b_.type_of(y).str()));
    }
    auto [it, fresh] = map_.emplace(x, y);
    if (!fresh && it->second != y) return fail("inconsistent value renaming");
    auto [rit, rfresh] = reverse_.emplace(y, x);
    if (!rfresh && rit->second != x) return fail("inconsistent value renaming");
    return true;
  }

  bool use(ValueId x, ValueId y) {
    auto it = map_.find(x);
    if (it == map_.end() || it->second != y) return fail("operand mismatch");
    return true;
  }

  bool op(const Operation& x, const Operation& y) {
    if (x.name != y.name) return fail(fmt::format("op {} vs {}", x.name, y.name));
    if (x.attributes.size() != y.attributes.size()) {
      return fail(fmt::format("attribute count differs on {}", x.name));
    }
    for (const auto& attr : x.attributes) {
      const Attribute* other = y.attr(attr.name);
      if (!other || !(*other == attr.value)) {
        return fail(fmt::format("attribute '{}' differs on {}", attr.name, x.name));
      }
    }
    if (x.operands.size() != y.operands.size()) return fail("operand count differs");
    for (std::size_t i = 0; i < x.operands.size(); ++i) {
      if (!use(x.operands[i], y.operands[i])) return false;
    }
    if (x.regions.size() != y.regions.size()) return fail("region count differs");
    for (std::size_t r = 0; r < x.regions.size(); ++r) {
      const Region& rx = x.regions[r];
      const Region& ry = y.regions[r];
      if (rx.isolated_from_above != ry.isolated_from_above) return fail("isolation differs");
      if (rx.blocks.size() != ry.blocks.size()) return fail("block count differs");
      for (std::size_t b = 0; b < rx.blocks.size(); ++b) {
        if (!block(rx.blocks[b], ry.blocks[b])) return false;
      }
    }
    if (x.results.size() != y.results.size()) return fail("result count differs");
    for (std::size_t i = 0; i < x.results.size(); ++i) {
      if (!bind(x.results[i], y.results[i])) return false;
    }
    return true;
  }

  bool block(const Block& x, const Block& y) {
    if (x.arguments.size() != y.arguments.size()) return fail("block argument count differs");
    for (std::size_t i = 0; i < x.arguments.size(); ++i) {
      if (!bind(x.arguments[i], y.arguments[i])) return false;
    }
    if (x.ops.size() != y.ops.size()) {
      return fail(fmt::format("block length {} vs {}", x.ops.size(), y.ops.size()));
    }
    for (std::size_t i = 0; i < x.ops.size(); ++i) {
      if (!op(x.ops[i], y.ops[i])) return false;
    }
    return true;
  }

  const Module& a_;
  const Module& b_;
  std::string* why_;
  std::unordered_map<ValueId, ValueId> map_;
  std::unordered_map<ValueId, ValueId> reverse_;
};

std::size_t depth_of(const Operation& op, std::size_t depth) {
  std::size_t best = depth;
  for (const auto& region : op.regions) {
    for (const auto& block : region.blocks) {
      for (const auto& inner : block.ops) best = std::max(best, depth_of(inner, depth + 1));
      best = std::max(best, depth + 1);
    }
  }
  return best;
}

}  // namespace

bool structurally_equal(const Module& a, const Module& b, std::string* why) {
  return StructuralComparer(a, b, why).modules();
}

std::size_t max_region_depth(const Module& module) {
  std::size_t best = 0;
  for (const auto& f : module.functions) best = std::max(best, depth_of(f, 0));
  return best;
}

}  // namespace irsmith
