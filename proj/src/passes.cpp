#include "irsmith/passes.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "irsmith/interpreter.hpp"
#include "irsmith/numeric.hpp"
#include "irsmith/op_schema.hpp"
#include "irsmith/verifier.hpp"

namespace irsmith {

namespace {

// Known constant slot per value.
struct ConstantTable {
  std::vector<std::uint8_t> known;
  std::vector<std::uint64_t> value;

  explicit ConstantTable(const Module& m) : known(m.num_values(), 0), value(m.num_values(), 0) {
    walk_module(m, [&](const Operation& op) {
      if (op.code == OpCode::Constant) set(op.results.at(0), constant_slot(op));
    });
  }
  bool has(ValueId v) const { return v < known.size() && known[v]; }
  void set(ValueId v, std::uint64_t slot) {
    known[v] = 1;
    value[v] = slot;
  }
};

void uncount(const Operation& op, std::vector<std::uint32_t>& uses) {
  walk_ops(op, [&](const Operation& o) {
    for (ValueId v : o.operands) {
      if (v < uses.size() && uses[v] > 0) --uses[v];
    }
  });
}

std::size_t count_ops(const Operation& op) {
  std::size_t n = 0;
  walk_ops(op, [&](const Operation&) { ++n; });
  return n;
}

class Purity {
 public:
  Purity(const Module& m, const ConstantTable& constants) : constants_(constants) {
    // Calls are acyclic, so iterating to a fixpoint settles every function.
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Operation& f : m.functions) {
        const std::string& name = symbol_name(f);
        if (pure_fns_.contains(name)) continue;
        bool pure = true;
        for (const Block& b : f.regions.at(0).blocks) {
          for (const Operation& op : b.ops) {
            if (!op_pure(op)) pure = false;
          }
        }
        if (pure) {
          pure_fns_.insert(name);
          changed = true;
        }
      }
    }
  }

  /// No memory effects, no scf.while, no impure calls and loops that are
  /// certain to terminate, recursively.
  bool op_pure(const Operation& op) const {
    bool pure = true;
    walk_ops(op, [&](const Operation& o) {
      if (!pure) return;
      switch (opcode_kind(o.code)) {
        case OpKind::While:
          pure = false;
          break;
        case OpKind::Call: {
          const auto* callee = o.attr_as<std::string>("callee");
          pure = callee && pure_fns_.contains(*callee);
          break;
        }
        case OpKind::For:
          pure = step_positive(o);
          break;
        default:
          if (has_memory_effects(o)) pure = false;
      }
    });
    return pure;
  }

  bool callee_pure(const Operation& call) const {
    const auto* callee = call.attr_as<std::string>("callee");
    return callee && pure_fns_.contains(*callee);
  }

 private:
  bool step_positive(const Operation& loop) const {
    const ValueId step = loop.operands.at(2);
    return constants_.has(step) && static_cast<std::int64_t>(constants_.value[step]) > 0;
  }

  const ConstantTable& constants_;
  std::unordered_set<std::string> pure_fns_;
};

class Dce {
 public:
  explicit Dce(Module& m) : m_(m) {}

  std::size_t run() {
    std::size_t total = 0;
    for (;;) {
      uses_ = count_uses(m_);
      ConstantTable constants(m_);
      Purity purity(m_, constants);
      purity_ = &purity;
      std::size_t removed = 0;
      for (Operation& f : m_.functions) {
        for (Block& b : f.regions.at(0).blocks) removed += sweep(b);
      }
      total += removed;
      if (removed == 0) return total;
    }
  }

 private:
  bool unused(const Operation& op) const {
    return std::all_of(op.results.begin(), op.results.end(),
                       [&](ValueId r) { return uses_[r] == 0; });
  }

  bool removable(const Operation& op) const {
    switch (opcode_kind(op.code)) {
      case OpKind::Function:
      case OpKind::Return:
      case OpKind::Yield:
      case OpKind::Condition:
      case OpKind::While:
        return false;
      case OpKind::Call:
        return purity_->callee_pure(op);
      case OpKind::If:
      case OpKind::For:
        return purity_->op_pure(op);
      default:
        return !has_memory_effects(op);
    }
  }

  std::size_t sweep(Block& block) {
    std::size_t removed = 0;
    std::vector<std::uint8_t> dead(block.ops.size(), 0);
    for (std::size_t i = block.ops.size(); i-- > 0;) {
      Operation& op = block.ops[i];
      if (unused(op) && removable(op)) {
        dead[i] = 1;
        removed += count_ops(op);
        uncount(op, uses_);
        invalidate_values(m_, op);
        continue;
      }
      for (Region& r : op.regions) {
        for (Block& b : r.blocks) removed += sweep(b);
      }
    }
    if (removed) {
      std::size_t i = 0;
      std::erase_if(block.ops, [&](const Operation&) { return dead[i++] != 0; });
    }
    return removed;
  }

  Module& m_;
  std::vector<std::uint32_t> uses_;
  const Purity* purity_ = nullptr;
};

Attribute constant_attr(const Type& t, std::uint64_t slot) {
  if (t.is_float()) return FloatAttr{slot, t};
  if (t.is_index()) return IntegerAttr{static_cast<std::int64_t>(slot), t};
  return IntegerAttr{sign_extend(slot, t.width()), t};
}

class Folder {
 public:
  explicit Folder(Module& m) : m_(m), constants_(m), subst_(m.num_values()) {
    for (ValueId v = 0; v < subst_.size(); ++v) subst_[v] = v;
  }

  std::size_t run() {
    for (Operation& f : m_.functions) {
      for (Block& b : f.regions.at(0).blocks) fold_block(b);
    }
    return rewritten_;
  }

 private:
  ValueId resolve(ValueId v) {
    ValueId root = v;
    while (subst_[root] != root) root = subst_[root];
    while (subst_[v] != root) {
      const ValueId next = subst_[v];
      subst_[v] = root;
      v = next;
    }
    return root;
  }

  void fold_block(Block& block) {
    for (std::size_t i = 0; i < block.ops.size();) {
      Operation& op = block.ops[i];
      for (ValueId& v : op.operands) v = resolve(v);
      if (op.code == OpCode::ScfIf && constants_.has(op.operands[0])) {
        inline_if(block, i);
        continue;
      }
      fold_op(op);
      for (Region& r : op.regions) {
        for (Block& b : r.blocks) fold_block(b);
      }
      ++i;
    }
  }

  void fold_op(Operation& op) {
    if (op.code == OpCode::Constant) return;
    if (op.code == OpCode::Select) {
      const ValueId c = op.operands[0];
      if (constants_.has(c) || op.operands[1] == op.operands[2]) {
        const bool take_true = !constants_.has(c) || (constants_.value[c] & 1);
        subst_[op.results[0]] = op.operands[take_true ? 1 : 2];
        ++rewritten_;
        return;
      }
    }
    if (op.operands.empty() || op.results.size() != 1) return;
    for (ValueId v : op.operands) {
      if (!constants_.has(v)) return;
    }
    auto scalar = decode_scalar(op, m_);
    if (!scalar) return;
    std::uint64_t args[3] = {0, 0, 0};
    for (std::size_t k = 0; k < op.operands.size() && k < 3; ++k) {
      args[k] = constants_.value[op.operands[k]];
    }
    std::uint64_t out = 0;
    // Ops that would trap are left for the program to execute.
    if (eval_scalar(*scalar, args, out)) return;
    const Type& t = m_.type_of(op.results[0]);
    op.code = OpCode::Constant;
    op.name = "arith.constant";
    op.operands.clear();
    op.attributes.clear();
    op.attributes.push_back({"value", constant_attr(t, out)});
    constants_.set(op.results[0], out);
    ++rewritten_;
  }

  // Replaces block.ops[i] (an scf.if with a constant condition) by the body
  // of the region it would execute.
  void inline_if(Block& block, std::size_t i) {
    Operation& op = block.ops[i];
    const bool take_then = constants_.value[op.operands[0]] & 1;
    Block& chosen = op.regions[take_then ? 0 : 1].entry();
    const Operation& yield = chosen.ops.back();
    for (std::size_t k = 0; k < op.results.size(); ++k) {
      subst_[op.results[k]] = yield.operands[k];
    }
    std::vector<Operation> body(std::make_move_iterator(chosen.ops.begin()),
                                std::make_move_iterator(chosen.ops.end() - 1));
    chosen.ops.erase(chosen.ops.begin(), chosen.ops.end() - 1);
    invalidate_values(m_, op);
    block.ops.erase(block.ops.begin() + static_cast<std::ptrdiff_t>(i));
    block.ops.insert(block.ops.begin() + static_cast<std::ptrdiff_t>(i),
                     std::make_move_iterator(body.begin()), std::make_move_iterator(body.end()));
    ++rewritten_;
  }

  Module& m_;
  ConstantTable constants_;
  std::vector<ValueId> subst_;
  std::size_t rewritten_ = 0;
};

// Removes every op whose address is in `doomed`, at any depth.
std::size_t erase_marked(Module& m, Block& block,
                         const std::unordered_set<const Operation*>& doomed) {
  std::size_t removed = 0;
  std::vector<std::uint8_t> dead(block.ops.size(), 0);
  for (std::size_t i = 0; i < block.ops.size(); ++i) {
    Operation& op = block.ops[i];
    if (doomed.contains(&op)) {
      dead[i] = 1;
      removed += count_ops(op);
      invalidate_values(m, op);
      continue;
    }
    for (Region& r : op.regions) {
      for (Block& b : r.blocks) removed += erase_marked(m, b, doomed);
    }
  }
  if (removed) {
    std::size_t i = 0;
    std::erase_if(block.ops, [&](const Operation&) { return dead[i++] != 0; });
  }
  return removed;
}

std::size_t eliminate_dead_allocs_once(Module& m) {
  const auto uses = count_uses(m);
  struct Use {
    const Operation* op;
    std::size_t operand;
  };
  std::unordered_map<ValueId, std::vector<Use>> users;
  std::vector<const Operation*> allocs;
  walk_module(m, [&](const Operation& op) {
    const OpKind k = opcode_kind(op.code);
    if (k == OpKind::Alloc || k == OpKind::Alloca) allocs.push_back(&op);
    for (std::size_t i = 0; i < op.operands.size(); ++i) {
      if (m.type_of(op.operands[i]).is_memref()) users[op.operands[i]].push_back({&op, i});
    }
  });

  std::unordered_set<const Operation*> doomed;
  for (const Operation* alloc : allocs) {
    const ValueId mem = alloc->results.at(0);
    bool dead = true;
    for (const Use& u : users[mem]) {
      const Operation& op = *u.op;
      switch (opcode_kind(op.code)) {
        case OpKind::Store:
          dead = u.operand == 1;
          break;
        case OpKind::Load:
          dead = uses[op.results.at(0)] == 0;
          break;
        case OpKind::Dealloc:
          break;
        case OpKind::Copy:
          dead = u.operand == 1 && op.operands[0] != mem;
          break;
        default:
          dead = false;
      }
      if (!dead) break;
    }
    if (!dead) continue;
    doomed.insert(alloc);
    for (const Use& u : users[mem]) doomed.insert(u.op);
  }
  if (doomed.empty()) return 0;
  std::size_t removed = 0;
  for (Operation& f : m.functions) {
    for (Block& b : f.regions.at(0).blocks) removed += erase_marked(m, b, doomed);
  }
  return removed;
}

}  // namespace

PassStats dce(Module& module) {
  PassStats s{"dce", 0, 0};
  s.ops_removed = Dce(module).run();
  return s;
}

PassStats const_fold(Module& module) {
  PassStats s{"const_fold", 0, 0};
  for (;;) {
    const std::size_t rewritten = Folder(module).run();
    s.ops_rewritten += rewritten;
    s.ops_removed += Dce(module).run();
    if (rewritten == 0) return s;
  }
}

PassStats dead_alloc_elim(Module& module) {
  PassStats s{"dead_alloc_elim", 0, 0};
  for (;;) {
    const std::size_t removed = eliminate_dead_allocs_once(module);
    s.ops_removed += removed;
    const std::size_t cleaned = Dce(module).run();
    s.ops_removed += cleaned;
    if (removed == 0) return s;
  }
}

const std::vector<std::string>& pass_names() {
  static const std::vector<std::string> names{"const_fold", "dce", "dead_alloc_elim"};
  return names;
}

PassStats run_pass(Module& module, std::string_view name) {
  if (name == "const_fold") return const_fold(module);
  if (name == "dce") return dce(module);
  if (name == "dead_alloc_elim") return dead_alloc_elim(module);
  throw PassError(fmt::format("unknown pass '{}'", name));
}

std::vector<PassStats> run_pipeline(Module& module, const std::vector<std::string>& passes) {
  std::vector<PassStats> out;
  for (const auto& name : passes) {
    out.push_back(run_pass(module, name));
    auto report = verify(module);
    if (!report.ok()) {
      throw PassError(
          fmt::format("pass '{}' produced an invalid module:\n{}", name, report.str()));
    }
  }
  return out;
}

std::size_t liveness_metric(const Module& module) {
  std::size_t n = 0;
  walk_module(module, [&](const Operation& op) {
    switch (opcode_kind(op.code)) {
      case OpKind::Alloc:
      case OpKind::Alloca:
      case OpKind::Load:
      case OpKind::Store:
      case OpKind::Dealloc:
      case OpKind::Copy:
      case OpKind::Call:
        ++n;
        break;
      default:
        break;
    }
  });
  return n;
}

}  // namespace irsmith
