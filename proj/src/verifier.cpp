#include "irsmith/verifier.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <unordered_map>

#include "irsmith/op_schema.hpp"

namespace irsmith {

std::string VerificationReport::str() const {
  std::string out;
  for (const auto& v : violations) {
    out += fmt::format("{}: {}: {}\n", v.path, v.kind, v.message);
  }
  return out;
}

bool VerificationReport::has(std::string_view kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.kind == kind; });
}

namespace {

constexpr std::uint32_t kNoOwner = UINT32_MAX;

struct BlockContext {
  // Enclosing op of the region this block belongs to; nullptr for a function body.
  const Operation* parent = nullptr;
  std::size_t region_index = 0;
  const Operation* function = nullptr;
};

class Verifier {
 public:
  explicit Verifier(const Module& m)
      : m_(m), visible_(m.num_values(), 0), owner_(m.num_values(), kNoOwner) {}

  VerificationReport run() {
    collect_owners();
    check_symbols();
    for (std::uint32_t i = 0; i < m_.functions.size(); ++i) {
      current_fn_ = i;
      const Operation& f = m_.functions[i];
      path_.clear();
      const auto* sym = f.attr_as<std::string>("sym_name");
      path_.push_back("@" + (sym ? *sym : std::string("?")));
      if (f.code != OpCode::FuncFunc) {
        add("structure", fmt::format("top-level op '{}' is not func.func", f.name));
        continue;
      }
      if (auto d = check_signature(f, m_)) {
        add("signature", *d);
        continue;
      }
      verify_block(f.regions[0].entry(), BlockContext{nullptr, 0, &f});
    }
    path_.assign(1, "@module");
    check_call_graph();
    return std::move(report_);
  }

 private:
  void add(std::string kind, std::string message) {
    std::string path;
    for (std::size_t i = 0; i < path_.size(); ++i) {
      if (i) path += "/";
      path += path_[i];
    }
    report_.violations.push_back({std::move(kind), std::move(path), std::move(message)});
  }

  void record_owner(ValueId v, std::uint32_t fn) {
    if (v >= owner_.size()) return;
    if (owner_[v] != kNoOwner) {
      duplicate_defs_.push_back(v);
      return;
    }
    owner_[v] = fn;
  }

  void collect_owners() {
    for (std::uint32_t i = 0; i < m_.functions.size(); ++i) {
      walk_ops(m_.functions[i], [&](const Operation& op) {
        for (auto r : op.results) {
          if (op.code != OpCode::FuncFunc) record_owner(r, i);
        }
        for (const auto& region : op.regions) {
          for (const auto& b : region.blocks) {
            for (auto a : b.arguments) record_owner(a, i);
          }
        }
      });
    }
    path_.assign(1, "@module");
    for (auto v : duplicate_defs_) add("ssa", fmt::format("value {} defined more than once", v));
  }

  void check_symbols() {
    path_.assign(1, "@module");
    std::map<std::string, int> seen;
    for (const auto& f : m_.functions) {
      if (const auto* s = f.attr_as<std::string>("sym_name")) ++seen[*s];
    }
    for (const auto& [name, count] : seen) {
      if (count > 1) add("symbol", fmt::format("function @{} defined {} times", name, count));
    }
    const Operation* main = m_.find_function("main");
    if (!main) {
      add("main", "module has no @main");
      return;
    }
    const auto* fty = main->attr_as<FunctionTypeAttr>("function_type");
    if (!fty || !fty->inputs.empty() || fty->results != std::vector<Type>{Type::integer(32)}) {
      add("main", "@main must take no arguments and return i32");
    }
  }

  void check_call_graph() {
    std::map<std::string, std::size_t, std::less<>> index;
    for (std::size_t i = 0; i < m_.functions.size(); ++i) {
      if (const auto* s = m_.functions[i].attr_as<std::string>("sym_name")) index[*s] = i;
    }
    std::vector<std::vector<std::size_t>> edges(m_.functions.size());
    for (std::size_t i = 0; i < m_.functions.size(); ++i) {
      walk_ops(m_.functions[i], [&](const Operation& op) {
        if (op.code != OpCode::FuncCall) return;
        const auto* callee = op.attr_as<std::string>("callee");
        if (!callee) return;
        if (auto it = index.find(*callee); it != index.end()) edges[i].push_back(it->second);
      });
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    std::vector<int> state(m_.functions.size(), 0);
    bool cyclic = false;
    std::function<void(std::size_t)> dfs = [&](std::size_t n) {
      state[n] = 1;
      for (auto next : edges[n]) {
        if (state[next] == 1) cyclic = true;
        if (state[next] == 0) dfs(next);
      }
      state[n] = 2;
    };
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (state[i] == 0) dfs(i);
    }
    if (cyclic) add("recursion", "call graph contains a cycle");
  }

  void check_operand(ValueId v) {
    if (!m_.is_valid(v)) {
      add("dangling", fmt::format("operand refers to unknown or erased value {}", v));
      return;
    }
    if (visible_[v]) return;
    if (owner_[v] != kNoOwner && owner_[v] != current_fn_) {
      add("isolation", fmt::format("value {} crosses an isolated_from_above boundary", v));
    } else {
      add("dominance", fmt::format("value {} does not dominate its use", v));
    }
  }

  std::vector<Type> types(const std::vector<ValueId>& vs) const {
    std::vector<Type> out;
    for (auto v : vs) out.push_back(m_.is_valid(v) ? m_.type_of(v) : Type());
    return out;
  }

  static std::string type_list(const std::vector<Type>& ts) {
    std::string s = "(";
    for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? ", " : "") + ts[i].str();
    return s + ")";
  }

  void expect_types(std::string_view what, const std::vector<Type>& got,
                    const std::vector<Type>& want, std::string kind) {
    if (got != want) {
      add(std::move(kind),
          fmt::format("{} types {} do not match {}", what, type_list(got), type_list(want)));
    }
  }

  OpCode expected_terminator(const BlockContext& ctx) const {
    if (!ctx.parent) return OpCode::FuncReturn;
    if (ctx.parent->code == OpCode::ScfWhile && ctx.region_index == 0) {
      return OpCode::ScfCondition;
    }
    return OpCode::ScfYield;
  }

  void check_terminator(const Operation& term, const BlockContext& ctx) {
    std::vector<ValueId> forwarded = term.operands;
    switch (term.code) {
      case OpCode::FuncReturn:
        expect_types("func.return operand", types(forwarded),
                     function_type(*ctx.function).results, "return type");
        break;
      case OpCode::ScfYield: {
        const Operation& p = *ctx.parent;
        std::vector<Type> want;
        if (p.code == OpCode::ScfIf) want = types(p.results);
        if (p.code == OpCode::ScfWhile) want = types(p.operands);
        expect_types("scf.yield operand", types(forwarded), want, "yield type");
        break;
      }
      case OpCode::ScfCondition:
        if (!forwarded.empty()) forwarded.erase(forwarded.begin());
        expect_types("scf.condition forwarded", types(forwarded), types(ctx.parent->results),
                     "yield type");
        break;
      default:
        break;
    }
    for (auto v : term.operands) {
      if (term.code != OpCode::FuncReturn && m_.is_valid(v) && m_.type_of(v).is_memref()) {
        add("memref escape", "memref values may not leave a region");
      }
    }
  }

  void check_call(const Operation& op) {
    const auto* callee = op.attr_as<std::string>("callee");
    if (!callee) return;
    const Operation* f = m_.find_function(*callee);
    if (!f) {
      add("call", fmt::format("callee @{} does not exist", *callee));
      return;
    }
    const auto& fty = function_type(*f);
    expect_types("call operand", types(op.operands), fty.inputs, "call");
    expect_types("call result", types(op.results), fty.results, "call");
  }

  void check_constant_indices(const Operation& op) {
    std::size_t memref_pos = op.code == OpCode::Load ? 0 : 1;
    std::size_t first = memref_pos + 1;
    const Type& mt = m_.type_of(op.operands[memref_pos]);
    for (std::size_t d = 0; d < mt.rank() && first + d < op.operands.size(); ++d) {
      auto it = constants_.find(op.operands[first + d]);
      if (it == constants_.end()) continue;
      if (it->second < 0 || it->second >= mt.shape()[d]) {
        add("index out of bounds",
            fmt::format("constant index {} outside [0, {}) in dimension {}", it->second,
                        mt.shape()[d], d));
      }
    }
  }

  void define(ValueId v, std::vector<ValueId>& log) {
    if (v < visible_.size() && !visible_[v]) {
      visible_[v] = 1;
      log.push_back(v);
    }
  }

  void verify_block(const Block& block, const BlockContext& ctx) {
    std::vector<ValueId> log;
    for (auto a : block.arguments) {
      if (!m_.is_valid(a)) {
        add("dangling", "block argument refers to an erased value");
        continue;
      }
      if (!m_.type_of(a).well_formed()) add("type", "malformed block argument type");
      define(a, log);
    }

    if (block.ops.empty() || !is_terminator(block.ops.back().code)) {
      add("terminator", "block does not end in a terminator");
    }

    for (std::size_t i = 0; i < block.ops.size(); ++i) {
      const Operation& op = block.ops[i];
      path_.push_back(fmt::format("{}:{}", i, op.name));
      for (auto v : op.operands) check_operand(v);

      bool operands_ok = std::all_of(op.operands.begin(), op.operands.end(),
                                     [&](ValueId v) { return m_.is_valid(v); });
      if (!is_known_op(op.name)) {
        add("unknown op", fmt::format("'{}' is not a registered op", op.name));
      } else if (op.code == OpCode::FuncFunc) {
        add("structure", "func.func is only allowed at module level");
      } else if (operands_ok) {
        if (auto d = check_signature(op, m_)) add("signature", *d);
        else check_context(op, i + 1 == block.ops.size(), ctx);
      }

      for (std::size_t r = 0; r < op.regions.size(); ++r) {
        const Region& region = op.regions[r];
        if (region.blocks.size() != 1) continue;  // reported by the signature check
        path_.push_back(fmt::format("r{}", r));
        verify_block(region.entry(), BlockContext{&op, r, ctx.function});
        path_.pop_back();
      }

      if (op.code == OpCode::Constant) {
        if (const auto* ia = op.attr_as<IntegerAttr>("value"); ia && !op.results.empty()) {
          constants_[op.results[0]] = ia->value;
        }
      }
      for (auto r : op.results) {
        if (m_.is_valid(r)) define(r, log);
        else add("dangling", "op result refers to an erased value");
      }
      path_.pop_back();
    }

    for (auto v : log) visible_[v] = 0;
  }

  void check_context(const Operation& op, bool last, const BlockContext& ctx) {
    if (is_terminator(op.code)) {
      if (!last) {
        add("terminator", "terminator is not the last op of its block");
      } else if (op.code != expected_terminator(ctx)) {
        add("terminator", fmt::format("expected {} to end this block",
                                      opcode_name(expected_terminator(ctx))));
      } else {
        check_terminator(op, ctx);
      }
    } else if (last) {
      add("terminator", "block does not end in a terminator");
    }
    if (op.code == OpCode::FuncCall) check_call(op);
    if (op.code == OpCode::Load || op.code == OpCode::Store) check_constant_indices(op);
    if ((op.code == OpCode::ScfIf || op.code == OpCode::ScfWhile)) {
      for (auto r : op.results) {
        if (m_.type_of(r).is_memref()) add("memref escape", "memref values may not leave a region");
      }
    }
  }

  const Module& m_;
  VerificationReport report_;
  std::vector<std::uint8_t> visible_;
  std::vector<std::uint32_t> owner_;
  std::vector<ValueId> duplicate_defs_;
  std::unordered_map<ValueId, std::int64_t> constants_;
  std::vector<std::string> path_;
  std::uint32_t current_fn_ = 0;
};

}  // namespace

VerificationReport verify(const Module& module) { return Verifier(module).run(); }

}  // namespace irsmith
