#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "irsmith/op_code.hpp"
#include "irsmith/type.hpp"

namespace irsmith {

using ValueId = std::uint32_t;
using OpId = std::uint32_t;
using BlockId = std::uint32_t;

/// Structural misuse of the IR API (signature mismatch, dangling use, ...).
class IRError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Attributes
// ---------------------------------------------------------------------------

/// Two's-complement integer literal, stored sign-extended from the type width.
struct IntegerAttr {
  std::int64_t value = 0;
  Type type;
  friend bool operator==(const IntegerAttr&, const IntegerAttr&) = default;
};

/// Float literal stored as the raw bit pattern of its own type, so NaN
/// payloads and f16 values survive untouched.
struct FloatAttr {
  std::uint64_t bits = 0;
  Type type;
  friend bool operator==(const FloatAttr&, const FloatAttr&) = default;
};

struct TypeAttr {
  Type type;
  friend bool operator==(const TypeAttr&, const TypeAttr&) = default;
};

struct FunctionTypeAttr {
  std::vector<Type> inputs;
  std::vector<Type> results;
  friend bool operator==(const FunctionTypeAttr&, const FunctionTypeAttr&) = default;
};

using Attribute =
    std::variant<IntegerAttr, FloatAttr, TypeAttr, FunctionTypeAttr, std::string>;

struct NamedAttribute {
  std::string name;
  Attribute value;
  friend bool operator==(const NamedAttribute&, const NamedAttribute&) = default;
};

// ---------------------------------------------------------------------------
// Program tree
// ---------------------------------------------------------------------------

struct DefSite {
  enum class Kind : std::uint8_t { OpResult, BlockArgument };
  Kind kind = Kind::OpResult;
  std::uint32_t owner = 0;  // OpId or BlockId
  std::uint32_t index = 0;
};

struct ValueInfo {
  Type type;
  DefSite def;
  bool alive = true;
};

struct Region;
struct Operation;

struct Block {
  BlockId id = 0;
  std::vector<ValueId> arguments;
  std::vector<Operation> ops;
};

struct Region {
  std::vector<Block> blocks;
  bool isolated_from_above = false;

  Block& entry() { return blocks.front(); }
  const Block& entry() const { return blocks.front(); }
};

struct Operation {
  OpCode code = OpCode::Custom;
  std::string name;
  OpId id = 0;
  std::vector<ValueId> operands;
  std::vector<ValueId> results;
  std::vector<NamedAttribute> attributes;
  std::vector<Region> regions;

  const Attribute* attr(std::string_view key) const;
  void set_attr(std::string key, Attribute value);

  template <typename T>
  const T* attr_as(std::string_view key) const {
    const Attribute* a = attr(key);
    return a ? std::get_if<T>(a) : nullptr;
  }
};

/// Everything needed to create an operation; results are minted on insertion.
struct OpBuild {
  std::string name;
  std::vector<ValueId> operands;
  std::vector<Type> result_types;
  std::vector<NamedAttribute> attributes;
  std::vector<Region> regions;
};

/// A module: an ordered list of `func.func` operations plus the value table
/// every ValueId indexes into. Plain value type; copying deep-copies.
class Module {
 public:
  std::vector<Operation> functions;

  const ValueInfo& value(ValueId v) const { return values_.at(v); }
  ValueInfo& value(ValueId v) { return values_.at(v); }
  const Type& type_of(ValueId v) const { return values_.at(v).type; }
  bool is_valid(ValueId v) const { return v < values_.size() && values_[v].alive; }
  std::size_t num_values() const { return values_.size(); }

  ValueId new_value(const Type& type, DefSite def);
  OpId new_op_id() { return next_op_id_++; }
  BlockId new_block_id() { return next_block_id_++; }

  /// Drops value slots >= count; used by generator rollback, where every
  /// value minted after a snapshot is known to be dead.
  void truncate_values(std::size_t count);
  OpId next_op_id() const { return next_op_id_; }
  BlockId next_block_id() const { return next_block_id_; }
  void reset_id_counters(OpId op, BlockId block) {
    next_op_id_ = op;
    next_block_id_ = block;
  }

  /// Index of the function named `main`, if any.
  std::optional<std::size_t> main_index() const;
  const Operation* find_function(std::string_view name) const;

 private:
  std::vector<ValueInfo> values_;
  OpId next_op_id_ = 0;
  BlockId next_block_id_ = 0;
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Creates a block whose arguments are fresh values of the given types.
Block make_block(Module& module, const std::vector<Type>& arg_types);

/// Creates a single-block region.
Region make_region(Module& module, const std::vector<Type>& arg_types,
                   bool isolated_from_above = false);

/// Builds a detached operation after checking its local signature; fresh
/// result values are minted. Throws IRError on a signature mismatch.
Operation make_op(Module& module, OpBuild build);

/// Same as make_op without the signature check (parser and passes, which
/// re-verify whole modules).
Operation make_op_unchecked(Module& module, OpBuild build);

/// Inserts a checked operation at `position`; returns its result values.
std::vector<ValueId> insert_op(Module& module, Block& block, std::size_t position,
                               OpBuild build);

/// `arith.constant` builds. Integer values are truncated to the type width;
/// float values are rounded to the type.
OpBuild int_constant(const Type& type, std::int64_t value);
OpBuild float_constant(const Type& type, double value);
OpBuild float_constant_bits(const Type& type, std::uint64_t bits);

/// Builds `func.func @name(params) -> results` with an empty entry block.
Operation make_function(Module& module, std::string name,
                        const std::vector<Type>& params,
                        const std::vector<Type>& results);

/// Erases ops at positions >= position. Refuses with IRError when any
/// surviving op in `module` (or in `block`'s prefix) still uses a result of
/// an erased op. Result values of erased ops, including nested ones, are
/// invalidated.
std::size_t erase_ops_from(Module& module, Block& block, std::size_t position);

/// Marks every value defined by `op` (results, nested block arguments and
/// nested results) as dead.
void invalidate_values(Module& module, const Operation& op);

// ---------------------------------------------------------------------------
// Traversal & comparison
// ---------------------------------------------------------------------------

void walk_ops(const Block& block, const std::function<void(const Operation&)>& fn);
void walk_ops(const Operation& op, const std::function<void(const Operation&)>& fn);
void walk_module(const Module& module, const std::function<void(const Operation&)>& fn);

/// Counts uses of every value across the module.
std::vector<std::uint32_t> count_uses(const Module& module);

/// Replaces every use of `from` by `to` inside `root` (recursively).
void replace_all_uses(Operation& root, ValueId from, ValueId to);

/// Function signature from the `function_type` attribute of a func.func.
const FunctionTypeAttr& function_type(const Operation& func);
const std::string& symbol_name(const Operation& func);

/// Structural equality up to a consistent renaming of values.
/// On mismatch, `why` (if given) receives a short description.
bool structurally_equal(const Module& a, const Module& b, std::string* why = nullptr);

/// Maximum region nesting depth (a function body counts as depth 1).
std::size_t max_region_depth(const Module& module);

}  // namespace irsmith
