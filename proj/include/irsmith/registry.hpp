#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "irsmith/config.hpp"
#include "irsmith/ir.hpp"

namespace irsmith {

class GeneratorState;

/// Values produced by a successful generation step; nullopt signals failure.
using GenOutcome = std::optional<std::vector<ValueId>>;

class RegistryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A generatable operation: its generation procedure plus the result types
/// it can currently produce.
struct OpDescriptor {
  using TypesHook = std::function<std::vector<Type>(const GeneratorState&)>;
  using CanGenerateHook = std::function<bool(const GeneratorState&, const Type&)>;
  using GenerateHook =
      std::function<GenOutcome(GeneratorState&, const OpDescriptor&, const std::optional<Type>&)>;

  std::string name;
  /// Defaults to the prefix of `name` before the first '.'.
  std::string dialect;
  double default_weight = 1.0;
  /// Finite set of result types producible at the current state.
  TypesHook generatable_types;
  /// Optional membership test for open-ended type families (memref shapes)
  /// that generatable_types cannot enumerate.
  CanGenerateHook can_generate;
  /// Builds the op at the insertion point. With a requested type, the first
  /// returned value must have that type. A failing hook may leave partial
  /// IR behind; callers run it under a snapshot.
  GenerateHook generate;

  bool generates(const GeneratorState& state, const Type& type) const;
};

class Registry {
 public:
  /// Throws RegistryError on a duplicate name or missing hooks.
  void add(OpDescriptor descriptor);
  /// Returns false if `name` was not registered.
  bool remove(std::string_view name);

  const OpDescriptor* lookup(std::string_view name) const;
  /// All descriptors in registration order.
  std::vector<const OpDescriptor*> descriptors() const;
  std::vector<std::string> dialect(std::string_view dialect) const;
  std::vector<std::string> dialects() const;
  std::size_t size() const { return entries_.size(); }

  /// Descriptors whose current type set contains `type`, in registration order.
  std::vector<const OpDescriptor*> descriptors_generating(const GeneratorState& state,
                                                         const Type& type) const;

  /// Descriptors with positive effective weight, paired with that weight.
  /// The weight is the config override when present, otherwise
  /// defaultProb * default_weight.
  std::vector<std::pair<const OpDescriptor*, double>> enabled_descriptors(
      const GeneratorConfig& config) const;

 private:
  std::deque<OpDescriptor> entries_;
};

/// Effective selection weight of `d` under `config`.
double effective_weight(const OpDescriptor& d, const GeneratorConfig& config);

/// Registry with every built-in generatable op (func, scf, arith, math, memref).
Registry builtin_registry();

void register_arith_ops(Registry& registry);
void register_math_ops(Registry& registry);
void register_scf_ops(Registry& registry);
void register_memref_ops(Registry& registry);
void register_func_ops(Registry& registry);

}  // namespace irsmith
