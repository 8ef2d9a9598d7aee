#pragma once

// Helpers shared by the built-in generate hooks.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "irsmith/generator.hpp"

namespace irsmith::ops {

inline const std::vector<Type>& int_types() {
  static const std::vector<Type> types = [] {
    std::vector<Type> out;
    for (unsigned w : int_widths()) out.push_back(Type::integer(w));
    return out;
  }();
  return types;
}

inline const std::vector<Type>& int_like_types() {
  static const std::vector<Type> types = [] {
    auto out = int_types();
    out.push_back(Type::index());
    return out;
  }();
  return types;
}

inline const std::vector<Type>& float_types() {
  static const std::vector<Type> types = [] {
    std::vector<Type> out;
    for (unsigned w : float_widths()) out.push_back(Type::floating(w));
    return out;
  }();
  return types;
}

inline GenOutcome wrap(std::optional<ValueId> v) {
  if (!v) return std::nullopt;
  return std::vector<ValueId>{*v};
}

/// Restricts `types` to the requested type, if any.
inline std::vector<Type> narrow(const std::vector<Type>& types,
                                const std::optional<Type>& requested) {
  if (!requested) return types;
  if (std::find(types.begin(), types.end(), *requested) == types.end()) return {};
  return {*requested};
}

/// The retry loop every result-typed hook follows: draw a result type,
/// try to build the op for it under a snapshot, and drop the type from the
/// candidate set when that fails.
template <typename F>
GenOutcome try_types(GeneratorState& s, std::vector<Type> types, F&& build) {
  while (!types.empty()) {
    const std::size_t i = s.rng().below(types.size());
    Type t = types[i];
    types.erase(types.begin() + static_cast<std::ptrdiff_t>(i));
    auto out = s.attempt([&]() -> GenOutcome { return build(t); });
    if (out) return out;
  }
  return std::nullopt;
}

inline OpBuild op(std::string name, std::vector<ValueId> operands, std::vector<Type> results,
                  std::vector<NamedAttribute> attrs = {}) {
  return OpBuild{std::move(name), std::move(operands), std::move(results), std::move(attrs), {}};
}

}  // namespace irsmith::ops
