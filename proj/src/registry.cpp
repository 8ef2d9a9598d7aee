#include "irsmith/registry.hpp"

#include <algorithm>
#include <set>

#include "irsmith/generator.hpp"

namespace irsmith {

bool OpDescriptor::generates(const GeneratorState& state, const Type& type) const {
  if (can_generate && can_generate(state, type)) return true;
  if (!generatable_types) return false;
  auto types = generatable_types(state);
  return std::find(types.begin(), types.end(), type) != types.end();
}

void Registry::add(OpDescriptor d) {
  if (d.name.empty()) throw RegistryError("descriptor without a name");
  if (!d.generate) throw RegistryError("descriptor '" + d.name + "' has no generate hook");
  if (!(d.default_weight >= 0)) {
    throw RegistryError("descriptor '" + d.name + "' has a negative default weight");
  }
  if (lookup(d.name)) throw RegistryError("op '" + d.name + "' is already registered");
  if (d.dialect.empty()) d.dialect = std::string(dialect_of(d.name));
  if (!d.generatable_types) d.generatable_types = [](const GeneratorState&) {
    return std::vector<Type>{};
  };
  entries_.push_back(std::move(d));
}

bool Registry::remove(std::string_view name) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const OpDescriptor& d) { return d.name == name; });
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

const OpDescriptor* Registry::lookup(std::string_view name) const {
  for (const auto& d : entries_) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

std::vector<const OpDescriptor*> Registry::descriptors() const {
  std::vector<const OpDescriptor*> out;
  for (const auto& d : entries_) out.push_back(&d);
  return out;
}

std::vector<std::string> Registry::dialect(std::string_view dialect) const {
  std::vector<std::string> out;
  for (const auto& d : entries_) {
    if (d.dialect == dialect) out.push_back(d.name);
  }
  return out;
}

std::vector<std::string> Registry::dialects() const {
  std::vector<std::string> out;
  for (const auto& d : entries_) {
    if (std::find(out.begin(), out.end(), d.dialect) == out.end()) out.push_back(d.dialect);
  }
  return out;
}

std::vector<const OpDescriptor*> Registry::descriptors_generating(const GeneratorState& state,
                                                                  const Type& type) const {
  std::vector<const OpDescriptor*> out;
  for (const auto& d : entries_) {
    if (d.generates(state, type)) out.push_back(&d);
  }
  return out;
}

double effective_weight(const OpDescriptor& d, const GeneratorConfig& config) {
  if (auto w = config.weight_override(d.name)) return *w;
  return config.defaultProb * d.default_weight;
}

std::vector<std::pair<const OpDescriptor*, double>> Registry::enabled_descriptors(
    const GeneratorConfig& config) const {
  std::vector<std::pair<const OpDescriptor*, double>> out;
  for (const auto& d : entries_) {
    double w = effective_weight(d, config);
    if (w > 0) out.emplace_back(&d, w);
  }
  return out;
}

Registry builtin_registry() {
  Registry r;
  register_func_ops(r);
  register_scf_ops(r);
  register_arith_ops(r);
  register_math_ops(r);
  register_memref_ops(r);
  return r;
}

}  // namespace irsmith
