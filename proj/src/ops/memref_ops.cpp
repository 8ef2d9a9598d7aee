#include <cmath>
#include <map>

#include "common.hpp"

namespace irsmith {

using namespace ops;

namespace {

Type random_memref_type(Rng& rng) {
  const auto rank = static_cast<std::size_t>(rng.range(1, static_cast<std::int64_t>(Type::kMaxRank)));
  std::vector<std::int64_t> shape;
  const double log_span = std::log(static_cast<double>(Type::kMaxDim) + 1.0);
  for (std::size_t i = 0; i < rank; ++i) {
    auto dim = static_cast<std::int64_t>(std::exp(rng.uniform() * log_span));
    shape.push_back(std::clamp<std::int64_t>(dim, 1, Type::kMaxDim));
  }
  return Type::memref(rng.pick(scalar_types()), std::move(shape));
}

GenOutcome gen_alloc(GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req) {
  if (req && (!req->is_memref() || !req->well_formed())) return std::nullopt;
  const Type t = req ? *req : random_memref_type(s.rng());
  return s.create_checked(op(d.name, {}, {t}));
}

// In-bounds index operands: remui(v, dim) over a visible index value, or a
// constant in [0, dim) when none is visible.
std::optional<std::vector<ValueId>> indices_for(GeneratorState& s, const Type& memref) {
  const Type index = Type::index();
  std::vector<ValueId> out;
  for (std::int64_t dim : memref.shape()) {
    const auto& candidates = s.visible(index);
    std::optional<ValueId> v;
    if (!candidates.empty()) {
      ValueId base = candidates[s.rng().below(candidates.size())];
      auto bound = s.create_value(int_constant(index, dim));
      if (!bound) return std::nullopt;
      v = s.create_value(op("arith.remui", {base, *bound}, {index}));
    } else {
      v = s.create_value(int_constant(index, s.rng().range(0, dim - 1)));
    }
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

std::vector<Type> load_types(const GeneratorState& s) {
  std::vector<Type> out;
  for (const auto& t : s.visible_types()) {
    if (!t.is_memref()) continue;
    Type e = t.element();
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
  }
  return out;
}

GenOutcome gen_load(GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req) {
  std::vector<ValueId> mems;
  for (ValueId m : s.visible_memrefs()) {
    if (!req || s.module().type_of(m).element() == *req) mems.push_back(m);
  }
  if (mems.empty()) return std::nullopt;
  const ValueId m = s.rng().pick(mems);
  const Type mt = s.module().type_of(m);
  auto idx = indices_for(s, mt);
  if (!idx) return std::nullopt;
  std::vector<ValueId> operands{m};
  operands.insert(operands.end(), idx->begin(), idx->end());
  return s.create_checked(op(d.name, std::move(operands), {mt.element()}));
}

GenOutcome gen_store(GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req) {
  if (req) return std::nullopt;
  auto mems = s.visible_memrefs();
  if (mems.empty()) return std::nullopt;
  const ValueId m = s.rng().pick(mems);
  const Type mt = s.module().type_of(m);
  auto value = s.operand(mt.element());
  if (!value) return std::nullopt;
  auto idx = indices_for(s, mt);
  if (!idx) return std::nullopt;
  std::vector<ValueId> operands{*value, m};
  operands.insert(operands.end(), idx->begin(), idx->end());
  return s.create_checked(op(d.name, std::move(operands), {}));
}

GenOutcome gen_copy(GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req) {
  if (req) return std::nullopt;
  std::vector<Type> pairs;
  for (const auto& t : s.visible_types()) {
    if (t.is_memref() && s.visible(t).size() >= 2) pairs.push_back(t);
  }
  if (pairs.empty()) return std::nullopt;
  const auto& vs = s.visible(s.rng().pick(pairs));
  const std::size_t a = s.rng().below(vs.size());
  std::size_t b = s.rng().below(vs.size() - 1);
  if (b >= a) ++b;
  return s.create_checked(op(d.name, {vs[a], vs[b]}, {}));
}

}  // namespace

void register_memref_ops(Registry& r) {
  for (const char* name : {"memref.alloc", "memref.alloca"}) {
    OpDescriptor d;
    d.name = name;
    d.can_generate = [](const GeneratorState&, const Type& t) {
      return t.is_memref() && t.well_formed();
    };
    d.generate = gen_alloc;
    r.add(d);
  }
  OpDescriptor load;
  load.name = "memref.load";
  load.generatable_types = load_types;
  load.generate = gen_load;
  r.add(load);

  OpDescriptor store;
  store.name = "memref.store";
  store.generate = gen_store;
  r.add(store);

  OpDescriptor copy;
  copy.name = "memref.copy";
  copy.generate = gen_copy;
  r.add(copy);
}

}  // namespace irsmith
