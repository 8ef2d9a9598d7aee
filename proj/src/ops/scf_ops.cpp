#include "common.hpp"

namespace irsmith {

using namespace ops;

namespace {

const Type kI1 = Type::integer(1);

std::vector<Type> region_result_types(const GeneratorState& s) {
  return s.can_open_region() ? scalar_types() : std::vector<Type>{};
}

std::vector<Type> sample_scalar_types(GeneratorState& s) {
  std::vector<Type> out;
  for (auto& t : s.sample_types()) {
    if (!t.is_memref()) out.push_back(std::move(t));
  }
  return out;
}

GenOutcome gen_if(GeneratorState& s, const OpDescriptor&, const std::optional<Type>& req) {
  if (!s.can_open_region() || s.block_room() == 0) return std::nullopt;
  if (req && req->is_memref()) return std::nullopt;
  auto cond = s.operand(kI1);
  if (!cond || s.block_room() == 0) return std::nullopt;
  const std::vector<Type> results = req ? std::vector<Type>{*req} : sample_scalar_types(s);

  auto branch = [&] {
    return s.build_region({}, [&] { return s.generate_block(results, TerminatorKind::Yield); });
  };
  auto then_region = branch();
  if (!then_region) return std::nullopt;
  auto else_region = branch();
  if (!else_region) return std::nullopt;

  OpBuild b = op("scf.if", {*cond}, results);
  b.regions.push_back(std::move(*then_region));
  b.regions.push_back(std::move(*else_region));
  return s.create_checked(std::move(b));
}

GenOutcome gen_for(GeneratorState& s, const OpDescriptor&, const std::optional<Type>& req) {
  // Three bound constants plus the loop itself.
  if (req || !s.can_open_region() || s.block_room() < 4) return std::nullopt;
  const Type index = Type::index();
  const std::int64_t lb = s.rng().range(0, 15);
  const std::int64_t step = s.rng().range(1, 4);
  const std::int64_t trip = s.rng().range(0, 31);
  auto lb_v = s.create_value(int_constant(index, lb));
  auto ub_v = s.create_value(int_constant(index, lb + step * trip));
  auto step_v = s.create_value(int_constant(index, step));
  if (!lb_v || !ub_v || !step_v) return std::nullopt;

  auto body = s.build_region({index}, [&] { return s.generate_block({}, TerminatorKind::Yield); });
  if (!body) return std::nullopt;
  OpBuild b = op("scf.for", {*lb_v, *ub_v, *step_v}, {});
  b.regions.push_back(std::move(*body));
  return s.create_checked(std::move(b));
}

GenOutcome gen_while(GeneratorState& s, const OpDescriptor&, const std::optional<Type>& req) {
  if (!s.can_open_region() || s.block_room() == 0) return std::nullopt;
  if (req && req->is_memref()) return std::nullopt;
  const std::vector<Type> init_types = sample_scalar_types(s);
  const std::vector<Type> results = req ? std::vector<Type>{*req} : sample_scalar_types(s);

  std::vector<ValueId> inits;
  for (const auto& t : init_types) {
    auto v = s.operand(t);
    if (!v) return std::nullopt;
    inits.push_back(*v);
  }
  if (s.block_room() == 0) return std::nullopt;

  std::vector<Type> condition_types{kI1};
  condition_types.insert(condition_types.end(), results.begin(), results.end());
  auto before = s.build_region(init_types, [&] {
    return s.generate_block(condition_types, TerminatorKind::Condition);
  });
  if (!before) return std::nullopt;
  auto after = s.build_region(results, [&] {
    return s.generate_block(init_types, TerminatorKind::Yield);
  });
  if (!after) return std::nullopt;

  OpBuild b = op("scf.while", inits, results);
  b.regions.push_back(std::move(*before));
  b.regions.push_back(std::move(*after));
  return s.create_checked(std::move(b));
}

}  // namespace

void register_scf_ops(Registry& r) {
  OpDescriptor d;
  d.name = "scf.if";
  d.generatable_types = region_result_types;
  d.generate = gen_if;
  r.add(d);

  d = OpDescriptor{};
  d.name = "scf.for";
  d.generate = gen_for;
  r.add(d);

  d = OpDescriptor{};
  d.name = "scf.while";
  d.generatable_types = region_result_types;
  d.generate = gen_while;
  r.add(d);
}

}  // namespace irsmith
