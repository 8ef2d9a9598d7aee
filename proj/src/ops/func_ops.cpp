#include "common.hpp"

namespace irsmith {

using namespace ops;

namespace {

bool satisfiable(const GeneratorState& s, const Operation& callee) {
  for (const auto& t : function_type(callee).inputs) {
    if (s.visible(t).empty()) return false;
  }
  return true;
}

std::vector<Type> call_result_types(const GeneratorState& s) {
  std::vector<Type> out;
  for (const Operation* f : s.callable_functions()) {
    if (!satisfiable(s, *f)) continue;
    for (const auto& t : function_type(*f).results) {
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
  }
  return out;
}

GenOutcome gen_call(GeneratorState& s, const OpDescriptor&, const std::optional<Type>& req) {
  std::vector<const Operation*> callees;
  for (const Operation* f : s.callable_functions()) {
    const auto& fty = function_type(*f);
    if (!satisfiable(s, *f)) continue;
    if (req && (fty.results.empty() || fty.results.front() != *req)) continue;
    callees.push_back(f);
  }
  if (callees.empty()) return std::nullopt;
  const Operation& callee = *s.rng().pick(callees);
  const auto fty = function_type(callee);
  std::vector<ValueId> args;
  for (const auto& t : fty.inputs) args.push_back(*s.existing_operand(t));
  return s.create_checked(
      op("func.call", std::move(args), fty.results, {{"callee", symbol_name(callee)}}));
}

}  // namespace

void register_func_ops(Registry& r) {
  OpDescriptor d;
  d.name = "func.call";
  d.generatable_types = call_result_types;
  d.generate = gen_call;
  r.add(d);
}

}  // namespace irsmith
