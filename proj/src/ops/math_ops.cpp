#include "common.hpp"

namespace irsmith {

using namespace ops;

namespace {

OpDescriptor float_op(const char* name, std::size_t arity) {
  OpDescriptor d;
  d.name = name;
  d.generatable_types = [](const GeneratorState&) { return float_types(); };
  d.generate = [arity](GeneratorState& s, const OpDescriptor& self,
                       const std::optional<Type>& req) {
    return try_types(s, narrow(float_types(), req), [&](const Type& t) -> GenOutcome {
      std::vector<ValueId> operands;
      for (std::size_t i = 0; i < arity; ++i) {
        auto v = s.operand(t);
        if (!v) return std::nullopt;
        operands.push_back(*v);
      }
      return s.create_checked(op(self.name, std::move(operands), {t}));
    });
  };
  return d;
}

}  // namespace

void register_math_ops(Registry& r) {
  for (const char* name :
       {"math.absf", "math.atan", "math.cbrt", "math.ceil", "math.cos", "math.erf", "math.exp",
        "math.exp2", "math.expm1", "math.floor", "math.log", "math.log10", "math.log1p",
        "math.log2", "math.round", "math.roundeven", "math.rsqrt", "math.sin", "math.sqrt",
        "math.tan", "math.tanh", "math.trunc"}) {
    r.add(float_op(name, 1));
  }
  for (const char* name : {"math.atan2", "math.copysign", "math.powf"}) r.add(float_op(name, 2));
  r.add(float_op("math.fma", 3));
}

}  // namespace irsmith
