#include <cmath>
#include <limits>

#include "common.hpp"
#include "irsmith/op_schema.hpp"

namespace irsmith {

using namespace ops;

namespace {

const Type kI1 = Type::integer(1);

std::optional<ValueId> cmpi(GeneratorState& s, const char* pred, ValueId a, ValueId b) {
  return s.create_value(op("arith.cmpi", {a, b}, {kI1}, {{"predicate", std::string(pred)}}));
}

std::optional<ValueId> cmpf(GeneratorState& s, const char* pred, ValueId a, ValueId b) {
  return s.create_value(op("arith.cmpf", {a, b}, {kI1}, {{"predicate", std::string(pred)}}));
}

std::int64_t signed_min(const Type& t) {
  if (t.width() >= 64) return std::numeric_limits<std::int64_t>::min();
  return -(std::int64_t{1} << (t.width() - 1));
}

GenOutcome gen_constant(GeneratorState& s, const OpDescriptor&, const std::optional<Type>& req) {
  if (req && req->is_memref()) return std::nullopt;
  const Type t = req ? *req : s.rng().pick(scalar_types());
  return wrap(s.fresh_constant(t));
}

GenOutcome gen_int_binary(GeneratorState& s, const OpDescriptor& d,
                          const std::optional<Type>& req) {
  return try_types(s, narrow(int_like_types(), req), [&](const Type& t) -> GenOutcome {
    auto a = s.operand(t);
    if (!a) return std::nullopt;
    auto b = s.operand(t);
    if (!b) return std::nullopt;
    return s.create_checked(op(d.name, {*a, *b}, {t}));
  });
}

bool is_signed_division(OpCode c) {
  return c == OpCode::DivSI || c == OpCode::RemSI || c == OpCode::CeilDivSI ||
         c == OpCode::FloorDivSI;
}

// divisor' = select(d == 0 [or (lhs == MIN and d == -1)], 1, d)
GenOutcome gen_guarded_division(GeneratorState& s, const OpDescriptor& d,
                                const std::optional<Type>& req) {
  const bool is_signed = is_signed_division(opcode_for(d.name));
  // On i1 the only nonzero divisor is -1, so MIN / -1 cannot be guarded away.
  std::vector<Type> types = narrow(int_like_types(), req);
  if (is_signed) std::erase(types, kI1);
  return try_types(s, std::move(types), [&](const Type& t) -> GenOutcome {
    auto lhs = s.operand(t);
    if (!lhs) return std::nullopt;
    auto rhs = s.operand(t);
    if (!rhs) return std::nullopt;
    auto zero = s.create_value(int_constant(t, 0));
    if (!zero) return std::nullopt;
    auto cond = cmpi(s, "eq", *rhs, *zero);
    if (!cond) return std::nullopt;
    if (is_signed) {
      auto min = s.create_value(int_constant(t, signed_min(t)));
      if (!min) return std::nullopt;
      auto lhs_min = cmpi(s, "eq", *lhs, *min);
      if (!lhs_min) return std::nullopt;
      auto minus_one = s.create_value(int_constant(t, -1));
      if (!minus_one) return std::nullopt;
      auto rhs_m1 = cmpi(s, "eq", *rhs, *minus_one);
      if (!rhs_m1) return std::nullopt;
      auto overflow = s.create_value(op("arith.andi", {*lhs_min, *rhs_m1}, {kI1}));
      if (!overflow) return std::nullopt;
      cond = s.create_value(op("arith.ori", {*cond, *overflow}, {kI1}));
      if (!cond) return std::nullopt;
    }
    auto one = s.create_value(int_constant(t, 1));
    if (!one) return std::nullopt;
    auto divisor = s.create_value(op("arith.select", {*cond, *one, *rhs}, {t}));
    if (!divisor) return std::nullopt;
    return s.create_checked(op(d.name, {*lhs, *divisor}, {t}));
  });
}

// amount' = remui(amount, bitwidth)
GenOutcome gen_guarded_shift(GeneratorState& s, const OpDescriptor& d,
                             const std::optional<Type>& req) {
  return try_types(s, narrow(int_like_types(), req), [&](const Type& t) -> GenOutcome {
    auto value = s.operand(t);
    if (!value) return std::nullopt;
    auto amount = s.operand(t);
    if (!amount) return std::nullopt;
    auto width = s.create_value(int_constant(t, t.width()));
    if (!width) return std::nullopt;
    auto reduced = s.create_value(op("arith.remui", {*amount, *width}, {t}));
    if (!reduced) return std::nullopt;
    return s.create_checked(op(d.name, {*value, *reduced}, {t}));
  });
}

GenOutcome gen_float_nary(GeneratorState& s, const OpDescriptor& d,
                          const std::optional<Type>& req, std::size_t arity) {
  return try_types(s, narrow(float_types(), req), [&](const Type& t) -> GenOutcome {
    std::vector<ValueId> operands;
    for (std::size_t i = 0; i < arity; ++i) {
      auto v = s.operand(t);
      if (!v) return std::nullopt;
      operands.push_back(*v);
    }
    return s.create_checked(op(d.name, std::move(operands), {t}));
  });
}

GenOutcome gen_compare(GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req,
                       bool integer) {
  if (req && *req != kI1) return std::nullopt;
  auto preds = integer ? cmpi_predicate_names() : cmpf_predicate_names();
  return try_types(s, integer ? int_like_types() : float_types(),
                   [&](const Type& t) -> GenOutcome {
                     auto a = s.operand(t);
                     if (!a) return std::nullopt;
                     auto b = s.operand(t);
                     if (!b) return std::nullopt;
                     std::string pred(preds[s.rng().below(preds.size())]);
                     return s.create_checked(op(d.name, {*a, *b}, {kI1}, {{"predicate", pred}}));
                   });
}

GenOutcome gen_select(GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req) {
  return try_types(s, narrow(scalar_types(), req), [&](const Type& t) -> GenOutcome {
    auto c = s.operand(kI1);
    if (!c) return std::nullopt;
    auto a = s.operand(t);
    if (!a) return std::nullopt;
    auto b = s.operand(t);
    if (!b) return std::nullopt;
    return s.create_checked(op(d.name, {*c, *a, *b}, {t}));
  });
}

// Cast family: `sources(t)` lists the legal source types for result type t.
template <typename Sources>
GenOutcome gen_cast(GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req,
                    std::vector<Type> results, Sources sources) {
  return try_types(s, narrow(std::move(results), req), [&](const Type& t) -> GenOutcome {
    std::vector<Type> from = sources(t);
    if (from.empty()) return std::nullopt;
    auto v = s.operand(s.rng().pick(from));
    if (!v) return std::nullopt;
    return s.create_checked(op(d.name, {*v}, {t}));
  });
}

std::vector<Type> ints_where(bool (*pred)(unsigned, unsigned), unsigned w) {
  std::vector<Type> out;
  for (unsigned x : int_widths()) {
    if (pred(x, w)) out.push_back(Type::integer(x));
  }
  return out;
}

std::vector<Type> floats_where(bool (*pred)(unsigned, unsigned), unsigned w) {
  std::vector<Type> out;
  for (unsigned x : float_widths()) {
    if (pred(x, w)) out.push_back(Type::floating(x));
  }
  return out;
}

bool narrower(unsigned x, unsigned w) { return x < w; }
bool wider(unsigned x, unsigned w) { return x > w; }

// x' = select(lo <= x < hi, x, 0.0), with [lo, hi) the target's exact range.
GenOutcome gen_guarded_fptoint(GeneratorState& s, const OpDescriptor& d,
                               const std::optional<Type>& req) {
  const bool is_signed = opcode_for(d.name) == OpCode::FPToSI;
  return try_types(s, narrow(int_types(), req), [&](const Type& t) -> GenOutcome {
    const Type src = s.rng().pick(float_types());
    auto x = s.operand(src);
    if (!x) return std::nullopt;
    const int n = static_cast<int>(t.width());
    const double lo = is_signed ? -std::ldexp(1.0, n - 1) : -1.0;
    const double hi = is_signed ? std::ldexp(1.0, n - 1) : std::ldexp(1.0, n);
    auto lo_c = s.create_value(float_constant(src, lo));
    if (!lo_c) return std::nullopt;
    auto hi_c = s.create_value(float_constant(src, hi));
    if (!hi_c) return std::nullopt;
    auto above = cmpf(s, is_signed ? "oge" : "ogt", *x, *lo_c);
    if (!above) return std::nullopt;
    auto below = cmpf(s, "olt", *x, *hi_c);
    if (!below) return std::nullopt;
    auto in_range = s.create_value(op("arith.andi", {*above, *below}, {kI1}));
    if (!in_range) return std::nullopt;
    auto zero = s.create_value(float_constant(src, 0.0));
    if (!zero) return std::nullopt;
    auto safe = s.create_value(op("arith.select", {*in_range, *x, *zero}, {src}));
    if (!safe) return std::nullopt;
    return s.create_checked(op(d.name, {*safe}, {t}));
  });
}

OpDescriptor make(std::string name, std::function<std::vector<Type>()> types,
                  OpDescriptor::GenerateHook gen) {
  OpDescriptor d;
  d.name = std::move(name);
  d.generatable_types = [types = std::move(types)](const GeneratorState&) { return types(); };
  d.generate = std::move(gen);
  return d;
}

}  // namespace

void register_arith_ops(Registry& r) {
  r.add(make("arith.constant", [] { return scalar_types(); }, gen_constant));

  for (const char* name : {"arith.addi", "arith.subi", "arith.muli", "arith.andi", "arith.ori",
                           "arith.xori", "arith.maxsi", "arith.maxui", "arith.minsi",
                           "arith.minui"}) {
    r.add(make(name, int_like_types, gen_int_binary));
  }
  for (const char* name : {"arith.divui", "arith.ceildivui", "arith.remui"}) {
    r.add(make(name, int_like_types, gen_guarded_division));
  }
  auto signed_division_types = [] {
    std::vector<Type> out = int_like_types();
    std::erase(out, kI1);
    return out;
  };
  for (const char* name : {"arith.divsi", "arith.ceildivsi", "arith.floordivsi", "arith.remsi"}) {
    r.add(make(name, signed_division_types, gen_guarded_division));
  }
  for (const char* name : {"arith.shli", "arith.shrsi", "arith.shrui"}) {
    r.add(make(name, int_like_types, gen_guarded_shift));
  }
  for (const char* name : {"arith.addf", "arith.subf", "arith.mulf", "arith.divf", "arith.remf",
                           "arith.maximumf", "arith.minimumf", "arith.maxnumf",
                           "arith.minnumf"}) {
    r.add(make(name, float_types, [](GeneratorState& s, const OpDescriptor& d,
                                     const std::optional<Type>& req) {
      return gen_float_nary(s, d, req, 2);
    }));
  }
  r.add(make("arith.negf", float_types, [](GeneratorState& s, const OpDescriptor& d,
                                           const std::optional<Type>& req) {
    return gen_float_nary(s, d, req, 1);
  }));

  auto i1_only = [] { return std::vector<Type>{kI1}; };
  r.add(make("arith.cmpi", i1_only, [](GeneratorState& s, const OpDescriptor& d,
                                       const std::optional<Type>& req) {
    return gen_compare(s, d, req, true);
  }));
  r.add(make("arith.cmpf", i1_only, [](GeneratorState& s, const OpDescriptor& d,
                                       const std::optional<Type>& req) {
    return gen_compare(s, d, req, false);
  }));
  r.add(make("arith.select", [] { return scalar_types(); }, gen_select));

  auto int_cast = [](bool (*pred)(unsigned, unsigned)) {
    return [pred](GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req) {
      std::vector<Type> results;
      for (const auto& t : int_types()) {
        if (!ints_where(pred, t.width()).empty()) results.push_back(t);
      }
      return gen_cast(s, d, req, results,
                      [pred](const Type& t) { return ints_where(pred, t.width()); });
    };
  };
  auto float_cast = [](bool (*pred)(unsigned, unsigned)) {
    return [pred](GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req) {
      std::vector<Type> results;
      for (const auto& t : float_types()) {
        if (!floats_where(pred, t.width()).empty()) results.push_back(t);
      }
      return gen_cast(s, d, req, results,
                      [pred](const Type& t) { return floats_where(pred, t.width()); });
    };
  };
  auto ints_with_narrower = [] {
    std::vector<Type> out;
    for (const auto& t : int_types()) {
      if (!ints_where(narrower, t.width()).empty()) out.push_back(t);
    }
    return out;
  };
  auto ints_with_wider = [] {
    std::vector<Type> out;
    for (const auto& t : int_types()) {
      if (!ints_where(wider, t.width()).empty()) out.push_back(t);
    }
    return out;
  };
  auto floats_with_narrower = [] {
    std::vector<Type> out;
    for (const auto& t : float_types()) {
      if (!floats_where(narrower, t.width()).empty()) out.push_back(t);
    }
    return out;
  };
  auto floats_with_wider = [] {
    std::vector<Type> out;
    for (const auto& t : float_types()) {
      if (!floats_where(wider, t.width()).empty()) out.push_back(t);
    }
    return out;
  };
  r.add(make("arith.extsi", ints_with_narrower, int_cast(narrower)));
  r.add(make("arith.extui", ints_with_narrower, int_cast(narrower)));
  r.add(make("arith.trunci", ints_with_wider, int_cast(wider)));
  r.add(make("arith.extf", floats_with_narrower, float_cast(narrower)));
  r.add(make("arith.truncf", floats_with_wider, float_cast(wider)));

  auto to_float = [](GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req) {
    return gen_cast(s, d, req, float_types(), [](const Type&) { return int_types(); });
  };
  r.add(make("arith.sitofp", float_types, to_float));
  r.add(make("arith.uitofp", float_types, to_float));
  r.add(make("arith.fptosi", int_types, gen_guarded_fptoint));
  r.add(make("arith.fptoui", int_types, gen_guarded_fptoint));

  auto index_cast = [](GeneratorState& s, const OpDescriptor& d, const std::optional<Type>& req) {
    return gen_cast(s, d, req, int_like_types(), [](const Type& t) {
      return t.is_index() ? int_types() : std::vector<Type>{Type::index()};
    });
  };
  r.add(make("arith.index_cast", int_like_types, index_cast));
  r.add(make("arith.index_castui", int_like_types, index_cast));

  auto bitcast_types = [] {
    std::vector<Type> out;
    for (unsigned w : float_widths()) {
      out.push_back(Type::integer(w));
      out.push_back(Type::floating(w));
    }
    return out;
  };
  r.add(make("arith.bitcast", bitcast_types,
             [bitcast_types](GeneratorState& s, const OpDescriptor& d,
                             const std::optional<Type>& req) {
               return gen_cast(s, d, req, bitcast_types(), [](const Type& t) {
                 return std::vector<Type>{t.is_int() ? Type::floating(t.width())
                                                     : Type::integer(t.width())};
               });
             }));
}

}  // namespace irsmith
