#include <gtest/gtest.h>

#include <array>
#include <map>

#include "irsmith/generator.hpp"
#include "irsmith/interpreter.hpp"
#include "irsmith/textio.hpp"
#include "irsmith/verifier.hpp"

using namespace irsmith;

TEST(Rng, WeightedIndexFrequency) {
  Rng rng(1);
  const std::array<double, 2> w{1, 10};
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += rng.weighted_index(w) == 1;
  EXPECT_NEAR(hits / double(n), 10.0 / 11.0, 0.01);
}

TEST(Rng, ZeroWeightNeverDrawn) {
  Rng rng(2);
  const std::array<double, 3> w{0, 1, 0};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(rng.weighted_index(w), 1u);
  WeightedSequence seq(rng, w);
  EXPECT_EQ(seq.next(), std::optional<std::size_t>(1));
  EXPECT_FALSE(seq.next().has_value());
}

TEST(Rng, WeightedSequenceVisitsEachOnce) {
  Rng rng(3);
  const std::array<double, 5> w{1, 2, 3, 4, 5};
  WeightedSequence seq(rng, w);
  std::vector<bool> seen(5, false);
  for (int i = 0; i < 5; ++i) {
    auto idx = seq.next();
    ASSERT_TRUE(idx.has_value());
    EXPECT_FALSE(seen[*idx]);
    seen[*idx] = true;
  }
  EXPECT_FALSE(seq.next().has_value());
}

TEST(Rng, GeometricMean) {
  Rng rng(4);
  const int n = 100000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.geometric(0.5));
  EXPECT_NEAR(sum / n, 2.0, 0.05);
}

TEST(Rng, RangeIsInclusive) {
  Rng rng(5);
  std::map<std::int64_t, int> seen;
  for (int i = 0; i < 2000; ++i) ++seen[rng.range(-2, 2)];
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_EQ(seen.begin()->first, -2);
  EXPECT_EQ(seen.rbegin()->first, 2);
}

TEST(Registry, EffectiveWeights) {
  Registry r = builtin_registry();
  GeneratorConfig c;
  c.op_weights["scf.if"] = 10;
  EXPECT_DOUBLE_EQ(effective_weight(*r.lookup("scf.if"), c), 10);
  EXPECT_DOUBLE_EQ(effective_weight(*r.lookup("arith.addi"), c), 1);
  c.defaultProb = 0;
  EXPECT_DOUBLE_EQ(effective_weight(*r.lookup("arith.addi"), c), 0);
  auto enabled = r.enabled_descriptors(c);
  ASSERT_EQ(enabled.size(), 1u);
  EXPECT_EQ(enabled[0].first->name, "scf.if");
}

TEST(Registry, DuplicateNameRejected) {
  Registry r = builtin_registry();
  OpDescriptor copy = *r.lookup("arith.addi");
  EXPECT_THROW(r.add(copy), RegistryError);
  EXPECT_TRUE(r.remove("arith.addi"));
  EXPECT_EQ(r.lookup("arith.addi"), nullptr);
  EXPECT_FALSE(r.remove("arith.addi"));
}

TEST(Registry, CoversAllDialects) {
  auto dialects = builtin_registry().dialects();
  for (const char* d : {"arith", "func", "math", "memref", "scf"}) {
    EXPECT_NE(std::find(dialects.begin(), dialects.end(), d), dialects.end()) << d;
  }
}

TEST(Generator, DeterministicPerSeed) {
  GeneratorConfig c;
  for (std::uint64_t seed : {0u, 1u, 17u, 123456u}) {
    c.seed = seed;
    EXPECT_EQ(emit(generate_program(c)), emit(generate_program(c))) << seed;
  }
  c.seed = 1;
  const std::string a = emit(generate_program(c));
  c.seed = 2;
  EXPECT_NE(a, emit(generate_program(c)));
}

TEST(Generator, ProgramsVerifyWithinLimits) {
  const Registry registry = builtin_registry();
  GeneratorConfig c;
  c.regionDepthLimit = 2;
  c.blockLength = 12;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    GenerationStats stats;
    Module m = generate_program(registry, c, seed, &stats);
    auto report = verify(m);
    ASSERT_TRUE(report.ok()) << "seed " << seed << "\n" << report.str();
    EXPECT_LE(max_region_depth(m), 2u);
    EXPECT_LE(stats.max_block_ops, 12u);
    EXPECT_LE(stats.max_region_depth, 2u);
  }
}

TEST(Generator, DepthOneForbidsRegions) {
  GeneratorConfig c;
  c.regionDepthLimit = 1;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    c.seed = seed;
    Module m = generate_program(c);
    walk_module(m, [&](const Operation& op) {
      if (op.name == "func.func") return;
      EXPECT_TRUE(op.regions.empty()) << op.name << " at seed " << seed;
    });
  }
}

TEST(Generator, ZeroBlockLengthGivesEmptyBodies) {
  GeneratorConfig c;
  c.blockLength = 0;
  c.seed = 9;
  Module m = generate_program(c);
  ASSERT_TRUE(verify(m).ok());
  // main holds only the checksum seed constants and the return.
  const Block& body = m.functions[*m.main_index()].regions[0].entry();
  for (const auto& op : body.ops) {
    EXPECT_TRUE(op.name == "arith.constant" || op.name == "func.return") << op.name;
  }
}

TEST(Generator, DisabledOpsNeverAppear) {
  GeneratorConfig c;
  c.op_weights["scf.while"] = 0;
  c.op_weights["memref.alloc"] = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    c.seed = seed;
    walk_module(generate_program(c), [&](const Operation& op) {
      EXPECT_NE(op.name, "scf.while");
      EXPECT_NE(op.name, "memref.alloc");
    });
  }
}

TEST(Generator, RollbackRestoresEmission) {
  const Registry registry = builtin_registry();
  GeneratorConfig c;
  c.blockLength = 10;
  Module m = generate_program(registry, c, 5);
  const std::string before = emit(m);
  const std::size_t values = m.num_values();
  {
    GeneratorState state(m, registry, c, 77);
    const auto main = *m.main_index();
    const std::size_t len = m.functions[main].regions[0].entry().ops.size();
    for (int i = 0; i < 200; ++i) {
      state.enter_function_block(main, state.rng().below(len));
      auto descriptors = registry.descriptors();
      const OpDescriptor& d = *descriptors[state.rng().below(descriptors.size())];
      auto out = state.attempt([&]() -> GenOutcome {
        d.generate(state, d, std::nullopt);
        return std::nullopt;
      });
      EXPECT_FALSE(out.has_value());
      state.exit_block();
    }
  }
  EXPECT_EQ(m.num_values(), values);
  EXPECT_EQ(emit(m), before);
}

TEST(Generator, ChecksumEpilogueFoldsTopLevelIntegers) {
  // A registry whose only op places the i32 constants 2, 3 and 5 in turn.
  Registry r;
  std::vector<std::int64_t> pending{2, 3, 5};
  OpDescriptor d;
  d.name = "arith.constant";
  d.generatable_types = [](const GeneratorState&) { return std::vector<Type>{Type::integer(32)}; };
  d.generate = [&](GeneratorState& s, const OpDescriptor&, const std::optional<Type>&) -> GenOutcome {
    if (pending.empty()) return std::nullopt;
    auto v = s.create_value(int_constant(Type::integer(32), pending.front()));
    if (!v) return std::nullopt;
    pending.erase(pending.begin());
    return std::vector<ValueId>{*v};
  };
  r.add(d);

  GeneratorConfig c;
  c.maxFunctions = 0;
  // Find a seed whose body draw places all three constants.
  for (std::uint64_t seed = 0;; ++seed) {
    ASSERT_LT(seed, 100u);
    pending = {2, 3, 5};
    Module m = generate_program(r, c, seed);
    if (!pending.empty()) continue;
    ASSERT_TRUE(verify(m).ok());
    // Oracle: acc = rotl(acc ^ v, 1) over 2, 3, 5 starting from 0.
    std::uint32_t acc = 0;
    for (std::uint32_t v : {2u, 3u, 5u}) {
      const std::uint32_t x = acc ^ v;
      acc = (x << 1) | (x >> 31);
    }
    EXPECT_EQ(acc, 22u);
    auto out = run(m, 1000);
    ASSERT_EQ(out.status, ExecStatus::Completed) << out.str();
    EXPECT_EQ(out.checksum, acc);
    break;
  }
}
