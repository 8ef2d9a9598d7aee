#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "irsmith/generator.hpp"
#include "irsmith/interpreter.hpp"
#include "irsmith/passes.hpp"
#include "irsmith/textio.hpp"
#include "irsmith/verifier.hpp"

using namespace irsmith;

namespace {

Module load(const std::string& text) {
  Module m = parse(text);
  auto report = verify(m);
  EXPECT_TRUE(report.ok()) << report.str();
  return m;
}

std::string main_returning(const std::string& body) {
  return "module {\n  func.func @main() -> i32 {\n" + body + "    func.return %r : i32\n  }\n}\n";
}

std::size_t count_ops(const Module& m, std::string_view name) {
  std::size_t n = 0;
  walk_module(m, [&](const Operation& op) { n += op.name == name; });
  return n;
}

std::size_t main_size(const Module& m) {
  return m.functions[*m.main_index()].regions[0].entry().ops.size();
}

}  // namespace

TEST(Dce, RemovesUnusedChain) {
  Module m = load(main_returning(
      "    %r = arith.constant 0 : i32\n"
      "    %a = arith.constant 1 : i32\n"
      "    %b = arith.addi %a, %a : i32\n"
      "    %c = arith.muli %b, %b : i32\n"));
  auto stats = dce(m);
  EXPECT_EQ(stats.ops_removed, 3u);
  EXPECT_EQ(main_size(m), 2u);
  EXPECT_TRUE(verify(m).ok());
}

TEST(Dce, KeepsMemoryEffectsAndWhile) {
  Module m = load(main_returning(
      "    %r = arith.constant 0 : i32\n"
      "    %f = arith.constant false\n"
      "    %m = memref.alloc() : memref<2xi32>\n"
      "    %i = arith.constant 0 : index\n"
      "    memref.store %r, %m[%i] : memref<2xi32>\n"
      "    memref.dealloc %m : memref<2xi32>\n"
      "    scf.while : () -> () {\n"
      "      scf.condition(%f)\n"
      "    } do {\n"
      "      scf.yield\n"
      "    }\n"));
  const std::size_t before = main_size(m);
  EXPECT_EQ(dce(m).ops_removed, 0u);
  EXPECT_EQ(main_size(m), before);
}

TEST(Dce, RemovesPureIfWithUnusedResults) {
  Module m = load(main_returning(
      "    %r = arith.constant 0 : i32\n"
      "    %c = arith.constant true\n"
      "    %x = scf.if %c -> (i32) {\n"
      "      %a = arith.constant 1 : i32\n"
      "      scf.yield %a : i32\n"
      "    } else {\n"
      "      %b = arith.constant 2 : i32\n"
      "      scf.yield %b : i32\n"
      "    }\n"));
  dce(m);
  EXPECT_EQ(count_ops(m, "scf.if"), 0u);
  EXPECT_EQ(count_ops(m, "arith.constant"), 1u);
}

TEST(ConstFold, FoldsArithmetic) {
  Module m = load(main_returning(
      "    %a = arith.constant 6 : i32\n"
      "    %b = arith.constant 7 : i32\n"
      "    %r = arith.muli %a, %b : i32\n"));
  const_fold(m);
  ASSERT_TRUE(verify(m).ok());
  EXPECT_EQ(main_size(m), 2u);
  const auto& op = m.functions[0].regions[0].entry().ops[0];
  ASSERT_EQ(op.name, "arith.constant");
  EXPECT_EQ(op.attr_as<IntegerAttr>("value")->value, 42);
}

TEST(ConstFold, LeavesTrappingOpsAlone) {
  Module m = load(main_returning(
      "    %a = arith.constant 6 : i32\n"
      "    %z = arith.constant 0 : i32\n"
      "    %r = arith.divsi %a, %z : i32\n"));
  const_fold(m);
  EXPECT_EQ(count_ops(m, "arith.divsi"), 1u);
  EXPECT_EQ(run(m, 100).trap, TrapKind::DivZero);
}

TEST(ConstFold, InlinesIfWithConstantCondition) {
  Module m = load(main_returning(
      "    %c = arith.constant true\n"
      "    %p = arith.constant 5 : i32\n"
      "    %r = scf.if %c -> (i32) {\n"
      "      %m = memref.alloc() : memref<1xi32>\n"
      "      %i = arith.constant 0 : index\n"
      "      memref.store %p, %m[%i] : memref<1xi32>\n"
      "      %v = memref.load %m[%i] : memref<1xi32>\n"
      "      memref.dealloc %m : memref<1xi32>\n"
      "      scf.yield %v : i32\n"
      "    } else {\n"
      "      %b = arith.constant 2 : i32\n"
      "      scf.yield %b : i32\n"
      "    }\n"));
  const auto before = run(m, 1000);
  const_fold(m);
  ASSERT_TRUE(verify(m).ok()) << verify(m).str();
  EXPECT_EQ(count_ops(m, "scf.if"), 0u);
  EXPECT_EQ(count_ops(m, "memref.store"), 1u);
  const auto after = run(m, 1000);
  EXPECT_EQ(after.status, ExecStatus::Completed);
  EXPECT_EQ(after.checksum, before.checksum);
  EXPECT_EQ(after.checksum, 5u);
}

TEST(ConstFold, ResolvesSelect) {
  Module m = load(main_returning(
      "    %c = arith.constant false\n"
      "    %a = arith.constant 1 : i32\n"
      "    %b = arith.constant 2 : i32\n"
      "    %r = arith.select %c, %a, %b : i32\n"));
  const_fold(m);
  EXPECT_EQ(count_ops(m, "arith.select"), 0u);
  EXPECT_EQ(run(m, 100).checksum, 2u);
}

TEST(DeadAllocElim, RemovesWriteOnlyBuffer) {
  std::ifstream in(IRSMITH_TEST_DATA "/dead_alloc.mlir");
  std::stringstream ss;
  ss << in.rdbuf();
  Module m = load(ss.str());
  EXPECT_EQ(liveness_metric(m), 4u);
  dead_alloc_elim(m);
  ASSERT_TRUE(verify(m).ok());
  EXPECT_EQ(liveness_metric(m), 0u);
  walk_module(m, [](const Operation& op) { EXPECT_FALSE(op.name.starts_with("memref.")); });
}

TEST(DeadAllocElim, KeepsBufferWhoseLoadIsUsed) {
  Module m = load(main_returning(
      "    %v = arith.constant 3 : i32\n"
      "    %i = arith.constant 0 : index\n"
      "    %m = memref.alloc() : memref<1xi32>\n"
      "    memref.store %v, %m[%i] : memref<1xi32>\n"
      "    %r = memref.load %m[%i] : memref<1xi32>\n"
      "    memref.dealloc %m : memref<1xi32>\n"));
  dead_alloc_elim(m);
  EXPECT_EQ(liveness_metric(m), 4u);
  EXPECT_EQ(run(m, 100).checksum, 3u);
}

TEST(DeadAllocElim, StoreThroughParameterSurvives) {
  // The buffer passed in is not allocated here, so its store must stay.
  Module m = load(R"(module {
  func.func @fill(%m: memref<2xi32>) -> i32 {
    %v = arith.constant 1 : i32
    %i = arith.constant 1 : index
    memref.store %v, %m[%i] : memref<2xi32>
    func.return %v : i32
  }
  func.func @main() -> i32 {
    %r = arith.constant 0 : i32
    func.return %r : i32
  }
}
)");
  dead_alloc_elim(m);
  ASSERT_TRUE(verify(m).ok());
  EXPECT_EQ(liveness_metric(m), 1u);
}

TEST(DeadAllocElim, CopyOnlyBuffersAreRemoved) {
  Module m = load(main_returning(
      "    %r = arith.constant 0 : i32\n"
      "    %a = memref.alloc() : memref<2xi32>\n"
      "    %b = memref.alloc() : memref<2xi32>\n"
      "    memref.copy %a, %b : memref<2xi32> to memref<2xi32>\n"
      "    memref.dealloc %a : memref<2xi32>\n"
      "    memref.dealloc %b : memref<2xi32>\n"));
  dead_alloc_elim(m);
  ASSERT_TRUE(verify(m).ok());
  // %b is only copied into and freed; once it goes, %a is unused too.
  EXPECT_EQ(count_ops(m, "memref.copy"), 0u);
  EXPECT_EQ(count_ops(m, "memref.alloc"), 0u);
}

TEST(Pipeline, UnknownPassThrows) {
  Module m = load(main_returning("    %r = arith.constant 0 : i32\n"));
  EXPECT_THROW(run_pipeline(m, {"dce", "nonsense"}), PassError);
}

TEST(Pipeline, PreservesBehaviourOnGeneratedPrograms) {
  GeneratorConfig c;
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    c.seed = seed;
    Module m = generate_program(c);
    const auto base = run(m, 1'000'000);
    ASSERT_NE(base.status, ExecStatus::Trap) << "seed " << seed << ": " << base.str();
    if (base.status != ExecStatus::Completed) continue;
    Module opt = m;
    run_pipeline(opt, {"const_fold", "dce", "dead_alloc_elim"});
    const auto after = run(opt, 1'000'000);
    EXPECT_EQ(after.status, ExecStatus::Completed) << "seed " << seed;
    EXPECT_EQ(after.checksum, base.checksum) << "seed " << seed;
    EXPECT_LE(liveness_metric(opt), liveness_metric(m));
    ++compared;
  }
  EXPECT_GT(compared, 10);
}
