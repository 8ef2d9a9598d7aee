#include <gtest/gtest.h>

#include "irsmith/textio.hpp"
#include "irsmith/verifier.hpp"

using namespace irsmith;

namespace {

VerificationReport check(const char* text) { return verify(parse(text)); }

}  // namespace

TEST(Verifier, AcceptsMinimalMain) {
  auto r = check(R"(module {
  func.func @main() -> i32 {
    %c = arith.constant 1 : i32
    func.return %c : i32
  }
})");
  EXPECT_TRUE(r.ok()) << r.str();
}

TEST(Verifier, RegionValueDoesNotDominateOuterUse) {
  auto r = check(R"(module {
  func.func @main() -> i32 {
    %c = arith.constant true
    %r = scf.if %c -> (i32) {
      %x = arith.constant 1 : i32
      scf.yield %x : i32
    } else {
      %y = arith.constant 2 : i32
      scf.yield %y : i32
    }
    func.return %x : i32
  }
})");
  EXPECT_TRUE(r.has("dominance")) << r.str();
}

TEST(Verifier, RejectsRecursion) {
  auto r = check(R"(module {
  func.func @f(%a: i32) -> i32 {
    %r = func.call @f(%a) : (i32) -> i32
    func.return %r : i32
  }
  func.func @main() -> i32 {
    %c = arith.constant 1 : i32
    func.return %c : i32
  }
})");
  EXPECT_TRUE(r.has("recursion")) << r.str();
}

TEST(Verifier, ConstantIndexOutOfBounds) {
  auto r = check(R"(module {
  func.func @main() -> i32 {
    %c = arith.constant 1 : i32
    %i = arith.constant 10 : index
    %m = memref.alloc() : memref<10xi32>
    memref.store %c, %m[%i] : memref<10xi32>
    memref.dealloc %m : memref<10xi32>
    func.return %c : i32
  }
})");
  EXPECT_TRUE(r.has("index out of bounds")) << r.str();
}

TEST(Verifier, ReturnTypeMismatch) {
  auto r = check(R"(module {
  func.func @main() -> i32 {
    %c = arith.constant 1 : i64
    func.return %c : i64
  }
})");
  EXPECT_FALSE(r.ok());
}

TEST(Verifier, MissingMain) {
  auto r = check(R"(module {
  func.func @f() -> i32 {
    %c = arith.constant 1 : i32
    func.return %c : i32
  }
})");
  EXPECT_TRUE(r.has("main")) << r.str();
}

TEST(Verifier, FunctionBodyIsIsolated) {
  // The parser scopes names per function, so build the cross-function use directly.
  Module m = parse(R"(module {
  func.func @f() -> i32 {
    %c = arith.constant 1 : i32
    func.return %c : i32
  }
  func.func @main() -> i32 {
    %c = arith.constant 2 : i32
    func.return %c : i32
  }
})");
  const ValueId outer = m.functions[0].regions[0].entry().ops[0].results[0];
  m.functions[1].regions[0].entry().ops[1].operands[0] = outer;
  auto r = verify(m);
  EXPECT_FALSE(r.ok());
}
