#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "irsmith/generator.hpp"
#include "irsmith/textio.hpp"
#include "irsmith/verifier.hpp"

using namespace irsmith;

namespace {

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Types, SpellingRoundTrips) {
  for (const char* s : {"i1", "i8", "i16", "i32", "i64", "f16", "f32", "f64", "index",
                        "memref<7xi32>", "memref<2x3x4xf16>", "memref<100000xindex>"}) {
    auto t = parse_type(s);
    ASSERT_TRUE(t.has_value()) << s;
    EXPECT_EQ(t->str(), s);
  }
}

TEST(Types, RejectsOutsideSubset) {
  for (const char* s : {"i7", "f80", "memref<0xi32>", "memref<100001xi32>", "memref<1x1x1x1xi8>",
                        "memref<?xi32>", "memref<2xmemref<2xi32>>", "vector<4xi32>"}) {
    auto t = parse_type(s);
    EXPECT_TRUE(!t || !t->well_formed()) << s;
  }
}

TEST(Types, ElementCount) {
  EXPECT_EQ(parse_type("memref<3000x3000xi32>")->num_elements(), 9000000u);
  EXPECT_EQ(Type::integer(32).num_elements(), 1u);
}

TEST(TextIO, ParsesHandWrittenFile) {
  Module m = parse(read(IRSMITH_TEST_DATA "/dead_alloc.mlir"));
  EXPECT_TRUE(verify(m).ok()) << verify(m).str();
  ASSERT_EQ(m.functions.size(), 1u);
  // 4 constants, alloc, store, load, dealloc, return.
  EXPECT_EQ(m.functions[0].regions[0].entry().ops.size(), 9u);
}

TEST(TextIO, EmitParseEmitIsStable) {
  Module m = parse(read(IRSMITH_TEST_DATA "/dead_alloc.mlir"));
  const std::string once = emit(m);
  Module again = parse(once);
  EXPECT_EQ(emit(again), once);
  std::string why;
  EXPECT_TRUE(structurally_equal(m, again, &why)) << why;
}

TEST(TextIO, GeneratedProgramsRoundTrip) {
  GeneratorConfig c;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    c.seed = seed;
    Module m = generate_program(c);
    const std::string text = emit(m);
    Module back = parse(text);
    std::string why;
    EXPECT_TRUE(structurally_equal(m, back, &why)) << "seed " << seed << ": " << why;
    EXPECT_EQ(emit(back), text) << "seed " << seed;
  }
}

TEST(TextIO, ParseErrorCarriesPosition) {
  const std::string text = "module {\n  func.func @main() -> i32 {\n    %a = arith.bogus\n";
  try {
    parse(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(TextIO, UndefinedValueIsParseError) {
  EXPECT_THROW(parse("module {\n  func.func @main() -> i32 {\n    func.return %x : i32\n  }\n}\n"),
               ParseError);
}

TEST(TextIO, EmitRefusesUnverifiedModule) {
  Module m = parse(
      "module {\n  func.func @f() -> i32 {\n    %c = arith.constant 1 : i32\n"
      "    func.return %c : i32\n  }\n}\n");
  EXPECT_THROW(emit(m), IRError);
  EXPECT_FALSE(emit_unverified(m).empty());
}

TEST(TextIO, FloatLiteralsKeepBits) {
  // Quiet NaN with a payload, negative zero, the f16 maximum.
  const std::pair<std::uint64_t, unsigned> cases[] = {
      {0x7FC00001u, 32}, {0x8000000000000000ull, 64}, {0x7BFFu, 16}, {0x3DCCCCCDu, 32}};
  for (auto [bits, width] : cases) {
    Module m;
    Operation f = make_function(m, "main", {}, {Type::integer(32)});
    Block& b = f.regions[0].entry();
    insert_op(m, b, 0, float_constant_bits(Type::floating(width), bits));
    auto c = insert_op(m, b, 1, int_constant(Type::integer(32), 0));
    insert_op(m, b, 2, OpBuild{"func.return", {c[0]}, {}, {}, {}});
    m.functions.push_back(std::move(f));
    Module back = parse(emit(m));
    const auto* attr = back.functions[0].regions[0].entry().ops[0].attr_as<FloatAttr>("value");
    ASSERT_NE(attr, nullptr);
    EXPECT_EQ(attr->bits, bits) << format_float_literal(bits, width);
  }
}
