#include <gtest/gtest.h>

#include "irsmith/config.hpp"

using namespace irsmith;

TEST(Config, DefaultsDumpTableValues) {
  const std::string text = dump_config(GeneratorConfig{});
  EXPECT_NE(text.find("regionDepthLimit = 4\n"), std::string::npos);
  EXPECT_NE(text.find("blockLength = 50\n"), std::string::npos);
  EXPECT_NE(text.find("defaultProb = 1\n"), std::string::npos);
}

TEST(Config, ParseOverridesAndComments) {
  auto c = parse_config("# comment\nblockLength = 7  # trailing\narith.addi = 2.5\n");
  EXPECT_EQ(c.blockLength, 7);
  EXPECT_EQ(c.regionDepthLimit, 4);
  ASSERT_EQ(c.op_weights.count("arith.addi"), 1u);
  EXPECT_DOUBLE_EQ(c.op_weights.at("arith.addi"), 2.5);
}

TEST(Config, RoundTripThroughDump) {
  GeneratorConfig c;
  c.blockLength = 13;
  c.typeSampleP = 0.25;
  c.reuseProb = 0.125;
  c.seed = 99;
  c.op_weights["scf.for"] = 3;
  c.pipeline_keys["pipeline.x.passes"] = "dce";
  EXPECT_EQ(parse_config(dump_config(c)), c);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("blockLength\n"), ConfigError);
  EXPECT_THROW(parse_config("blockLength = \n"), ConfigError);
  EXPECT_THROW(parse_config("blockLength = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("noSuchKey = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("typeSampleP = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("regionDepthLimit = -1\n"), ConfigError);
}

TEST(Config, UnknownOpIsKeptWithWarning) {
  std::vector<std::string> warnings;
  auto c = parse_config("foo.bar = 2\n", "<t>", &warnings);
  EXPECT_EQ(c.op_weights.count("foo.bar"), 1u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("foo.bar"), std::string::npos);
}

TEST(Config, MissingFileThrows) {
  EXPECT_THROW(load_config(std::string("/nonexistent/cfg")), ConfigError);
  EXPECT_EQ(load_config(std::nullopt), GeneratorConfig{});
}
