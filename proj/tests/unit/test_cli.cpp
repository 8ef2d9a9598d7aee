#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status;
  std::string out;
};

// Runs the CLI with `args`; stderr is discarded.
Result cli(const std::string& args) {
  const std::string cmd = std::string(IRSMITH_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  Result r{-1, {}};
  if (!p) return r;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

}  // namespace

TEST(Cli, GenerateIsDeterministic) {
  auto a = cli("generate --seed 7");
  auto b = cli("generate --seed 7");
  EXPECT_EQ(a.status, 0);
  EXPECT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, cli("generate --seed 8").out);
}

TEST(Cli, GenerateWritesIntoDirectory) {
  fs::path dir = fs::temp_directory_path() / "irsmith_cli_gen";
  fs::remove_all(dir);
  auto r = cli("generate --seed 3 --output " + dir.string());
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_TRUE(fs::exists(dir / "3.mlir"));
}

TEST(Cli, DumpConfig) {
  auto r = cli("dump-config");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("regionDepthLimit = 4"), std::string::npos);
}

TEST(Cli, DiffTestCreatesVerdictFolders) {
  fs::path dir = fs::temp_directory_path() / "irsmith_cli_diff";
  fs::remove_all(dir);
  auto r = cli("diff-test --seeds 10 --output " + dir.string());
  EXPECT_EQ(r.status, 0);
  for (const char* d : {"comp_err", "exe_diff", "flag_diff", "normal"}) {
    EXPECT_TRUE(fs::is_directory(dir / d)) << d;
  }
}

TEST(Cli, DiffTestFile) {
  fs::path dir = fs::temp_directory_path() / "irsmith_cli_file";
  fs::remove_all(dir);
  auto r = cli(std::string("diff-test-file ") + IRSMITH_TEST_DATA "/dead_alloc.mlir --output " +
               dir.string());
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "flag_diff\n");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("").status, 1);
  EXPECT_EQ(cli("generate --bogus").status, 1);
  EXPECT_EQ(cli("generate --seed notanumber").status, 1);
  EXPECT_EQ(cli("diff-test --seeds 3").status, 1);
  EXPECT_EQ(cli("frobnicate").status, 1);
}

TEST(Cli, InfrastructureErrorExitCode) {
  // The output path is a regular file, so the campaign cannot create its folders.
  auto r = cli("diff-test --seeds 1 --output /dev/null/x");
  EXPECT_EQ(r.status, 2);
}
