#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "irsmith/harness.hpp"
#include "irsmith/subprocess.hpp"

using namespace irsmith;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("irsmith_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineResult completed(const std::string& name, std::uint32_t checksum, std::size_t liveness) {
  PipelineResult r;
  r.pipeline = name;
  r.observable = {ObservableBehavior::Class::Completed, checksum};
  r.metric_kind = PipelineResult::MetricKind::Liveness;
  r.metric = liveness;
  return r;
}

const fs::path kDeadAlloc = IRSMITH_TEST_DATA "/dead_alloc.mlir";

}  // namespace

TEST(Classify, Precedence) {
  auto a = completed("a", 1, 3);
  auto b = completed("b", 2, 4);
  auto broken = completed("c", 1, 3);
  broken.compile_error = true;
  EXPECT_EQ(classify({a, b, broken}), Verdict::CompErr);
  EXPECT_EQ(classify({a, b}), Verdict::ExeDiff);
  EXPECT_EQ(classify({a, completed("b", 1, 4)}), Verdict::FlagDiff);
  EXPECT_EQ(classify({a, completed("b", 1, 3)}), Verdict::Normal);
  EXPECT_EQ(classify({}), Verdict::Normal);
}

TEST(Classify, TrapIsAlwaysDifferent) {
  auto a = completed("a", 1, 0);
  auto b = completed("b", 1, 0);
  a.observable.cls = b.observable.cls = ObservableBehavior::Class::Trap;
  EXPECT_EQ(classify({a, b}), Verdict::ExeDiff);
}

TEST(Classify, ExitCodeOnlyComparesLowByte) {
  auto internal = completed("a", 0x1234, 0);
  PipelineResult external;
  external.pipeline = "ext";
  external.observable = {ObservableBehavior::Class::Completed, 0x34};
  external.exit_code_only = true;
  EXPECT_TRUE(same_behavior(internal, external));
  external.observable.checksum = 0x35;
  EXPECT_FALSE(same_behavior(internal, external));
}

TEST(Classify, MetricsOfDifferentKindsAreNotCompared) {
  auto a = completed("a", 1, 3);
  auto b = completed("b", 1, 9);
  b.metric_kind = PipelineResult::MetricKind::AsmCalls;
  EXPECT_EQ(classify({a, b}), Verdict::Normal);
}

TEST(Classify, TimeoutsCompareEqual) {
  auto a = completed("a", 1, 0);
  auto b = completed("b", 2, 0);
  a.observable.cls = b.observable.cls = ObservableBehavior::Class::Timeout;
  EXPECT_EQ(classify({a, b}), Verdict::Normal);
}

TEST(Pipelines, ParsesInternalAndExternal) {
  auto specs = parse_pipelines({
      {"pipeline.o.passes", "dce, const_fold"},
      {"pipeline.o.fuel", "500"},
      {"pipeline.n.passes", "none"},
      {"pipeline.x.stage.1", "b {in} {out}"},
      {"pipeline.x.stage.0", "a {in} {out}"},
      {"pipeline.x.run", "r {in}"},
      {"pipeline.x.timeout", "2.5"},
  });
  ASSERT_EQ(specs.size(), 3u);
  EXPECT_EQ(specs[0].name, "n");
  EXPECT_TRUE(specs[0].passes.empty());
  EXPECT_EQ(specs[1].passes, (std::vector<std::string>{"dce", "const_fold"}));
  EXPECT_EQ(specs[1].fuel, 500u);
  ASSERT_EQ(specs[2].kind, PipelineSpec::Kind::External);
  ASSERT_EQ(specs[2].stages.size(), 2u);
  EXPECT_EQ(specs[2].stages[0].command, "a {in} {out}");
  EXPECT_DOUBLE_EQ(specs[2].stages[1].timeout_seconds, 2.5);
}

TEST(Pipelines, RejectsMalformedSpecs) {
  EXPECT_THROW(parse_pipelines({{"pipeline.x.passes", "nosuchpass"}}), ConfigError);
  EXPECT_THROW(parse_pipelines({{"pipeline.x.stage.0", "cp {in} {out}"}}), ConfigError);
  EXPECT_THROW(parse_pipelines({{"pipeline.x.stage.0", "cp a b"}, {"pipeline.x.run", "r {in}"}}),
               ConfigError);
  EXPECT_THROW(parse_pipelines({{"pipeline.x.run", "r"}}), ConfigError);
  EXPECT_THROW(parse_pipelines({{"pipeline.x.bogus", "1"}}), ConfigError);
  EXPECT_THROW(parse_pipelines({{"pipeline.x.passes", "dce"}, {"pipeline.x.run", "r {in}"}}),
               ConfigError);
}

TEST(Subprocess, CapturesExitAndOutput) {
  fs::path dir = fresh_dir("sub");
  auto r = run_shell("echo hi; exit 3", dir / "out", dir / "err", 10);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(slurp(dir / "out"), "hi\n");
}

TEST(Subprocess, KillsOnTimeout) {
  fs::path dir = fresh_dir("sub_timeout");
  auto r = run_shell("sleep 30", dir / "out", dir / "err", 0.3);
  EXPECT_TRUE(r.timed_out);
  EXPECT_LT(r.seconds, 5.0);
}

TEST(Subprocess, ReportsSignals) {
  fs::path dir = fresh_dir("sub_signal");
  auto r = run_shell("kill -SEGV $$", dir / "out", dir / "err", 10);
  EXPECT_EQ(r.signal, 11);
}

TEST(Harness, DeadAllocFileIsFlagDiff) {
  HarnessOptions o;
  o.outdir = fresh_dir("fig");
  auto r = diff_test_file(kDeadAlloc, o);
  EXPECT_EQ(r.verdict, Verdict::FlagDiff);
  ASSERT_EQ(r.pipelines.size(), 2u);
  EXPECT_EQ(r.pipelines[0].metric, 4u);
  EXPECT_EQ(r.pipelines[1].metric, 0u);
  EXPECT_EQ(r.folder, o.outdir / "flag_diff" / "dead_alloc");
  for (const char* f : {"input.mlir", "noopt.mlir", "opt.mlir", "noopt.log", "opt.log",
                        "verdict.txt"}) {
    EXPECT_TRUE(fs::exists(r.folder / f)) << f;
  }
  EXPECT_FALSE(fs::exists(o.outdir / "work" / "dead_alloc"));
}

TEST(Harness, FindingReproducesFromItsFolder) {
  HarnessOptions o;
  o.outdir = fresh_dir("repro");
  auto first = diff_test_file(kDeadAlloc, o);
  HarnessOptions again = o;
  again.outdir = fresh_dir("repro2");
  auto second = diff_test_file(first.folder / "input.mlir", again);
  EXPECT_EQ(second.verdict, first.verdict);
}

TEST(Harness, FailingExternalStageIsCompErr) {
  HarnessOptions o;
  o.outdir = fresh_dir("false");
  o.pipelines = parse_pipelines({
      {"pipeline.a.passes", "none"},
      {"pipeline.b.stage.0", "false {in} {out}"},
      {"pipeline.b.run", "true {in}"},
  });
  auto r = diff_test_file(kDeadAlloc, o);
  EXPECT_EQ(r.verdict, Verdict::CompErr);
  EXPECT_TRUE(fs::exists(o.outdir / "comp_err" / "dead_alloc" / "verdict.txt"));
}

TEST(Harness, ExternalRunComparesExitCode) {
  HarnessOptions o;
  o.outdir = fresh_dir("ext");
  // dead_alloc.mlir returns 0, so a run stage exiting 0 agrees and 1 does not.
  o.pipelines = parse_pipelines({
      {"pipeline.a.passes", "none"},
      {"pipeline.b.stage.0", "cp {in} {out}"},
      {"pipeline.b.run", "test -s {in}"},
  });
  EXPECT_EQ(diff_test_file(kDeadAlloc, o).verdict, Verdict::Normal);
  o.pipelines = parse_pipelines({
      {"pipeline.a.passes", "none"},
      {"pipeline.b.run", "test ! -s {in}"},
  });
  EXPECT_EQ(diff_test_file(kDeadAlloc, o).verdict, Verdict::ExeDiff);
}

TEST(Harness, ExternalTimeoutMatchesFuelOut) {
  HarnessOptions o;
  o.outdir = fresh_dir("timeout");
  o.pipelines = parse_pipelines({
      {"pipeline.a.passes", "none"},
      {"pipeline.a.fuel", "3"},
      {"pipeline.b.run", "sleep 20; true {in}"},
      {"pipeline.b.timeout", "0.3"},
  });
  auto r = diff_test_file(kDeadAlloc, o);
  EXPECT_EQ(r.pipelines[0].observable.cls, ObservableBehavior::Class::Timeout);
  EXPECT_EQ(r.pipelines[1].observable.cls, ObservableBehavior::Class::Timeout);
  EXPECT_EQ(r.verdict, Verdict::Normal);
}

TEST(Harness, AsmCallCountsAreCompared) {
  HarnessOptions o;
  o.outdir = fresh_dir("asm");
  o.pipelines = parse_pipelines({
      {"pipeline.a.run", "true {in}"},
      {"pipeline.a.asm", "printf '  call foo\\n  ret\\n' > {out}; true {in}"},
      {"pipeline.b.run", "true {in}"},
      {"pipeline.b.asm", "printf '  ret\\n' > {out}; true {in}"},
  });
  auto r = diff_test_file(kDeadAlloc, o);
  EXPECT_EQ(r.pipelines[0].metric, 1u);
  EXPECT_EQ(r.pipelines[1].metric, 0u);
  EXPECT_EQ(r.verdict, Verdict::FlagDiff);
}

TEST(Harness, MalformedFileIsInputError) {
  fs::path dir = fresh_dir("bad");
  std::ofstream(dir / "bad.mlir") << "module {\n  func.func @main( {\n";
  HarnessOptions o;
  o.outdir = dir / "out";
  EXPECT_THROW(diff_test_file(dir / "bad.mlir", o), InputError);
}

TEST(Campaign, InternalPipelinesAgreeAndLayoutExists) {
  HarnessOptions o;
  o.outdir = fresh_dir("campaign");
  o.jobs = 2;
  auto report = run_campaign(20, o);
  EXPECT_EQ(report.records.size(), 20u);
  EXPECT_EQ(report.counts[Verdict::CompErr], 0u);
  std::size_t total = report.infra_errors;
  for (auto& [v, n] : report.counts) total += n;
  EXPECT_EQ(total, 20u);
  for (const char* d : {"comp_err", "exe_diff", "flag_diff", "normal"}) {
    EXPECT_TRUE(fs::is_directory(o.outdir / d)) << d;
  }
  EXPECT_TRUE(fs::exists(o.outdir / "report.txt"));
  EXPECT_TRUE(fs::exists(o.outdir / "report.jsonl"));
  // Seeds where the unoptimised run completes never disagree.
  for (const auto& r : report.records) {
    ASSERT_FALSE(r.infra_error) << *r.infra_error;
    if (r.pipelines[0].observable.cls == ObservableBehavior::Class::Completed) {
      EXPECT_NE(r.verdict, Verdict::ExeDiff) << r.key;
    }
  }
}

TEST(Campaign, VerdictsIndependentOfParallelism) {
  HarnessOptions o;
  o.outdir = fresh_dir("par1");
  auto serial = run_campaign(12, o);
  o.outdir = fresh_dir("par4");
  o.jobs = 4;
  auto parallel = run_campaign(12, o);
  ASSERT_EQ(serial.records.size(), parallel.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    EXPECT_EQ(serial.records[i].key, parallel.records[i].key);
    EXPECT_EQ(serial.records[i].verdict, parallel.records[i].verdict);
  }
}

TEST(Campaign, ZeroSeedsGiveEmptyReport) {
  HarnessOptions o;
  o.outdir = fresh_dir("empty");
  auto report = run_campaign(std::uint64_t{0}, o);
  EXPECT_TRUE(report.records.empty());
  EXPECT_EQ(report.infra_errors, 0u);
}
