#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "irsmith/config.hpp"
#include "irsmith/interpreter.hpp"

namespace irsmith {

/// I/O or process failures that prevent a seed from getting a verdict.
class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The input program could not be parsed or verified.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Verdict : std::uint8_t { CompErr, ExeDiff, FlagDiff, Normal };

/// Folder names: comp_err, exe_diff, flag_diff, normal.
std::string_view verdict_name(Verdict v);
const std::vector<Verdict>& all_verdicts();

struct Stage {
  /// Shell command; `{in}` and `{out}` are replaced by file paths.
  std::string command;
  double timeout_seconds = 10;
};

struct PipelineSpec {
  enum class Kind : std::uint8_t { Internal, External };

  std::string name;
  Kind kind = Kind::Internal;
  /// Internal: pass names for run_pipeline, possibly empty.
  std::vector<std::string> passes;
  std::uint64_t fuel = 10'000'000;
  /// External: transform stages in order, then the run stage.
  std::vector<Stage> stages;
  std::optional<Stage> run;
  /// External, optional: produces assembly whose call sites are counted.
  std::optional<Stage> assembly;
  std::string call_regex = R"(^\s*(call|callq|bl|jal|jalr)\s+\S+)";
};

/// Unoptimized and [const_fold, dce, dead_alloc_elim] internal pipelines.
std::vector<PipelineSpec> default_pipelines();

/// Builds pipelines from `pipeline.<name>.<field>` keys. Fields: `passes`
/// (comma separated, or `none`), `fuel`, `stage.<k>`, `run`, `asm`,
/// `timeout`, `call_regex`. Throws ConfigError on malformed specs.
std::vector<PipelineSpec> parse_pipelines(const std::map<std::string, std::string>& keys);

/// Pipeline file in config syntax.
std::vector<PipelineSpec> load_pipelines(const std::filesystem::path& path);

struct PipelineResult {
  std::string pipeline;
  bool compile_error = false;
  std::string error;
  ObservableBehavior observable;
  /// External run stages expose only the 8-bit exit code.
  bool exit_code_only = false;
  /// Standard output of an external run stage.
  std::optional<std::string> output;
  enum class MetricKind : std::uint8_t { None, Liveness, AsmCalls };
  MetricKind metric_kind = MetricKind::None;
  std::size_t metric = 0;
  /// Interpreter outcome of internal pipelines.
  std::optional<ExecOutcome> exec;
};

/// Observable equality across pipelines; exit-code-only results compare
/// the low 8 bits of the checksum.
bool same_behavior(const PipelineResult& a, const PipelineResult& b);

/// Verdict precedence comp_err > exe_diff > flag_diff > normal. Metrics are
/// only compared between results of the same kind.
Verdict classify(const std::vector<PipelineResult>& results);

struct SeedResult {
  std::string key;  // seed number or input file stem
  std::optional<std::uint64_t> seed;
  Verdict verdict = Verdict::Normal;
  std::vector<PipelineResult> pipelines;
  std::filesystem::path folder;
  /// Set when the seed failed for infrastructural reasons; no verdict then.
  std::optional<std::string> infra_error;
};

struct HarnessOptions {
  GeneratorConfig config;
  std::vector<PipelineSpec> pipelines = default_pipelines();
  std::filesystem::path outdir;
  unsigned jobs = 1;
};

/// Generates the program for `seed` and runs it through every pipeline.
/// The finding folder `<outdir>/<verdict>/<seed>/` receives input.mlir, all
/// artifacts and logs, and verdict.txt. Throws HarnessError on I/O failure.
SeedResult run_seed(std::uint64_t seed, const HarnessOptions& options);

/// Same as run_seed for an existing program file. Throws InputError when it
/// does not parse or verify.
SeedResult diff_test_file(const std::filesystem::path& path, const HarnessOptions& options);

struct CampaignReport {
  std::map<Verdict, std::size_t> counts;
  std::size_t infra_errors = 0;
  std::vector<SeedResult> records;
  double wall_seconds = 0;

  std::string text() const;
  /// One JSON object per seed.
  std::string jsonl() const;
};

/// Runs seeds config.seed + i for i < n on `options.jobs` workers, then
/// writes report.txt and report.jsonl into the output directory.
CampaignReport run_campaign(std::uint64_t n_seeds, const HarnessOptions& options);
CampaignReport run_campaign(const std::vector<std::uint64_t>& seeds,
                            const HarnessOptions& options);

}  // namespace irsmith
