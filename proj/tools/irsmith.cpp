// Command-line driver: program generation, config dumps and differential tests.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "irsmith/config.hpp"
#include "irsmith/generator.hpp"
#include "irsmith/harness.hpp"
#include "irsmith/registry.hpp"
#include "irsmith/textio.hpp"

namespace fs = std::filesystem;
using namespace irsmith;

namespace {

constexpr int kUsageError = 1;
constexpr int kInfraError = 2;

GeneratorConfig read_config(const std::optional<std::string>& path) {
  std::vector<std::string> warnings;
  auto config = load_config(path, &warnings);
  for (const auto& w : warnings) fmt::print(stderr, "warning: {}\n", w);
  return config;
}

std::vector<PipelineSpec> read_pipelines(const std::optional<std::string>& path,
                                         const GeneratorConfig& config) {
  if (path) return load_pipelines(*path);
  if (!config.pipeline_keys.empty()) return parse_pipelines(config.pipeline_keys);
  return default_pipelines();
}

void print_summary(const CampaignReport& report) {
  fmt::print(stderr, "{} seed(s) in {:.1f}s:", report.records.size(), report.wall_seconds);
  for (Verdict v : all_verdicts()) {
    auto it = report.counts.find(v);
    fmt::print(stderr, " {}={}", verdict_name(v), it == report.counts.end() ? 0 : it->second);
  }
  fmt::print(stderr, " infra_errors={}\n", report.infra_errors);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random program generator and differential tester for a small SSA IR"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;

  auto* gen = app.add_subcommand("generate", "Emit one random program");
  gen->add_option("--seed", seed, "Seed (default: derived from the clock)");
  gen->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  gen->add_option("--output", output, "Write <seed>.mlir into this directory");

  auto* dump = app.add_subcommand("dump-config", "Print the effective config");
  dump->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);

  std::uint64_t n_seeds = 0;
  std::optional<std::string> pipelines_path;
  unsigned jobs = 1;
  auto* diff = app.add_subcommand("diff-test", "Run a differential-testing campaign");
  diff->add_option("--seeds", n_seeds, "Number of seeds, starting at the config seed")->required();
  diff->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  diff->add_option("--output", output, "Output directory")->required();
  diff->add_option("--pipelines", pipelines_path, "Pipeline spec file")->check(CLI::ExistingFile);
  diff->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));

  std::string input_file;
  auto* diff_file = app.add_subcommand("diff-test-file", "Differentially test one program file");
  diff_file->add_option("file", input_file, "Program file")->required();
  diff_file->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  diff_file->add_option("--output", output, "Output directory")->required();
  diff_file->add_option("--pipelines", pipelines_path, "Pipeline spec file")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*gen) {
      GeneratorConfig config = read_config(config_path);
      if (!seed) {
        seed = static_cast<std::uint64_t>(
            std::chrono::system_clock::now().time_since_epoch().count());
        fmt::print(stderr, "seed: {}\n", *seed);
      }
      config.seed = *seed;
      const std::string text = emit(generate_program(config));
      if (!output) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return 0;
      }
      fs::create_directories(*output);
      const fs::path path = fs::path(*output) / fmt::format("{}.mlir", *seed);
      std::ofstream out(path, std::ios::binary);
      out << text;
      if (!out) {
        fmt::print(stderr, "error: cannot write '{}'\n", path.string());
        return kInfraError;
      }
      fmt::print(stderr, "wrote {}\n", path.string());
      return 0;
    }
    if (*dump) {
      fmt::print("{}", dump_config(read_config(config_path)));
      return 0;
    }

    HarnessOptions options;
    options.config = read_config(config_path);
    options.pipelines = read_pipelines(pipelines_path, options.config);
    options.outdir = *output;
    options.jobs = jobs;

    if (*diff) {
      auto report = run_campaign(n_seeds, options);
      fmt::print("{}", report.text());
      print_summary(report);
      for (const auto& r : report.records) {
        if (r.infra_error) fmt::print(stderr, "seed {}: {}\n", r.key, *r.infra_error);
      }
      return report.infra_errors ? kInfraError : 0;
    }

    auto result = diff_test_file(input_file, options);
    fmt::print("{}\n", verdict_name(result.verdict));
    fmt::print(stderr, "finding folder: {}\n", result.folder.string());
    return 0;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kUsageError;
  } catch (const InputError& e) {
    fmt::print(stderr, "input error: {}\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInfraError;
  }
}
