// Acceptance suite: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// any criterion fails. Seed-based criteria share one pass over the seeds so
// each program is generated once.

#include <fmt/format.h>

#include <array>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "irsmith/config.hpp"
#include "irsmith/generator.hpp"
#include "irsmith/harness.hpp"
#include "irsmith/interpreter.hpp"
#include "irsmith/passes.hpp"
#include "irsmith/registry.hpp"
#include "irsmith/subprocess.hpp"
#include "irsmith/textio.hpp"
#include "irsmith/verifier.hpp"

using namespace irsmith;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeeds = 1000;
constexpr std::uint64_t kDeterminismSeeds = 100;
constexpr std::uint64_t kFuel = 10'000'000;

int failures = 0;
// Copy of every result line, written when a path is given on the command line.
std::ofstream report_file;

void emit_line(const std::string& line) {
  fmt::print("{}\n", line);
  std::fflush(stdout);
  if (report_file.is_open()) report_file << line << std::endl;
}

void report(const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  emit_line(fmt::format("{} {}: {}", ok ? "PASS" : "FAIL", name, detail));
}

void skip(const std::string& name, const std::string& detail) {
  emit_line(fmt::format("SKIP {}: {}", name, detail));
}

double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_region_op(const Operation& op) {
  return op.name == "scf.if" || op.name == "scf.for" || op.name == "scf.while";
}

struct ChoiceCount {
  std::size_t region_ops = 0;
  std::size_t ops = 0;

  void add(const Module& m) {
    walk_module(m, [&](const Operation& op) {
      if (op.name == "func.func") return;
      ++ops;
      region_ops += is_region_op(op);
    });
  }
  double fraction() const { return ops ? double(region_ops) / double(ops) : 0; }
};

// ---------------------------------------------------------------------------
// Seed sweep: well-formedness, determinism, round-trip, safety, preservation
// ---------------------------------------------------------------------------

void seed_sweep(const Registry& registry, const GeneratorConfig& evaluation,
                ChoiceCount& eval_choices) {
  std::size_t verified = 0, max_depth = 0, max_block = 0, max_stat_depth = 0;
  std::string first_invalid;
  std::size_t identical = 0;
  std::size_t round_trips = 0;
  std::string first_mismatch;
  std::map<ExecStatus, std::size_t> outcomes;
  std::string first_trap;
  std::size_t terminating = 0, exe_diffs = 0, comp_errs = 0, flag_diffs = 0;
  std::string first_diff;
  double t_gen = 0, t_round = 0, t_run = 0, t_opt = 0, t_det = 0;
  std::size_t total_ops = 0;

  const auto opt_passes = default_pipelines()[1].passes;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    auto t = Clock::now();
    GenerationStats stats;
    Module m = generate_program(registry, evaluation, seed, &stats);
    const auto report_v = verify(m);
    t_gen += since(t);
    if (report_v.ok()) ++verified;
    else if (first_invalid.empty()) first_invalid = fmt::format("seed {}: {}", seed, report_v.str());
    max_depth = std::max(max_depth, max_region_depth(m));
    max_stat_depth = std::max(max_stat_depth, stats.max_region_depth);
    max_block = std::max(max_block, stats.max_block_ops);
    eval_choices.add(m);
    walk_module(m, [&](const Operation&) { ++total_ops; });
    if (!report_v.ok()) continue;

    t = Clock::now();
    const std::string text = emit(m);
    if (seed < kDeterminismSeeds) {
      if (emit(generate_program(registry, evaluation, seed)) == text) ++identical;
    }
    t_det += since(t);

    t = Clock::now();
    try {
      Module back = parse(text);
      std::string why;
      if (structurally_equal(m, back, &why)) ++round_trips;
      else if (first_mismatch.empty()) first_mismatch = fmt::format("seed {}: {}", seed, why);
    } catch (const std::exception& e) {
      if (first_mismatch.empty()) first_mismatch = fmt::format("seed {}: {}", seed, e.what());
    }
    t_round += since(t);

    t = Clock::now();
    const ExecOutcome base = run(m, kFuel);
    t_run += since(t);
    ++outcomes[base.status];
    if (base.status == ExecStatus::Trap && first_trap.empty()) {
      first_trap = fmt::format("seed {}: {}", seed, base.str());
    }
    if (base.status != ExecStatus::Completed) continue;

    ++terminating;
    t = Clock::now();
    PipelineResult noopt;
    noopt.pipeline = "noopt";
    noopt.observable = observable(base);
    noopt.metric_kind = PipelineResult::MetricKind::Liveness;
    noopt.metric = liveness_metric(m);
    PipelineResult opt;
    opt.pipeline = "opt";
    Module om = m;
    try {
      run_pipeline(om, opt_passes);
      opt.observable = observable(run(om, kFuel));
      opt.metric_kind = PipelineResult::MetricKind::Liveness;
      opt.metric = liveness_metric(om);
    } catch (const PassError& e) {
      opt.compile_error = true;
      opt.error = e.what();
    }
    t_opt += since(t);
    switch (classify({noopt, opt})) {
      case Verdict::CompErr:
        ++comp_errs;
        if (first_diff.empty()) first_diff = fmt::format("seed {}: {}", seed, opt.error);
        break;
      case Verdict::ExeDiff:
        ++exe_diffs;
        if (first_diff.empty()) {
          first_diff = fmt::format("seed {}: {} vs {}", seed, noopt.observable.str(),
                                   opt.observable.str());
        }
        break;
      case Verdict::FlagDiff: ++flag_diffs; break;
      case Verdict::Normal: break;
    }
  }

  report("well-formedness",
         verified == kSeeds && max_depth <= 4 && max_block <= 50 && max_stat_depth <= 4,
         fmt::format("{}/{} verified, max region depth {}, max block length {} "
                     "({} ops total, generate+verify {:.1f}s){}",
                     verified, kSeeds, max_depth, max_block, total_ops, t_gen,
                     first_invalid.empty() ? "" : "; first failure " + first_invalid));
  report("determinism", identical == kDeterminismSeeds,
         fmt::format("{}/{} seeds byte-identical across two generations ({:.1f}s)", identical,
                     kDeterminismSeeds, t_det));
  report("round-trip", round_trips == kSeeds,
         fmt::format("{}/{} structurally equal after parse(emit(M)) ({:.1f}s){}", round_trips,
                     kSeeds, t_round, first_mismatch.empty() ? "" : "; first " + first_mismatch));
  const std::size_t traps = outcomes[ExecStatus::Trap];
  report("safety", traps == 0,
         fmt::format("{} completed, {} fuel_exhausted, {} trap over {} seeds at fuel {} ({:.1f}s){}",
                     outcomes[ExecStatus::Completed], outcomes[ExecStatus::FuelExhausted], traps,
                     kSeeds, kFuel, t_run, first_trap.empty() ? "" : "; first " + first_trap));
  report("semantic preservation", exe_diffs == 0 && comp_errs == 0 && terminating > 0,
         fmt::format("{} terminating seeds: {} exe_diff, {} comp_err, {} flag_diff, "
                     "{} normal ({:.1f}s){}",
                     terminating, exe_diffs, comp_errs, flag_diffs,
                     terminating - exe_diffs - comp_errs - flag_diffs, t_opt,
                     first_diff.empty() ? "" : "; first " + first_diff));
}

// ---------------------------------------------------------------------------
// Dead allocation scenario
// ---------------------------------------------------------------------------

void dead_alloc_scenario() {
  const fs::path file = IRSMITH_TEST_DATA "/dead_alloc.mlir";
  Module m = parse(read_file(file));
  Module identity = m;
  run_pipeline(identity, {});
  Module cleaned = m;
  run_pipeline(cleaned, {"dead_alloc_elim"});
  std::size_t memref_ops = 0;
  walk_module(cleaned, [&](const Operation& op) { memref_ops += op.name.starts_with("memref."); });

  HarnessOptions o;
  o.outdir = fs::temp_directory_path() / "irsmith_acceptance_dead_alloc";
  fs::remove_all(o.outdir);
  o.pipelines = parse_pipelines({{"pipeline.identity.passes", "none"},
                                 {"pipeline.dead_alloc_elim.passes", "dead_alloc_elim"}});
  const SeedResult r = diff_test_file(file, o);

  const std::size_t kept = liveness_metric(identity);
  const std::size_t removed = liveness_metric(cleaned);
  report("dead allocation scenario",
         memref_ops == 0 && removed == 0 && kept == 4 && r.verdict == Verdict::FlagDiff,
         fmt::format("memref<3000x3000xi32>: dead_alloc_elim leaves {} memref ops, liveness {}; "
                     "identity liveness {}; harness verdict {}",
                     memref_ops, removed, kept, verdict_name(r.verdict)));
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

void weighted_selection(const ChoiceCount& eval_choices) {
  // Two descriptors with config weights 1 and 10, drawn the way the generator
  // picks its next op: the first index of a weighted sequence.
  Registry r;
  for (const char* name : {"test.light", "test.heavy"}) {
    OpDescriptor d;
    d.name = name;
    d.generatable_types = [](const GeneratorState&) { return std::vector<Type>{}; };
    d.generate = [](GeneratorState&, const OpDescriptor&, const std::optional<Type>&) -> GenOutcome {
      return std::nullopt;
    };
    r.add(d);
  }
  GeneratorConfig c;
  c.op_weights = {{"test.light", 1}, {"test.heavy", 10}};
  const auto enabled = r.enabled_descriptors(c);
  std::vector<double> weights;
  for (const auto& e : enabled) weights.push_back(e.second);
  Rng rng(2024);
  const int draws = 100000;
  int heavy = 0;
  for (int i = 0; i < draws; ++i) {
    WeightedSequence seq(rng, weights);
    heavy += enabled[*seq.next()].first->name == "test.heavy";
  }
  const double freq = heavy / double(draws);
  const double target = 10.0 / 11.0;
  report("weighted selection (sampler)", std::abs(freq - target) <= 0.01,
         fmt::format("weights {{1, 10}}: heavy op chosen {:.4f} of {} draws, target {:.4f} +- 0.01",
                     freq, draws, target));

  const Registry registry = builtin_registry();
  ChoiceCount defaults;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    defaults.add(generate_program(registry, GeneratorConfig{}, seed));
  }
  report("weighted selection (campaign)", eval_choices.fraction() > defaults.fraction(),
         fmt::format("scf.if/for/while share of generated ops over {} seeds: {:.4f} ({} of {}) "
                     "with the evaluation config vs {:.4f} ({} of {}) with default weights",
                     kSeeds, eval_choices.fraction(), eval_choices.region_ops,
                     eval_choices.ops, defaults.fraction(), defaults.region_ops, defaults.ops));
}

void geometric_sampling() {
  const Registry registry = builtin_registry();
  GeneratorConfig c;
  c.typeSampleP = 0.5;
  Module m = generate_program(registry, c, 1);
  GeneratorState state(m, registry, c, 99);
  state.enter_function_block(*m.main_index(), 0);
  const std::size_t universe = state.type_universe().size();
  const int draws = 100000;
  double sum = 0;
  for (int i = 0; i < draws; ++i) sum += static_cast<double>(state.sample_types().size());
  state.exit_block();
  const double mean = sum / draws;
  const double target = 1.0 / c.typeSampleP;
  report("geometric sampling", std::abs(mean - target) <= 0.025 * target,
         fmt::format("mean sampled-type count {:.4f} over {} draws at p = 0.5 "
                     "(type universe {}), target {} +- 2.5%",
                     mean, draws, universe, target));
}

// ---------------------------------------------------------------------------
// Rollback
// ---------------------------------------------------------------------------

void rollback_neutrality() {
  const Registry registry = builtin_registry();
  const auto descriptors = registry.descriptors();
  GeneratorConfig c;
  const int modules = 100;
  const int per_module = 100;
  int unchanged = 0;
  std::string first;
  const auto t = Clock::now();
  for (int k = 0; k < modules; ++k) {
    Module m = generate_program(registry, c, 5000 + k);
    const std::string before = emit(m);
    GeneratorState state(m, registry, c, 7000 + k);
    for (int i = 0; i < per_module; ++i) {
      const std::size_t fn = state.rng().below(m.functions.size());
      const std::size_t len = m.functions[fn].regions[0].entry().ops.size();
      state.enter_function_block(fn, state.rng().below(len));
      const OpDescriptor& d = *descriptors[state.rng().below(descriptors.size())];
      state.attempt([&]() -> GenOutcome {
        d.generate(state, d, std::nullopt);
        return std::nullopt;
      });
      state.exit_block();
      if (emit(m) == before) ++unchanged;
      else if (first.empty()) first = fmt::format("module {} attempt {} ({})", k, i, d.name);
    }
  }
  const int total = modules * per_module;
  report("rollback neutrality", unchanged == total,
         fmt::format("{}/{} forced-failure attempts left the emitted text unchanged ({:.1f}s){}",
                     unchanged, total, since(t), first.empty() ? "" : "; first change " + first));
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void config_fidelity() {
  const std::string dumped = dump_config(GeneratorConfig{});
  const bool table_values = dumped.find("regionDepthLimit = 4\n") != std::string::npos &&
                            dumped.find("blockLength = 50\n") != std::string::npos &&
                            dumped.find("defaultProb = 1\n") != std::string::npos;

  const Registry registry = builtin_registry();
  const auto descriptors = registry.descriptors();
  Rng rng(31337);
  int identical = 0;
  const int configs = 100;
  for (int i = 0; i < configs; ++i) {
    GeneratorConfig c;
    c.regionDepthLimit = rng.range(1, 10);
    c.blockLength = rng.range(0, 200);
    c.defaultProb = rng.uniform() * 5;
    c.typeSampleP = 1.0 - rng.uniform();
    c.reuseProb = rng.uniform();
    c.maxFunctions = rng.range(0, 8);
    c.floatChecksum = rng.bernoulli(0.5);
    c.seed = rng.next_u64();
    const auto n_weights = rng.below(6);
    for (std::uint64_t k = 0; k < n_weights; ++k) {
      c.op_weights[descriptors[rng.below(descriptors.size())]->name] =
          static_cast<double>(rng.below(1000)) / 8.0;
    }
    if (rng.bernoulli(0.3)) c.pipeline_keys["pipeline.p.passes"] = "dce,const_fold";
    if (parse_config(dump_config(c)) == c) ++identical;
  }
  report("config fidelity", table_values && identical == configs,
         fmt::format("defaults dump {} regionDepthLimit 4, blockLength 50, defaultProb 1; "
                     "{}/{} random configs identical after load(dump(c))",
                     table_values ? "contains" : "is missing one of", identical, configs));
}

// ---------------------------------------------------------------------------
// External verifier
// ---------------------------------------------------------------------------

void external_verifier() {
  const char* path = std::getenv("PATH");
  std::optional<fs::path> tool;
  std::stringstream dirs(path ? path : "");
  for (std::string dir; std::getline(dirs, dir, ':');) {
    if (!dir.empty() && fs::exists(fs::path(dir) / "mlir-opt")) {
      tool = fs::path(dir) / "mlir-opt";
      break;
    }
  }
  if (!tool) {
    skip("mlir-opt acceptance", "mlir-opt not found on PATH");
    return;
  }
  const fs::path dir = fs::temp_directory_path() / "irsmith_acceptance_mlir_opt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Registry registry = builtin_registry();
  int accepted = 0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const fs::path file = dir / fmt::format("{}.mlir", seed);
    std::ofstream(file, std::ios::binary) << emit(generate_program(registry, GeneratorConfig{}, seed));
    const auto r = run_shell(fmt::format("'{}' --verify-diagnostics '{}'", tool->string(), file.string()),
                             dir / "out", dir / "err", 60);
    if (r.ok()) ++accepted;
    else if (first.empty()) first = fmt::format("seed {}: {}", seed, read_file(dir / "err"));
  }
  report("mlir-opt acceptance", accepted == 100,
         fmt::format("{}/100 seeds accepted by {}{}", accepted, tool->string(),
                     first.empty() ? "" : "; first rejection " + first));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) report_file.open(argv[1]);
  const auto start = Clock::now();
  const Registry registry = builtin_registry();
  const GeneratorConfig evaluation =
      load_config(std::string(IRSMITH_TEST_DATA "/evaluation.cfg"));

  ChoiceCount eval_choices;
  seed_sweep(registry, evaluation, eval_choices);
  dead_alloc_scenario();
  weighted_selection(eval_choices);
  geometric_sampling();
  rollback_neutrality();
  config_fidelity();
  external_verifier();

  emit_line(fmt::format("{} criteria failed, total {:.1f}s", failures, since(start)));
  return failures ? 1 : 0;
}
