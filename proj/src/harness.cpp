#include "irsmith/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "irsmith/generator.hpp"
#include "irsmith/passes.hpp"
#include "irsmith/subprocess.hpp"
#include "irsmith/textio.hpp"
#include "irsmith/verifier.hpp"

namespace fs = std::filesystem;

namespace irsmith {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::CompErr: return "comp_err";
    case Verdict::ExeDiff: return "exe_diff";
    case Verdict::FlagDiff: return "flag_diff";
    case Verdict::Normal: return "normal";
  }
  return "?";
}

const std::vector<Verdict>& all_verdicts() {
  static const std::vector<Verdict> v{Verdict::CompErr, Verdict::ExeDiff, Verdict::FlagDiff,
                                      Verdict::Normal};
  return v;
}

std::vector<PipelineSpec> default_pipelines() {
  PipelineSpec noopt;
  noopt.name = "noopt";
  PipelineSpec opt;
  opt.name = "opt";
  opt.passes = {"const_fold", "dce", "dead_alloc_elim"};
  return {noopt, opt};
}

// ---------------------------------------------------------------------------
// Pipeline specs
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (!s.empty()) {
    auto comma = s.find(',');
    std::string_view item = s.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || p != value.data() + value.size()) {
    throw ConfigError(fmt::format("'{}' expects a number, got '{}'", key, value));
  }
  return out;
}

bool contains(const std::string& s, std::string_view what) {
  return s.find(what) != std::string::npos;
}

}  // namespace

std::vector<PipelineSpec> parse_pipelines(const std::map<std::string, std::string>& keys) {
  struct Draft {
    std::optional<std::string> passes;
    std::optional<std::string> fuel;
    std::map<std::uint64_t, std::string> stages;
    std::optional<std::string> run, assembly, timeout, call_regex;
  };
  std::map<std::string, Draft> drafts;
  for (const auto& [key, value] : keys) {
    std::string_view rest(key);
    if (!rest.starts_with("pipeline.")) continue;
    rest.remove_prefix(9);
    const auto dot = rest.find('.');
    if (dot == std::string_view::npos || dot == 0) {
      throw ConfigError(fmt::format("malformed pipeline key '{}'", key));
    }
    Draft& d = drafts[std::string(rest.substr(0, dot))];
    const std::string field(rest.substr(dot + 1));
    if (field == "passes") d.passes = value;
    else if (field == "fuel") d.fuel = value;
    else if (field == "run") d.run = value;
    else if (field == "asm") d.assembly = value;
    else if (field == "timeout") d.timeout = value;
    else if (field == "call_regex") d.call_regex = value;
    else if (field.starts_with("stage.")) {
      d.stages[parse_number<std::uint64_t>(key, field.substr(6))] = value;
    } else {
      throw ConfigError(fmt::format("unknown pipeline field in '{}'", key));
    }
  }

  std::vector<PipelineSpec> out;
  for (const auto& [name, d] : drafts) {
    PipelineSpec p;
    p.name = name;
    const bool external = d.run || !d.stages.empty() || d.assembly;
    if (external && (d.passes || d.fuel)) {
      throw ConfigError(fmt::format("pipeline '{}' mixes passes with external stages", name));
    }
    if (!external) {
      if (!d.passes) throw ConfigError(fmt::format("pipeline '{}' has no passes or stages", name));
      p.kind = PipelineSpec::Kind::Internal;
      if (*d.passes != "none") p.passes = split_list(*d.passes);
      for (const auto& pass : p.passes) {
        if (std::find(pass_names().begin(), pass_names().end(), pass) == pass_names().end()) {
          throw ConfigError(fmt::format("pipeline '{}': unknown pass '{}'", name, pass));
        }
      }
      if (d.fuel) p.fuel = parse_number<std::uint64_t>("pipeline." + name + ".fuel", *d.fuel);
      out.push_back(std::move(p));
      continue;
    }
    p.kind = PipelineSpec::Kind::External;
    double timeout = 10;
    if (d.timeout) {
      timeout = parse_number<double>("pipeline." + name + ".timeout", *d.timeout);
      if (!(timeout > 0)) throw ConfigError(fmt::format("pipeline '{}': timeout must be positive", name));
    }
    for (const auto& [k, cmd] : d.stages) {
      if (!contains(cmd, "{in}") || !contains(cmd, "{out}")) {
        throw ConfigError(
            fmt::format("pipeline '{}' stage {} needs both {{in}} and {{out}}", name, k));
      }
      p.stages.push_back({cmd, timeout});
    }
    if (!d.run) throw ConfigError(fmt::format("pipeline '{}' has no run stage", name));
    if (!contains(*d.run, "{in}")) {
      throw ConfigError(fmt::format("pipeline '{}' run stage needs {{in}}", name));
    }
    p.run = Stage{*d.run, timeout};
    if (d.assembly) {
      if (!contains(*d.assembly, "{in}")) {
        throw ConfigError(fmt::format("pipeline '{}' asm stage needs {{in}}", name));
      }
      p.assembly = Stage{*d.assembly, timeout};
    }
    if (d.call_regex) p.call_regex = *d.call_regex;
    try {
      std::regex check(p.call_regex);
    } catch (const std::regex_error& e) {
      throw ConfigError(fmt::format("pipeline '{}': bad call_regex: {}", name, e.what()));
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PipelineSpec> load_pipelines(const fs::path& path) {
  auto config = load_config(path.string());
  auto pipelines = parse_pipelines(config.pipeline_keys);
  if (pipelines.empty()) {
    throw ConfigError(fmt::format("'{}' defines no pipelines", path.string()));
  }
  return pipelines;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

bool same_behavior(const PipelineResult& a, const PipelineResult& b) {
  const auto& x = a.observable;
  const auto& y = b.observable;
  using C = ObservableBehavior::Class;
  if (x.cls == C::Trap || y.cls == C::Trap || x.cls != y.cls) return false;
  if (x.cls == C::Timeout) return true;
  if (a.exit_code_only || b.exit_code_only) {
    if ((x.checksum & 0xFF) != (y.checksum & 0xFF)) return false;
  } else if (x.checksum != y.checksum) {
    return false;
  }
  if (a.output && b.output && *a.output != *b.output) return false;
  return true;
}

Verdict classify(const std::vector<PipelineResult>& results) {
  for (const auto& r : results) {
    if (r.compile_error) return Verdict::CompErr;
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      if (!same_behavior(results[i], results[j])) return Verdict::ExeDiff;
    }
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      const auto& a = results[i];
      const auto& b = results[j];
      if (a.metric_kind == PipelineResult::MetricKind::None || a.metric_kind != b.metric_kind) {
        continue;
      }
      if (a.metric != b.metric) return Verdict::FlagDiff;
    }
  }
  return Verdict::Normal;
}

// ---------------------------------------------------------------------------
// Running one program
// ---------------------------------------------------------------------------

namespace {

void write_file(const fs::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw HarnessError(fmt::format("cannot write '{}'", p.string()));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw HarnessError(fmt::format("cannot read '{}'", p.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string substitute(std::string cmd, const fs::path& in, const fs::path& out) {
  auto replace = [&](std::string_view key, const std::string& value) {
    for (auto pos = cmd.find(key); pos != std::string::npos;
         pos = cmd.find(key, pos + value.size())) {
      cmd.replace(pos, key.size(), value);
    }
  };
  replace("{in}", in.string());
  replace("{out}", out.string());
  return cmd;
}

std::string describe(const ProcessResult& r) {
  if (r.timed_out) return "timed out";
  if (r.signal) return fmt::format("killed by signal {}", r.signal);
  return fmt::format("exit code {}", r.exit_code);
}

PipelineResult run_internal(const PipelineSpec& p, const Module& input, const fs::path& dir) {
  PipelineResult r;
  r.pipeline = p.name;
  Module m = input;
  std::string log;
  try {
    for (const auto& s : run_pipeline(m, p.passes)) {
      log += fmt::format("{}: removed {} rewritten {}\n", s.pass, s.ops_removed,
                         s.ops_rewritten);
    }
  } catch (const PassError& e) {
    r.compile_error = true;
    r.error = e.what();
    write_file(dir / (p.name + ".log"), log + r.error + "\n");
    return r;
  }
  write_file(dir / (p.name + ".mlir"), emit(m));
  r.exec = run(m, p.fuel);
  r.observable = observable(*r.exec);
  r.metric_kind = PipelineResult::MetricKind::Liveness;
  r.metric = liveness_metric(m);
  log += fmt::format("outcome: {}\nliveness: {}\n", r.exec->str(), r.metric);
  write_file(dir / (p.name + ".log"), log);
  return r;
}

PipelineResult run_external(const PipelineSpec& p, const fs::path& input, const fs::path& dir) {
  PipelineResult r;
  r.pipeline = p.name;
  fs::path current = input;
  for (std::size_t k = 0; k < p.stages.size(); ++k) {
    const fs::path out = dir / fmt::format("{}.stage{}.out", p.name, k);
    const auto base = dir / fmt::format("{}.stage{}", p.name, k);
    auto pr = run_shell(substitute(p.stages[k].command, current, out),
                        base.string() + ".stdout", base.string() + ".stderr",
                        p.stages[k].timeout_seconds);
    if (!pr.ok()) {
      r.compile_error = true;
      r.error = fmt::format("stage {} {}", k, describe(pr));
      return r;
    }
    current = out;
  }
  if (p.assembly) {
    const fs::path out = dir / (p.name + ".s");
    const auto base = dir / (p.name + ".asm");
    auto pr = run_shell(substitute(p.assembly->command, current, out), base.string() + ".stdout",
                        base.string() + ".stderr", p.assembly->timeout_seconds);
    if (!pr.ok()) {
      r.compile_error = true;
      r.error = fmt::format("asm stage {}", describe(pr));
      return r;
    }
    const fs::path listing =
        contains(p.assembly->command, "{out}") ? out : fs::path(base.string() + ".stdout");
    const std::regex call(p.call_regex);
    std::istringstream lines(read_file(listing));
    std::size_t calls = 0;
    for (std::string line; std::getline(lines, line);) {
      if (std::regex_search(line, call)) ++calls;
    }
    r.metric_kind = PipelineResult::MetricKind::AsmCalls;
    r.metric = calls;
  }
  const auto base = dir / (p.name + ".run");
  const fs::path out = dir / (p.name + ".run.out");
  auto pr = run_shell(substitute(p.run->command, current, out), base.string() + ".stdout",
                      base.string() + ".stderr", p.run->timeout_seconds);
  using C = ObservableBehavior::Class;
  r.exit_code_only = true;
  if (pr.timed_out) {
    r.observable = {C::Timeout, 0};
  } else if (pr.signal) {
    r.observable = {C::Trap, 0};
    r.error = describe(pr);
  } else {
    r.observable = {C::Completed, static_cast<std::uint32_t>(pr.exit_code)};
    r.output = read_file(base.string() + ".stdout");
  }
  return r;
}

std::string verdict_text(const SeedResult& s) {
  std::string out = fmt::format("verdict: {}\n", verdict_name(s.verdict));
  if (s.seed) out += fmt::format("seed: {}\n", *s.seed);
  out += fmt::format("input: {}\n", s.key);
  for (const auto& r : s.pipelines) {
    out += fmt::format("pipeline {}: ", r.pipeline);
    if (r.compile_error) {
      out += fmt::format("compile error: {}\n", r.error);
      continue;
    }
    out += r.observable.str();
    if (r.exec) out += fmt::format(" [{}]", r.exec->str());
    if (r.exit_code_only) out += " [exit code only]";
    switch (r.metric_kind) {
      case PipelineResult::MetricKind::Liveness: out += fmt::format(" liveness={}", r.metric); break;
      case PipelineResult::MetricKind::AsmCalls: out += fmt::format(" asm_calls={}", r.metric); break;
      case PipelineResult::MetricKind::None: break;
    }
    if (!r.error.empty()) out += fmt::format(" ({})", r.error);
    out += "\n";
  }
  return out;
}

void ensure_layout(const fs::path& outdir) {
  std::error_code ec;
  for (Verdict v : all_verdicts()) fs::create_directories(outdir / verdict_name(v), ec);
  fs::create_directories(outdir / "work", ec);
  if (ec) throw HarnessError(fmt::format("cannot create '{}': {}", outdir.string(), ec.message()));
}

SeedResult run_module(const Module& module, const std::string& text, SeedResult result,
                      const HarnessOptions& options) {
  const fs::path work = options.outdir / "work" / result.key;
  std::error_code ec;
  fs::remove_all(work, ec);
  fs::create_directories(work, ec);
  if (ec) throw HarnessError(fmt::format("cannot create '{}': {}", work.string(), ec.message()));
  const fs::path input = work / "input.mlir";
  write_file(input, text);

  for (const auto& p : options.pipelines) {
    if (p.kind == PipelineSpec::Kind::Internal) {
      result.pipelines.push_back(run_internal(p, module, work));
    } else {
      result.pipelines.push_back(run_external(p, input, work));
    }
  }
  result.verdict = classify(result.pipelines);
  write_file(work / "verdict.txt", verdict_text(result));

  const fs::path dest = options.outdir / verdict_name(result.verdict) / result.key;
  fs::remove_all(dest, ec);
  fs::create_directories(dest.parent_path(), ec);
  fs::rename(work, dest, ec);
  if (ec) throw HarnessError(fmt::format("cannot move findings to '{}': {}", dest.string(), ec.message()));
  result.folder = dest;
  return result;
}

const Registry& shared_registry() {
  static const Registry registry = builtin_registry();
  return registry;
}

}  // namespace

SeedResult run_seed(std::uint64_t seed, const HarnessOptions& options) {
  ensure_layout(options.outdir);
  GeneratorConfig config = options.config;
  config.seed = seed;
  Module m = generate_program(shared_registry(), config, seed);
  SeedResult result;
  result.key = std::to_string(seed);
  result.seed = seed;
  return run_module(m, emit(m), std::move(result), options);
}

SeedResult diff_test_file(const fs::path& path, const HarnessOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  Module m;
  try {
    m = parse(text);
  } catch (const ParseError& e) {
    throw InputError(fmt::format("{}:{}:{}: {}", path.string(), e.line(), e.column(), e.what()));
  }
  auto report = verify(m);
  if (!report.ok()) {
    throw InputError(fmt::format("{} does not verify:\n{}", path.string(), report.str()));
  }
  ensure_layout(options.outdir);
  SeedResult result;
  result.key = path.stem().string();
  return run_module(m, text, std::move(result), options);
}

// ---------------------------------------------------------------------------
// Campaigns
// ---------------------------------------------------------------------------

std::string CampaignReport::text() const {
  std::string out = fmt::format("seeds: {}\n", records.size());
  for (Verdict v : all_verdicts()) {
    auto it = counts.find(v);
    out += fmt::format("{}: {}\n", verdict_name(v), it == counts.end() ? 0 : it->second);
  }
  out += fmt::format("infrastructure errors: {}\n", infra_errors);
  out += fmt::format("wall time: {:.2f}s\n", wall_seconds);
  for (const auto& r : records) {
    if (r.infra_error) {
      out += fmt::format("{} error: {}\n", r.key, *r.infra_error);
    } else {
      out += fmt::format("{} {}\n", r.key, verdict_name(r.verdict));
    }
  }
  return out;
}

std::string CampaignReport::jsonl() const {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j;
    j["key"] = r.key;
    if (r.seed) j["seed"] = *r.seed;
    if (r.infra_error) {
      j["error"] = *r.infra_error;
    } else {
      j["verdict"] = verdict_name(r.verdict);
      j["folder"] = r.folder.string();
      auto& ps = j["pipelines"] = nlohmann::json::array();
      for (const auto& p : r.pipelines) {
        nlohmann::json pj;
        pj["name"] = p.pipeline;
        pj["compile_error"] = p.compile_error;
        if (!p.error.empty()) pj["error"] = p.error;
        pj["observable"] = p.observable.str();
        if (p.metric_kind != PipelineResult::MetricKind::None) {
          pj["metric_kind"] =
              p.metric_kind == PipelineResult::MetricKind::Liveness ? "liveness" : "asm_calls";
          pj["metric"] = p.metric;
        }
        if (p.exec) pj["steps"] = p.exec->steps_used;
        ps.push_back(std::move(pj));
      }
    }
    out += j.dump() + "\n";
  }
  return out;
}

CampaignReport run_campaign(std::uint64_t n_seeds, const HarnessOptions& options) {
  std::vector<std::uint64_t> seeds(n_seeds);
  for (std::uint64_t i = 0; i < n_seeds; ++i) seeds[i] = options.config.seed + i;
  return run_campaign(seeds, options);
}

CampaignReport run_campaign(const std::vector<std::uint64_t>& seeds,
                            const HarnessOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  ensure_layout(options.outdir);
  CampaignReport report;
  report.records.resize(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      SeedResult r;
      try {
        r = run_seed(seeds[i], options);
      } catch (const std::exception& e) {
        r = SeedResult{};
        r.key = std::to_string(seeds[i]);
        r.seed = seeds[i];
        r.infra_error = e.what();
      }
      report.records[i] = std::move(r);
    }
  };
  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (Verdict v : all_verdicts()) report.counts[v] = 0;
  for (const auto& r : report.records) {
    if (r.infra_error) ++report.infra_errors;
    else ++report.counts[r.verdict];
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(options.outdir / "report.txt", report.text());
  write_file(options.outdir / "report.jsonl", report.jsonl());
  return report;
}

}  // namespace irsmith
