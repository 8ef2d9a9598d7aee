#include "irsmith/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "irsmith/op_schema.hpp"

namespace irsmith {

std::optional<double> GeneratorConfig::weight_override(std::string_view op) const {
  auto it = op_weights.find(std::string(op));
  if (it == op_weights.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class LineParser {
 public:
  LineParser(std::string_view source, std::size_t line) : source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(fmt::format("{}:{}: {}", source_, line_, msg));
  }

  std::int64_t integer(std::string_view key, std::string_view v) const {
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
      fail(fmt::format("'{}' expects an integer, got '{}'", key, v));
    }
    return out;
  }

  std::uint64_t unsigned_integer(std::string_view key, std::string_view v) const {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
      fail(fmt::format("'{}' expects an unsigned integer, got '{}'", key, v));
    }
    return out;
  }

  double real(std::string_view key, std::string_view v) const {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out)) {
      fail(fmt::format("'{}' expects a number, got '{}'", key, v));
    }
    return out;
  }

  bool boolean(std::string_view key, std::string_view v) const {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(fmt::format("'{}' expects true or false, got '{}'", key, v));
  }

 private:
  std::string_view source_;
  std::size_t line_;
};

void check_ranges(const GeneratorConfig& c, const std::function<void(const std::string&)>& fail) {
  if (c.regionDepthLimit < 1) fail("regionDepthLimit must be at least 1");
  if (c.blockLength < 0) fail("blockLength must be nonnegative");
  if (!(c.defaultProb >= 0)) fail("defaultProb must be nonnegative");
  if (!(c.typeSampleP > 0 && c.typeSampleP <= 1)) fail("typeSampleP must lie in (0, 1]");
  if (!(c.reuseProb >= 0 && c.reuseProb <= 1)) fail("reuseProb must lie in [0, 1]");
  if (c.maxFunctions < 0) fail("maxFunctions must be nonnegative");
  for (const auto& [op, w] : c.op_weights) {
    if (!(w >= 0) || !std::isfinite(w)) fail(fmt::format("weight of '{}' must be nonnegative", op));
  }
}

}  // namespace

void validate(const GeneratorConfig& config) {
  check_ranges(config, [](const std::string& m) { throw ConfigError(m); });
}

GeneratorConfig parse_config(std::string_view text, std::string_view source,
                             std::vector<std::string>* warnings) {
  GeneratorConfig c;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    LineParser lp(source, line_no);
    auto eq = line.find('=');
    if (eq == std::string_view::npos) lp.fail("expected 'key = value'");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) lp.fail("missing key");
    if (value.empty()) lp.fail(fmt::format("missing value for '{}'", key));

    if (key == "regionDepthLimit") {
      c.regionDepthLimit = lp.integer(key, value);
    } else if (key == "blockLength") {
      c.blockLength = lp.integer(key, value);
    } else if (key == "defaultProb") {
      c.defaultProb = lp.real(key, value);
    } else if (key == "typeSampleP") {
      c.typeSampleP = lp.real(key, value);
    } else if (key == "reuseProb") {
      c.reuseProb = lp.real(key, value);
    } else if (key == "maxFunctions") {
      c.maxFunctions = lp.integer(key, value);
    } else if (key == "floatChecksum") {
      c.floatChecksum = lp.boolean(key, value);
    } else if (key == "seed") {
      c.seed = lp.unsigned_integer(key, value);
    } else if (key.starts_with("pipeline.")) {
      c.pipeline_keys[std::string(key)] = std::string(value);
    } else if (key.find('.') != std::string_view::npos) {
      c.op_weights[std::string(key)] = lp.real(key, value);
      if (warnings && !is_known_op(key)) {
        warnings->push_back(fmt::format("{}:{}: unknown op '{}' (kept)", source, line_no, key));
      }
    } else {
      lp.fail(fmt::format("unknown key '{}'", key));
    }
    check_ranges(c, [&](const std::string& m) { lp.fail(m); });
  }
  return c;
}

GeneratorConfig load_config(const std::optional<std::string>& path,
                            std::vector<std::string>* warnings) {
  if (!path) return GeneratorConfig{};
  std::ifstream in(*path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", *path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), *path, warnings);
}

std::string dump_config(const GeneratorConfig& c) {
  std::map<std::string, std::string> entries{
      {"blockLength", std::to_string(c.blockLength)},
      {"defaultProb", format_double(c.defaultProb)},
      {"floatChecksum", c.floatChecksum ? "true" : "false"},
      {"maxFunctions", std::to_string(c.maxFunctions)},
      {"regionDepthLimit", std::to_string(c.regionDepthLimit)},
      {"reuseProb", format_double(c.reuseProb)},
      {"seed", std::to_string(c.seed)},
      {"typeSampleP", format_double(c.typeSampleP)},
  };
  for (const auto& [op, w] : c.op_weights) entries[op] = format_double(w);
  for (const auto& [k, v] : c.pipeline_keys) entries[k] = v;
  std::string out;
  for (const auto& [k, v] : entries) out += fmt::format("{} = {}\n", k, v);
  return out;
}

}  // namespace irsmith
