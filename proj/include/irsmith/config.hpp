#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace irsmith {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratorConfig {
  std::int64_t regionDepthLimit = 4;
  std::int64_t blockLength = 50;
  double defaultProb = 1.0;
  double typeSampleP = 0.5;
  double reuseProb = 0.8;
  std::int64_t maxFunctions = 4;
  bool floatChecksum = false;
  std::uint64_t seed = 0;
  /// Per-op selection weights keyed by qualified op name.
  std::map<std::string, double> op_weights;
  /// `pipeline.*` keys, kept verbatim for the harness.
  std::map<std::string, std::string> pipeline_keys;

  /// Config override for `op`, if any.
  std::optional<double> weight_override(std::string_view op) const;

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

/// Parses `key = value` text over the defaults. `source` names the input
/// in error messages. Unknown op names in weight keys are kept; a warning
/// per such key is appended to `warnings` when given.
GeneratorConfig parse_config(std::string_view text, std::string_view source = "<config>",
                             std::vector<std::string>* warnings = nullptr);

/// Defaults, or defaults overlaid with the file at `path`.
GeneratorConfig load_config(const std::optional<std::string>& path,
                            std::vector<std::string>* warnings = nullptr);

/// Canonical, key-sorted text; parse_config(dump_config(c)) == c.
std::string dump_config(const GeneratorConfig& config);

/// Throws ConfigError if a field is outside its documented range.
void validate(const GeneratorConfig& config);

}  // namespace irsmith
