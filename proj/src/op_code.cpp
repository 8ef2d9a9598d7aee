#include "irsmith/op_code.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <unordered_map>

namespace irsmith {

namespace {

struct OpInfo {
  OpCode code;
  std::string_view name;
  OpKind kind;
};

constexpr std::array kOpInfos = {
#define IRSMITH_INFO(e, n, k) OpInfo{OpCode::e, n, OpKind::k},
    IRSMITH_BUILTIN_OPS(IRSMITH_INFO)
#undef IRSMITH_INFO
};

constexpr std::array kOpCodes = {
#define IRSMITH_CODE(e, n, k) OpCode::e,
    IRSMITH_BUILTIN_OPS(IRSMITH_CODE)
#undef IRSMITH_CODE
};

constexpr std::array<std::string_view, 10> kCmpINames = {
    "eq", "ne", "slt", "sle", "sgt", "sge", "ult", "ule", "ugt", "uge"};
constexpr std::array<std::string_view, 16> kCmpFNames = {
    "false", "oeq", "ogt", "oge", "olt", "ole", "one", "ord",
    "ueq",   "ugt", "uge", "ult", "ule", "une", "uno", "true"};

const std::unordered_map<std::string_view, OpCode>& name_index() {
  static const auto* index = [] {
    auto* m = new std::unordered_map<std::string_view, OpCode>();
    for (const auto& info : kOpInfos) m->emplace(info.name, info.code);
    return m;
  }();
  return *index;
}

}  // namespace

OpCode opcode_for(std::string_view name) {
  const auto& index = name_index();
  auto it = index.find(name);
  return it == index.end() ? OpCode::Custom : it->second;
}

std::string_view opcode_name(OpCode code) {
  auto i = static_cast<std::size_t>(code);
  return i < kOpInfos.size() ? kOpInfos[i].name : std::string_view("<custom>");
}

OpKind opcode_kind(OpCode code) {
  auto i = static_cast<std::size_t>(code);
  return i < kOpInfos.size() ? kOpInfos[i].kind : OpKind::Custom;
}

std::span<const OpCode> builtin_opcodes() { return kOpCodes; }

std::string_view dialect_of(std::string_view op_name) {
  auto dot = op_name.find('.');
  return dot == std::string_view::npos ? std::string_view{} : op_name.substr(0, dot);
}

std::span<const std::string_view> cmpi_predicate_names() { return kCmpINames; }
std::span<const std::string_view> cmpf_predicate_names() { return kCmpFNames; }

std::optional<CmpIPredicate> parse_cmpi_predicate(std::string_view s) {
  auto it = std::find(kCmpINames.begin(), kCmpINames.end(), s);
  if (it == kCmpINames.end()) return std::nullopt;
  return static_cast<CmpIPredicate>(it - kCmpINames.begin());
}

std::optional<CmpFPredicate> parse_cmpf_predicate(std::string_view s) {
  auto it = std::find(kCmpFNames.begin(), kCmpFNames.end(), s);
  if (it == kCmpFNames.end()) return std::nullopt;
  return static_cast<CmpFPredicate>(it - kCmpFNames.begin());
}

}  // namespace irsmith
