#include "irsmith/type.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace irsmith {

namespace {

bool valid_int_width(unsigned w) {
  return w == 1 || w == 8 || w == 16 || w == 32 || w == 64;
}

bool valid_float_width(unsigned w) { return w == 16 || w == 32 || w == 64; }

std::optional<unsigned> parse_width(std::string_view digits) {
  unsigned w = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), w);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
    return std::nullopt;
  }
  return w;
}

std::optional<Type> parse_scalar(std::string_view text) {
  if (text == "index") return Type::index();
  if (text.size() < 2) return std::nullopt;
  auto w = parse_width(text.substr(1));
  if (!w) return std::nullopt;
  if (text[0] == 'i' && valid_int_width(*w)) return Type::integer(*w);
  if (text[0] == 'f' && valid_float_width(*w)) return Type::floating(*w);
  return std::nullopt;
}

}  // namespace

Type Type::integer(unsigned width) {
  if (!valid_int_width(width)) {
    throw std::invalid_argument("unsupported integer width " + std::to_string(width));
  }
  Type t;
  t.kind_ = TypeKind::Int;
  t.width_ = width;
  return t;
}

Type Type::floating(unsigned width) {
  if (!valid_float_width(width)) {
    throw std::invalid_argument("unsupported float width " + std::to_string(width));
  }
  Type t;
  t.kind_ = TypeKind::Float;
  t.width_ = width;
  return t;
}

Type Type::index() {
  Type t;
  t.kind_ = TypeKind::Index;
  t.width_ = kIndexWidth;
  return t;
}

Type Type::memref(const Type& element, std::vector<std::int64_t> shape) {
  if (!element.is_scalar()) {
    throw std::invalid_argument("memref element must be a scalar type");
  }
  Type t;
  t.kind_ = TypeKind::MemRef;
  t.width_ = element.width_;
  t.element_kind_ = element.kind_;
  t.shape_ = std::move(shape);
  return t;
}

Type Type::element() const {
  if (!is_memref()) return *this;
  Type t;
  t.kind_ = element_kind_;
  t.width_ = width_;
  return t;
}

std::uint64_t Type::num_elements() const {
  std::uint64_t n = 1;
  for (auto d : shape_) {
    auto ud = static_cast<std::uint64_t>(std::max<std::int64_t>(d, 0));
    if (ud != 0 && n > UINT64_MAX / ud) return UINT64_MAX;
    n *= ud;
  }
  return n;
}

std::string Type::str() const {
  switch (kind_) {
    case TypeKind::Int:
      return "i" + std::to_string(width_);
    case TypeKind::Float:
      return "f" + std::to_string(width_);
    case TypeKind::Index:
      return "index";
    case TypeKind::MemRef: {
      std::string s = "memref<";
      for (auto d : shape_) s += std::to_string(d) + "x";
      return s + element().str() + ">";
    }
  }
  return "<invalid>";
}

bool Type::well_formed() const {
  switch (kind_) {
    case TypeKind::Int:
      return valid_int_width(width_);
    case TypeKind::Float:
      return valid_float_width(width_);
    case TypeKind::Index:
      return width_ == kIndexWidth;
    case TypeKind::MemRef:
      if (shape_.empty() || shape_.size() > kMaxRank) return false;
      for (auto d : shape_) {
        if (d < 1 || d > kMaxDim) return false;
      }
      return element_kind_ != TypeKind::MemRef && element().well_formed();
  }
  return false;
}

const std::vector<Type>& scalar_types() {
  static const std::vector<Type> types = {
      Type::integer(1),   Type::integer(8),   Type::integer(16),
      Type::integer(32),  Type::integer(64),  Type::floating(16),
      Type::floating(32), Type::floating(64), Type::index()};
  return types;
}

const std::vector<unsigned>& int_widths() {
  static const std::vector<unsigned> w = {1, 8, 16, 32, 64};
  return w;
}

const std::vector<unsigned>& float_widths() {
  static const std::vector<unsigned> w = {16, 32, 64};
  return w;
}

std::optional<Type> parse_type(std::string_view text) {
  constexpr std::string_view prefix = "memref<";
  if (!text.starts_with(prefix)) return parse_scalar(text);
  if (!text.ends_with(">")) return std::nullopt;
  std::string_view body = text.substr(prefix.size(), text.size() - prefix.size() - 1);
  std::vector<std::int64_t> shape;
  while (true) {
    auto x = body.find('x');
    if (x == std::string_view::npos) break;
    std::string_view dim = body.substr(0, x);
    std::int64_t d = 0;
    auto [ptr, ec] = std::from_chars(dim.data(), dim.data() + dim.size(), d);
    if (ec != std::errc{} || ptr != dim.data() + dim.size() || dim.empty()) {
      // The remainder is the element type (e.g. `index` contains an 'x').
      break;
    }
    shape.push_back(d);
    body.remove_prefix(x + 1);
  }
  auto elem = parse_scalar(body);
  if (!elem || shape.empty()) return std::nullopt;
  return Type::memref(*elem, std::move(shape));
}

}  // namespace irsmith
