#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace irsmith {

enum class TypeKind : std::uint8_t { Int, Float, Index, MemRef };

/// A value type of the generated IR subset.
///
/// Scalars are signless integers (i1, i8, i16, i32, i64), IEEE floats (f16,
/// f32, f64) and `index`. A memref is a statically shaped buffer of rank 1 to
/// 3 whose element is a scalar; it never carries strides or a layout map.
class Type {
 public:
  static constexpr std::int64_t kMaxDim = 100000;
  static constexpr std::size_t kMaxRank = 3;
  static constexpr unsigned kIndexWidth = 64;

  Type() = default;

  static Type integer(unsigned width);
  static Type floating(unsigned width);
  static Type index();
  static Type memref(const Type& element, std::vector<std::int64_t> shape);

  TypeKind kind() const { return kind_; }
  bool is_int() const { return kind_ == TypeKind::Int; }
  bool is_float() const { return kind_ == TypeKind::Float; }
  bool is_index() const { return kind_ == TypeKind::Index; }
  bool is_memref() const { return kind_ == TypeKind::MemRef; }
  bool is_scalar() const { return kind_ != TypeKind::MemRef; }
  /// Integer or index.
  bool is_int_like() const { return is_int() || is_index(); }

  /// Bit width of a scalar (64 for index); element width for memrefs.
  unsigned width() const { return width_; }

  /// Element type of a memref, or the type itself for scalars.
  Type element() const;
  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  /// Number of elements of a memref (saturating), 1 for scalars.
  std::uint64_t num_elements() const;

  /// MLIR spelling: `i32`, `f16`, `index`, `memref<2x3xi64>`.
  std::string str() const;

  /// Whether the shape/width constraints of the subset hold.
  bool well_formed() const;

  friend auto operator<=>(const Type&, const Type&) = default;
  friend bool operator==(const Type&, const Type&) = default;

 private:
  TypeKind kind_ = TypeKind::Int;
  unsigned width_ = 32;
  // Memref element kind; meaningless for scalars.
  TypeKind element_kind_ = TypeKind::Int;
  std::vector<std::int64_t> shape_;
};

/// The scalar vocabulary: i1 i8 i16 i32 i64 f16 f32 f64 index.
const std::vector<Type>& scalar_types();
const std::vector<unsigned>& int_widths();
const std::vector<unsigned>& float_widths();

/// Parses a type spelled in MLIR syntax; nullopt on malformed input.
std::optional<Type> parse_type(std::string_view text);

}  // namespace irsmith
