#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cspmon {

enum class ScalarKind : std::uint8_t { Int = 0, Bool = 1, Ctor = 2 };

/// A ground scalar: an integer, a boolean, or a datatype constructor (by its
/// global constructor index). Ordering is the canonical value order.
struct Value {
  ScalarKind kind = ScalarKind::Int;
  std::int64_t v = 0;

  static Value integer(std::int64_t x) { return {ScalarKind::Int, x}; }
  static Value boolean(bool b) { return {ScalarKind::Bool, b ? 1 : 0}; }
  static Value ctor(std::int64_t index) { return {ScalarKind::Ctor, index}; }

  auto operator<=>(const Value&) const = default;

  /// 2 bits of kind, 62 bits of payload; integers must fit in 62 bits.
  std::uint64_t pack() const {
    return (static_cast<std::uint64_t>(kind) << 62) |
           (static_cast<std::uint64_t>(v) & ((std::uint64_t{1} << 62) - 1));
  }
  static Value unpack(std::uint64_t w) {
    auto k = static_cast<ScalarKind>(w >> 62);
    std::uint64_t raw = w & ((std::uint64_t{1} << 62) - 1);
    // sign-extend from 62 bits
    if (raw & (std::uint64_t{1} << 61)) raw |= std::uint64_t{3} << 62;
    return {k, static_cast<std::int64_t>(raw)};
  }
};

/// Sorted, duplicate-free set of scalars.
class ValueSet {
 public:
  ValueSet() = default;
  explicit ValueSet(std::vector<Value> items);

  const std::vector<Value>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool contains(Value v) const;
  bool subset_of(const ValueSet& other) const;

  ValueSet unite(const ValueSet& o) const;
  ValueSet minus(const ValueSet& o) const;
  ValueSet intersect(const ValueSet& o) const;

  bool operator==(const ValueSet&) const = default;

 private:
  std::vector<Value> items_;
};

/// Finite payload type of one channel field.
struct ValueType {
  enum class Kind { IntRange, Bool, Enum, Finite };
  Kind kind = Kind::Finite;
  std::string name;  // datatype name for Enum, otherwise descriptive
  ValueSet domain;

  std::size_t cardinality() const { return domain.size(); }
  std::optional<std::size_t> index_of(Value v) const;
  Value at(std::size_t i) const { return domain.items()[i]; }
  bool contains(Value v) const { return domain.contains(v); }
};

}  // namespace cspmon
