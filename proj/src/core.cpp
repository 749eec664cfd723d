#include <algorithm>
#include <bit>

#include "cspmon/core/event_set.hpp"
#include "cspmon/core/value.hpp"

namespace cspmon {

ValueSet::ValueSet(std::vector<Value> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool ValueSet::contains(Value v) const {
  return std::binary_search(items_.begin(), items_.end(), v);
}

bool ValueSet::subset_of(const ValueSet& other) const {
  return std::includes(other.items_.begin(), other.items_.end(), items_.begin(), items_.end());
}

ValueSet ValueSet::unite(const ValueSet& o) const {
  std::vector<Value> out;
  std::set_union(items_.begin(), items_.end(), o.items_.begin(), o.items_.end(),
                 std::back_inserter(out));
  ValueSet s;
  s.items_ = std::move(out);
  return s;
}

ValueSet ValueSet::minus(const ValueSet& o) const {
  std::vector<Value> out;
  std::set_difference(items_.begin(), items_.end(), o.items_.begin(), o.items_.end(),
                      std::back_inserter(out));
  ValueSet s;
  s.items_ = std::move(out);
  return s;
}

ValueSet ValueSet::intersect(const ValueSet& o) const {
  std::vector<Value> out;
  std::set_intersection(items_.begin(), items_.end(), o.items_.begin(), o.items_.end(),
                        std::back_inserter(out));
  ValueSet s;
  s.items_ = std::move(out);
  return s;
}

std::optional<std::size_t> ValueType::index_of(Value v) const {
  const auto& items = domain.items();
  if (kind == Kind::IntRange || kind == Kind::Bool || kind == Kind::Enum) {
    if (items.empty() || v.kind != items.front().kind) return std::nullopt;
    std::int64_t off = v.v - items.front().v;
    if (off < 0 || off >= static_cast<std::int64_t>(items.size())) return std::nullopt;
    return static_cast<std::size_t>(off);
  }
  auto it = std::lower_bound(items.begin(), items.end(), v);
  if (it == items.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - items.begin());
}

EventSet EventSet::full(std::size_t alphabet_size) {
  EventSet s(alphabet_size);
  for (EventId e = 0; e < alphabet_size; ++e) s.insert(e);
  return s;
}

EventSet EventSet::unite(const EventSet& o) const {
  EventSet r = *this;
  for (std::size_t i = 0; i < r.bits_.size() && i < o.bits_.size(); ++i) r.bits_[i] |= o.bits_[i];
  return r;
}

EventSet EventSet::minus(const EventSet& o) const {
  EventSet r = *this;
  for (std::size_t i = 0; i < r.bits_.size() && i < o.bits_.size(); ++i) r.bits_[i] &= ~o.bits_[i];
  return r;
}

EventSet EventSet::intersect(const EventSet& o) const {
  EventSet r = *this;
  for (std::size_t i = 0; i < r.bits_.size(); ++i) {
    r.bits_[i] &= i < o.bits_.size() ? o.bits_[i] : 0;
  }
  return r;
}

std::size_t EventSet::count() const {
  std::size_t n = 0;
  for (auto w : bits_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<EventId> EventSet::members() const {
  std::vector<EventId> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    std::uint64_t w = bits_[i];
    while (w) {
      int b = std::countr_zero(w);
      out.push_back(static_cast<EventId>(i * 64 + static_cast<std::size_t>(b)));
      w &= w - 1;
    }
  }
  return out;
}

std::size_t EventSet::hash() const {
  std::size_t h = 1469598103934665603ull ^ size_;
  for (auto w : bits_) {
    h ^= std::hash<std::uint64_t>{}(w);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cspmon
