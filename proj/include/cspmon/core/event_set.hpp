#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace cspmon {

using EventId = std::uint32_t;

/// Set of events as a bitset over the ground alphabet.
class EventSet {
 public:
  EventSet() = default;
  explicit EventSet(std::size_t alphabet_size)
      : bits_((alphabet_size + 63) / 64, 0), size_(alphabet_size) {}

  static EventSet full(std::size_t alphabet_size);

  std::size_t universe() const { return size_; }
  bool contains(EventId e) const {
    return e < size_ && (bits_[e / 64] >> (e % 64)) & 1u;
  }
  void insert(EventId e) { bits_[e / 64] |= std::uint64_t{1} << (e % 64); }
  void erase(EventId e) { bits_[e / 64] &= ~(std::uint64_t{1} << (e % 64)); }

  EventSet unite(const EventSet& o) const;
  EventSet minus(const EventSet& o) const;
  EventSet intersect(const EventSet& o) const;

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<EventId> members() const;

  std::size_t hash() const;
  bool operator==(const EventSet&) const = default;

 private:
  std::vector<std::uint64_t> bits_;
  std::size_t size_ = 0;
};

struct EventSetHash {
  std::size_t operator()(const EventSet& s) const { return s.hash(); }
};

}  // namespace cspmon
