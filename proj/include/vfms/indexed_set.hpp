#pragma once

// Subset of the integers [0, capacity) with O(1) insert, erase, membership
// and uniform sampling. Members live in a dense array; a position map
// records where each member sits, and erase swaps the last member into the
// hole. Iteration order is arbitrary but a deterministic function of the
// operation sequence.

#include <cassert>
#include <cstdint>
#include <span>
#include <vector>

#include "vfms/rng.hpp"

namespace vfms {

template <typename Index = std::uint32_t>
class IndexedSet {
 public:
  static constexpr Index npos = static_cast<Index>(-1);

  IndexedSet() = default;
  explicit IndexedSet(std::size_t capacity) : position_(capacity, npos) {}

  void reset(std::size_t capacity) {
    members_.clear();
    position_.assign(capacity, npos);
  }

  bool contains(Index i) const {
    assert(i < position_.size());
    return position_[i] != npos;
  }

  // Returns false if `i` was already present.
  bool insert(Index i) {
    if (contains(i)) return false;
    position_[i] = static_cast<Index>(members_.size());
    members_.push_back(i);
    return true;
  }

  // Returns false if `i` was absent.
  bool erase(Index i) {
    if (!contains(i)) return false;
    const Index hole = position_[i];
    const Index last = members_.back();
    members_[hole] = last;
    position_[last] = hole;
    members_.pop_back();
    position_[i] = npos;
    return true;
  }

  Index sample(Rng& rng) const {
    assert(!members_.empty());
    return members_[rng.below(members_.size())];
  }

  Index operator[](std::size_t pos) const { return members_[pos]; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  std::size_t capacity() const { return position_.size(); }
  std::span<const Index> members() const { return members_; }

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

 private:
  std::vector<Index> members_;
  std::vector<Index> position_;
};

}  // namespace vfms
