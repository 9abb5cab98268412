#include "cachekv/bench/baseline.hpp"

#include <bit>

#include "cachekv/hash.hpp"

namespace cachekv::bench {

BaselineTable::BaselineTable(std::size_t capacity)
    : capacity_(capacity), slots_(new Key[capacity]) {
  if (capacity == 0 || !std::has_single_bit(capacity)) {
    throw usage_error("baseline capacity must be a power of two");
  }
  for (std::size_t i = 0; i < capacity_; ++i) slots_[i] = kEmptyKey;
}

BaselineTable::ProbeResult BaselineTable::insert(Key key) {
  if (!is_user_key(key)) throw usage_error("sentinel key value is reserved");
  const std::size_t mask = capacity_ - 1;
  std::size_t i = hash_key(key) & mask;
  for (std::size_t probes = 1; probes <= capacity_; ++probes, i = (i + 1) & mask) {
    if (slots_[i] == key) return {true, probes};
    if (slots_[i] == kEmptyKey) {
      slots_[i] = key;
      ++size_;
      return {true, probes};
    }
  }
  return {false, capacity_};
}

BaselineTable::ProbeResult BaselineTable::find(Key key) const {
  const std::size_t mask = capacity_ - 1;
  std::size_t i = hash_key(key) & mask;
  for (std::size_t probes = 1; probes <= capacity_; ++probes, i = (i + 1) & mask) {
    if (slots_[i] == key) return {true, probes};
    if (slots_[i] == kEmptyKey) return {false, probes};
  }
  return {false, capacity_};
}

}  // namespace cachekv::bench
