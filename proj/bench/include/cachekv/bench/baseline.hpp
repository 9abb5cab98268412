#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "cachekv/types.hpp"

namespace cachekv::bench {

/// Dictionary-semantic reference: linear probing over a fixed power-of-two
/// slot array, same 64-bit hash as the cache table. Never evicts; an insert
/// into a full table fails.
class BaselineTable {
 public:
  struct ProbeResult {
    bool ok = false;  // inserted / found
    std::size_t probes = 0;
  };

  explicit BaselineTable(std::size_t capacity);

  ProbeResult insert(Key key);
  ProbeResult find(Key key) const;

  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return capacity_; }
  double load_factor() const noexcept {
    return static_cast<double>(size_) / static_cast<double>(capacity_);
  }

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::unique_ptr<Key[]> slots_;
};

}  // namespace cachekv::bench
