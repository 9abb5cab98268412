#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cachekv/metrics.hpp"
#include "cachekv/types.hpp"

namespace cachekv {

enum class Tier : std::uint8_t { kFast, kOverflow };

/// Position-derived location of a value. Nothing per entry is stored; the
/// handle is recomputed from (bucket, slot) whenever it is needed.
struct ValueHandle {
  Tier tier = Tier::kFast;
  std::size_t offset = 0;  // element index within the tier arena

  friend bool operator==(const ValueHandle&, const ValueHandle&) = default;
};

/// Backing memory hook for arena slices. The default uses operator new.
struct ArenaAllocator {
  std::function<value_type*(std::size_t elements, Tier tier)> allocate;
  std::function<void(value_type*, std::size_t elements, Tier tier)> deallocate;

  static ArenaAllocator heap();
};

inline constexpr std::size_t kSliceElements = std::size_t{256} * 1024;

/// One tier's element buffer, carved into fixed-size slices.
class Arena {
 public:
  /// Slices hold a whole number of `granule`-sized records and never
  /// split one.
  Arena(Tier tier, std::size_t elements, std::size_t granule, ArenaAllocator alloc);
  Arena(Arena&&) noexcept = default;
  Arena& operator=(Arena&&) noexcept = default;
  Arena(const Arena&) = delete;
  Arena& operator=(const Arena&) = delete;
  ~Arena();

  Tier tier() const noexcept { return tier_; }
  std::size_t size() const noexcept { return elements_; }
  std::size_t slice_count() const noexcept { return slices_.size(); }
  std::size_t slice_elements() const noexcept { return slice_elements_; }

  value_type* at(std::size_t offset) noexcept {
    return slices_[offset / slice_elements_] + offset % slice_elements_;
  }
  const value_type* at(std::size_t offset) const noexcept {
    return slices_[offset / slice_elements_] + offset % slice_elements_;
  }

 private:
  void free_all() noexcept;

  Tier tier_;
  std::size_t elements_ = 0;
  std::size_t slice_elements_ = 0;
  std::vector<value_type*> slices_;
  ArenaAllocator alloc_;
};

/// Values for `bucket_count * 128` slots, buckets [0, fast_buckets) in the
/// fast arena and the remainder in the overflow arena.
class TieredStore {
 public:
  TieredStore(std::size_t bucket_count, std::size_t value_dim, std::size_t fast_buckets,
              ArenaAllocator alloc = ArenaAllocator::heap());

  std::size_t value_dim() const noexcept { return dim_; }
  std::size_t fast_buckets() const noexcept { return fast_buckets_; }
  std::size_t bucket_count() const noexcept { return bucket_count_; }

  /// Pure arithmetic; throws usage_error on out-of-range positions.
  ValueHandle value_address(std::size_t bucket, std::size_t slot) const;

  std::span<value_type> resolve(const ValueHandle& h) noexcept;
  std::span<const value_type> resolve(const ValueHandle& h) const noexcept;

  void read_value(const ValueHandle& h, std::span<value_type> out, TxnCounters& c) const;
  void write_value(const ValueHandle& h, std::span<const value_type> in, TxnCounters& c);

  const Arena& fast_arena() const noexcept { return fast_; }
  const Arena& overflow_arena() const noexcept { return overflow_; }

 private:
  std::size_t bucket_count_;
  std::size_t dim_;
  std::size_t fast_buckets_;
  Arena fast_;
  Arena overflow_;
};

}  // namespace cachekv
