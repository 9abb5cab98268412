#include "cachekv/tiered_store.hpp"

#include <algorithm>
#include <cstring>

namespace cachekv {

ArenaAllocator ArenaAllocator::heap() {
  return ArenaAllocator{
      [](std::size_t n, Tier) { return new value_type[n](); },
      [](value_type* p, std::size_t, Tier) { delete[] p; },
  };
}

Arena::Arena(Tier tier, std::size_t elements, std::size_t granule, ArenaAllocator alloc)
    : tier_(tier),
      elements_(elements),
      slice_elements_(std::max<std::size_t>(1, kSliceElements / granule) * granule),
      alloc_(std::move(alloc)) {
  slices_.reserve((elements + slice_elements_ - 1) / slice_elements_);
  try {
    for (std::size_t done = 0; done < elements; done += slice_elements_) {
      const std::size_t n = std::min(slice_elements_, elements - done);
      value_type* p = alloc_.allocate(n, tier_);
      if (p == nullptr) throw std::bad_alloc();
      slices_.push_back(p);
    }
  } catch (...) {
    free_all();
    throw;
  }
}

Arena::~Arena() { free_all(); }

void Arena::free_all() noexcept {
  std::size_t remaining = elements_;
  for (value_type* p : slices_) {
    const std::size_t n = std::min(slice_elements_, remaining);
    alloc_.deallocate(p, n, tier_);
    remaining -= n;
  }
  slices_.clear();
}

namespace {
std::size_t checked_dim(std::size_t bucket_count, std::size_t value_dim, std::size_t fast_buckets) {
  if (value_dim == 0) throw usage_error("value_dim must be at least 1");
  if (fast_buckets > bucket_count) throw usage_error("fast tier budget exceeds bucket count");
  return value_dim;
}
}  // namespace

TieredStore::TieredStore(std::size_t bucket_count, std::size_t value_dim,
                         std::size_t fast_buckets, ArenaAllocator alloc)
    : bucket_count_(bucket_count),
      dim_(checked_dim(bucket_count, value_dim, fast_buckets)),
      fast_buckets_(fast_buckets),
      fast_(Tier::kFast, fast_buckets * kBucketSlots * dim_, kBucketSlots * dim_, alloc),
      overflow_(Tier::kOverflow, (bucket_count - fast_buckets) * kBucketSlots * dim_,
                kBucketSlots * dim_, alloc) {}

ValueHandle TieredStore::value_address(std::size_t bucket, std::size_t slot) const {
  if (bucket >= bucket_count_ || slot >= kBucketSlots) {
    throw usage_error("value position out of range");
  }
  const std::size_t linear = (bucket * kBucketSlots + slot) * dim_;
  if (bucket < fast_buckets_) return {Tier::kFast, linear};
  return {Tier::kOverflow, linear - fast_buckets_ * kBucketSlots * dim_};
}

std::span<value_type> TieredStore::resolve(const ValueHandle& h) noexcept {
  Arena& a = h.tier == Tier::kFast ? fast_ : overflow_;
  return {a.at(h.offset), dim_};
}

std::span<const value_type> TieredStore::resolve(const ValueHandle& h) const noexcept {
  const Arena& a = h.tier == Tier::kFast ? fast_ : overflow_;
  return {a.at(h.offset), dim_};
}

void TieredStore::read_value(const ValueHandle& h, std::span<value_type> out,
                             TxnCounters& c) const {
  if (out.size() != dim_) throw usage_error("value buffer length must equal value_dim");
  auto src = resolve(h);
  std::memcpy(out.data(), src.data(), dim_ * sizeof(value_type));
  ++(h.tier == Tier::kFast ? c.value_copies_fast : c.value_copies_overflow);
}

void TieredStore::write_value(const ValueHandle& h, std::span<const value_type> in,
                              TxnCounters& c) {
  if (in.size() != dim_) throw usage_error("value buffer length must equal value_dim");
  auto dst = resolve(h);
  std::memcpy(dst.data(), in.data(), dim_ * sizeof(value_type));
  ++(h.tier == Tier::kFast ? c.value_copies_fast : c.value_copies_overflow);
}

}  // namespace cachekv
