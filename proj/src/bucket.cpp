#include "cachekv/bucket.hpp"

#include <bit>

namespace cachekv {

const char* to_string(UpsertKind k) noexcept {
  switch (k) {
    case UpsertKind::kInserted:
      return "inserted";
    case UpsertKind::kUpdated:
      return "updated";
    case UpsertKind::kRejected:
      return "rejected";
    case UpsertKind::kEvicted:
      return "evicted";
  }
  return "?";
}

void DigestLine::set(std::size_t slot, Digest d) noexcept {
  auto& w = words[slot / 4];
  const unsigned shift = 8 * static_cast<unsigned>(slot % 4);
  const std::uint32_t mask = 0xffU << shift;
  std::uint32_t cur = w.load(std::memory_order_relaxed);
  while (!w.compare_exchange_weak(cur, (cur & ~mask) | (static_cast<std::uint32_t>(d) << shift),
                                  std::memory_order_relaxed)) {
  }
}

Bucket::Bucket() noexcept {
  for (auto& k : keys) k.store(kEmptyKey, std::memory_order_relaxed);
  for (auto& s : scores) s.store(0, std::memory_order_relaxed);
}

BucketSnapshot snapshot_of(const Bucket& b) {
  BucketSnapshot s;
  for (std::size_t i = 0; i < kBucketSlots; ++i) {
    s.keys[i] = b.keys[i].load(std::memory_order_acquire);
    s.digests[i] = b.digests.get(i);
    s.scores[i] = b.scores[i].load(std::memory_order_relaxed);
  }
  s.occupancy = b.occupied();
  return s;
}

std::optional<std::size_t> find_in_bucket(const Bucket& bucket, Key key, Digest digest,
                                          TxnCounters& counters, bool use_digest) {
  if (!use_digest) {
    for (std::size_t i = 0; i < kBucketSlots; ++i) {
      ++counters.full_key_compares;
      if (bucket.keys[i].load(std::memory_order_acquire) == key) return i;
    }
    return std::nullopt;
  }

  std::array<std::uint32_t, kDigestWords> line;
  for (std::size_t w = 0; w < kDigestWords; ++w) {
    line[w] = bucket.digests.words[w].load(std::memory_order_relaxed);
  }
  ++counters.digest_line_loads;

  for (std::size_t w = 0; w < kDigestWords; ++w) {
    std::uint32_t m = digest_match_mask(line[w], digest);
    while (m != 0) {
      const std::size_t slot = w * 4 + static_cast<std::size_t>(std::countr_zero(m)) / 8;
      m &= m - 1;
      ++counters.full_key_compares;
      if (bucket.keys[slot].load(std::memory_order_acquire) == key) return slot;
    }
  }
  return std::nullopt;
}

std::optional<MinScore> min_score_slot(const Bucket& bucket, TxnCounters& counters) {
  ++counters.score_scans;
  std::optional<MinScore> best;
  for (std::size_t i = 0; i < kBucketSlots; ++i) {
    const Key k = bucket.keys[i].load(std::memory_order_acquire);
    if (!is_user_key(k)) continue;
    const Score s = bucket.scores[i].load(std::memory_order_relaxed);
    if (!best || s < best->score) best = MinScore{i, s, k};
  }
  return best;
}

namespace {

// Writes the entry into a slot the caller holds locked, then publishes the key.
void commit_slot(Bucket& bucket, std::size_t slot, Key key, Digest digest, Score score,
                 std::span<const value_type> value, const SlotWriteContext& ctx) {
  bucket.digests.set(slot, digest);
  bucket.scores[slot].store(score, std::memory_order_relaxed);
  if (ctx.store != nullptr) {
    ctx.store->write_value(ctx.store->value_address(ctx.bucket_index, slot), value, *ctx.counters);
  }
  bucket.keys[slot].store(key, std::memory_order_release);
}

void notify(const SlotWriteContext& ctx, const EvictionEvent& ev) {
  if (ctx.observer != nullptr && *ctx.observer) (*ctx.observer)(ev);
}

}  // namespace

UpsertOutcome insert_absent(Bucket& bucket, Key key, Digest digest, Score score,
                            std::span<const value_type> value, AdmissionRule rule,
                            const SlotWriteContext& ctx) {
  TxnCounters& c = *ctx.counters;
  for (;;) {
    if (!bucket.full()) {
      for (std::size_t i = 0; i < kBucketSlots; ++i) {
        Key expected = kEmptyKey;
        if (bucket.keys[i].load(std::memory_order_relaxed) != kEmptyKey) continue;
        if (!bucket.keys[i].compare_exchange_strong(expected, kLockedKey,
                                                    std::memory_order_acquire)) {
          ++c.slot_lock_retries;
          continue;
        }
        commit_slot(bucket, i, key, digest, score, value, ctx);
        bucket.occupancy.fetch_add(1, std::memory_order_relaxed);
        return {UpsertKind::kInserted, std::nullopt, std::nullopt,
                SlotPosition{ctx.bucket_index, i}};
      }
    }

    const auto victim = min_score_slot(bucket, c);
    if (!victim) continue;  // every slot locked by other writers
    if (!admits(rule, score, victim->score)) {
      notify(ctx, EvictionEvent{true, ctx.bucket_index, victim->slot, kEmptyKey, victim->score,
                                score, ctx.phase});
      return {UpsertKind::kRejected, std::nullopt, std::nullopt, std::nullopt};
    }
    Key expected = victim->key;
    if (!bucket.keys[victim->slot].compare_exchange_strong(expected, kLockedKey,
                                                           std::memory_order_acquire)) {
      ++c.slot_lock_retries;
      continue;
    }
    if (!ctx.evicted_value_out.empty() && ctx.store != nullptr) {
      ctx.store->read_value(ctx.store->value_address(ctx.bucket_index, victim->slot),
                            ctx.evicted_value_out, c);
    }
    notify(ctx, EvictionEvent{false, ctx.bucket_index, victim->slot, victim->key, victim->score,
                              score, ctx.phase});
    commit_slot(bucket, victim->slot, key, digest, score, value, ctx);
    return {UpsertKind::kEvicted, victim->key, victim->score,
            SlotPosition{ctx.bucket_index, victim->slot}};
  }
}

UpsertOutcome upsert_single(Bucket& bucket, Key key, Digest digest, Score score,
                            std::span<const value_type> value, const SlotWriteContext& ctx,
                            bool use_digest) {
  if (!is_user_key(key)) throw usage_error("sentinel key passed to upsert");
  if (auto slot = find_in_bucket(bucket, key, digest, *ctx.counters, use_digest)) {
    bucket.scores[*slot].store(score, std::memory_order_relaxed);
    if (ctx.store != nullptr) {
      ctx.store->write_value(ctx.store->value_address(ctx.bucket_index, *slot), value,
                             *ctx.counters);
    }
    return {UpsertKind::kUpdated, std::nullopt, std::nullopt,
            SlotPosition{ctx.bucket_index, *slot}};
  }
  return insert_absent(bucket, key, digest, score, value, AdmissionRule::kAdmitTies, ctx);
}

}  // namespace cachekv
