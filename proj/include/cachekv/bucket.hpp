#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "cachekv/metrics.hpp"
#include "cachekv/tiered_store.hpp"
#include "cachekv/types.hpp"

namespace cachekv {

inline constexpr std::size_t kDigestWords = kBucketSlots / 4;

/// The 128 one-byte digests of a bucket, packed four to a word so a probe
/// is 32 byte-parallel word compares over a single 128-byte line.
struct alignas(128) DigestLine {
  std::array<std::atomic<std::uint32_t>, kDigestWords> words{};

  Digest get(std::size_t slot) const noexcept {
    return static_cast<Digest>(words[slot / 4].load(std::memory_order_relaxed) >> (8 * (slot % 4)));
  }
  void set(std::size_t slot, Digest d) noexcept;
};
static_assert(sizeof(DigestLine) == 128);

/// A 128-slot bucket: the entire candidate space of every key hashed to it.
/// A slot is empty iff its key is kEmptyKey; digests of empty slots are
/// meaningless and may be stale.
struct Bucket {
  DigestLine digests;
  std::array<std::atomic<Key>, kBucketSlots> keys;
  std::array<std::atomic<Score>, kBucketSlots> scores;
  std::atomic<std::uint32_t> occupancy{0};

  Bucket() noexcept;

  std::uint32_t occupied() const noexcept { return occupancy.load(std::memory_order_relaxed); }
  bool full() const noexcept { return occupied() == kBucketSlots; }
};

/// Plain copy of a bucket's arrays, for inspection and test oracles.
struct BucketSnapshot {
  std::array<Key, kBucketSlots> keys{};
  std::array<Digest, kBucketSlots> digests{};
  std::array<Score, kBucketSlots> scores{};
  std::uint32_t occupancy = 0;
};
BucketSnapshot snapshot_of(const Bucket& b);

/// Byte mask with 0x80 set in each byte of `word` equal to `digest`.
constexpr std::uint32_t digest_match_mask(std::uint32_t word, Digest digest) noexcept {
  const std::uint32_t x = word ^ (static_cast<std::uint32_t>(digest) * 0x01010101U);
  const std::uint32_t t = (x & 0x7f7f7f7fU) + 0x7f7f7f7fU;
  return ~(t | x | 0x7f7f7f7fU);
}

/// Digest-filtered lookup. Records one digest-line load and one full-key
/// compare per digest hit. With `use_digest` false, every slot's key is
/// compared and no digest line is read.
std::optional<std::size_t> find_in_bucket(const Bucket& bucket, Key key, Digest digest,
                                          TxnCounters& counters, bool use_digest = true);

/// Minimum-score slot among committed (non-locked, non-empty) slots; ties
/// go to the lowest index. nullopt when every slot is empty or locked.
struct MinScore {
  std::size_t slot;
  Score score;
  Key key;
};
std::optional<MinScore> min_score_slot(const Bucket& bucket, TxnCounters& counters);

enum class AdmissionRule : std::uint8_t {
  kAdmitTies,   // reject iff incoming < min
  kRejectTies,  // reject iff incoming <= min
};

constexpr bool admits(AdmissionRule rule, Score incoming, Score bucket_min) noexcept {
  return rule == AdmissionRule::kAdmitTies ? incoming >= bucket_min : incoming > bucket_min;
}

enum class UpsertKind : std::uint8_t { kInserted, kUpdated, kRejected, kEvicted };
const char* to_string(UpsertKind k) noexcept;

struct UpsertOutcome {
  UpsertKind kind = UpsertKind::kRejected;
  std::optional<Key> evicted_key;
  std::optional<Score> evicted_score;
  std::optional<SlotPosition> position;  // where the entry now lives

  friend bool operator==(const UpsertOutcome&, const UpsertOutcome&) = default;
};

using EvictionObserver = std::function<void(const EvictionEvent&)>;

/// Everything the bucket-level insert path needs besides the bucket itself.
struct SlotWriteContext {
  std::size_t bucket_index = 0;
  TieredStore* store = nullptr;
  TxnCounters* counters = nullptr;
  const EvictionObserver* observer = nullptr;
  UpsertPhase phase = UpsertPhase::kSingle;
  std::span<value_type> evicted_value_out{};  // receives the victim's value when non-empty
};

/// Insert path for a key known to be absent: claim the lowest free slot,
/// else evict the minimum-score slot under `rule`, else reject. Slots are
/// locked by swapping their key to kLockedKey; a lost swap rescans.
UpsertOutcome insert_absent(Bucket& bucket, Key key, Digest digest, Score score,
                            std::span<const value_type> value, AdmissionRule rule,
                            const SlotWriteContext& ctx);

/// Single-bucket upsert: overwrite value and score if the key is present,
/// otherwise insert_absent with ties admitted.
UpsertOutcome upsert_single(Bucket& bucket, Key key, Digest digest, Score score,
                            std::span<const value_type> value, const SlotWriteContext& ctx,
                            bool use_digest = true);

}  // namespace cachekv
