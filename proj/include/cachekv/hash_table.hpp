#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cachekv/bucket.hpp"
#include "cachekv/hash.hpp"
#include "cachekv/metrics.hpp"
#include "cachekv/role_gate.hpp"
#include "cachekv/scoring.hpp"
#include "cachekv/tiered_store.hpp"
#include "cachekv/types.hpp"

namespace cachekv {

struct TableConfig {
  std::size_t capacity = std::size_t{1} << 20;  // key slots; bucket_count * 128
  TableMode mode = TableMode::kSingle;
  std::size_t value_dim = 8;
  PolicyId score_policy = PolicyId::kLru;
  /// Buckets whose values live in the fast arena. Defaults to all of them.
  std::optional<std::size_t> fast_tier_budget;
  /// Dual mode rejects score ties at the bucket minimum unless this is set.
  bool dual_admit_ties = false;
  /// Ablation switch: when false, lookups compare every key in the bucket.
  bool digest_filter = true;
  /// Worker threads a single batch is split across.
  std::size_t workers = 1;

  std::size_t bucket_count() const noexcept { return capacity / kBucketSlots; }
  /// Throws usage_error describing the first violated constraint.
  void validate() const;
};

enum class LookupOutcome : std::uint8_t { kFound, kNotFound };

struct LookupResult {
  LookupOutcome outcome = LookupOutcome::kNotFound;
  SlotPosition position;  // valid when found
  ValueHandle handle;     // valid when found

  bool found() const noexcept { return outcome == LookupOutcome::kFound; }
};

enum class FindOrInsertKind : std::uint8_t { kFound, kInserted, kEvicted, kRejected };
enum class AssignOutcome : std::uint8_t { kUpdated, kNotFound };
enum class EraseOutcome : std::uint8_t { kErased, kNotFound };

struct EvictedEntries {
  std::vector<UpsertOutcome> outcomes;
  std::vector<Key> keys;
  std::vector<value_type> values;  // keys.size() * value_dim
  std::vector<Score> scores;

  std::size_t count() const noexcept { return keys.size(); }
};

struct ExportBatch {
  std::vector<Key> keys;
  std::vector<value_type> values;
  std::vector<Score> scores;
  /// Slot index to resume from; nullopt once the table is exhausted.
  std::optional<std::size_t> next_cursor;
};

using ExportPredicate = std::function<bool(Key, Score)>;
using Guard = RoleGate::Guard;

/// Cache-semantic bucketed hash table. Each key's candidate space is one
/// 128-slot bucket (two in dual mode); a full bucket resolves inserts by
/// evicting its minimum-score entry or rejecting the incoming key. There is
/// no resize path.
///
/// Every batch call acquires its role on the table's gate internally. The
/// overloads taking a Guard run under a role the caller already holds, so
/// several calls can share one phase.
class HashTable {
 public:
  explicit HashTable(TableConfig config, ArenaAllocator allocator = ArenaAllocator::heap());
  HashTable(const HashTable&) = delete;
  HashTable& operator=(const HashTable&) = delete;

  const TableConfig& config() const noexcept { return config_; }
  std::size_t capacity() const noexcept { return config_.capacity; }
  std::size_t bucket_count() const noexcept { return bucket_count_; }
  std::size_t value_dim() const noexcept { return config_.value_dim; }

  RoleGate& gate() noexcept { return gate_; }
  Guard acquire(Role role) { return gate_.acquire(role); }

  // --- readers ---------------------------------------------------------
  /// Copies each found value into `values_out[i*dim, (i+1)*dim)`.
  std::vector<LookupResult> find(std::span<const Key> keys, std::span<value_type> values_out);
  std::vector<LookupResult> find(const Guard& g, std::span<const Key> keys,
                                 std::span<value_type> values_out);

  std::vector<LookupResult> find_ptr(std::span<const Key> keys);
  std::vector<LookupResult> find_ptr(const Guard& g, std::span<const Key> keys);

  std::vector<bool> contains(std::span<const Key> keys);
  std::vector<bool> contains(const Guard& g, std::span<const Key> keys);

  ExportBatch export_batch_if(const ExportPredicate& pred, std::size_t cursor,
                              std::size_t max_count);
  ExportBatch export_batch_if(const Guard& g, const ExportPredicate& pred, std::size_t cursor,
                              std::size_t max_count);

  std::size_t size() const noexcept { return size_.load(std::memory_order_acquire); }
  double load_factor() const noexcept {
    return static_cast<double>(size()) / static_cast<double>(capacity());
  }

  /// Resolves a handle from find_ptr. Valid until the next inserter phase.
  std::span<const value_type> resolve(const ValueHandle& h) const noexcept {
    return store_.resolve(h);
  }
  ValueHandle value_address(std::size_t bucket, std::size_t slot) const {
    return store_.value_address(bucket, slot);
  }

  // --- updaters --------------------------------------------------------
  /// Overwrites values of present keys; scores too when `scores` is given.
  std::vector<AssignOutcome> assign(std::span<const Key> keys, std::span<const value_type> values,
                                    std::span<const Score> scores = {});
  std::vector<AssignOutcome> assign(const Guard& g, std::span<const Key> keys,
                                    std::span<const value_type> values,
                                    std::span<const Score> scores = {});

  /// Sets scores of present keys. An empty `scores` applies the policy's
  /// hit refresh instead (not allowed for kCustomized).
  std::vector<AssignOutcome> assign_scores(std::span<const Key> keys,
                                           std::span<const Score> scores);
  std::vector<AssignOutcome> assign_scores(const Guard& g, std::span<const Key> keys,
                                           std::span<const Score> scores);

  // --- inserters -------------------------------------------------------
  /// `scores` is required for kCustomized and must be empty otherwise.
  std::vector<UpsertOutcome> insert_or_assign(std::span<const Key> keys,
                                              std::span<const value_type> values,
                                              std::span<const Score> scores = {});
  std::vector<UpsertOutcome> insert_or_assign(const Guard& g, std::span<const Key> keys,
                                              std::span<const value_type> values,
                                              std::span<const Score> scores = {});

  EvictedEntries insert_and_evict(std::span<const Key> keys, std::span<const value_type> values,
                                  std::span<const Score> scores = {});
  EvictedEntries insert_and_evict(const Guard& g, std::span<const Key> keys,
                                  std::span<const value_type> values,
                                  std::span<const Score> scores = {});

  /// Present keys: value copied out and score refreshed. Absent keys take the
  /// insert path with the caller's value; a rejected key leaves its buffer
  /// untouched.
  std::vector<FindOrInsertKind> find_or_insert(std::span<const Key> keys,
                                               std::span<value_type> values_inout,
                                               std::span<const Score> scores = {});
  std::vector<FindOrInsertKind> find_or_insert(const Guard& g, std::span<const Key> keys,
                                               std::span<value_type> values_inout,
                                               std::span<const Score> scores = {});

  std::vector<EraseOutcome> erase(std::span<const Key> keys);
  std::vector<EraseOutcome> erase(const Guard& g, std::span<const Key> keys);

  // --- scoring state ---------------------------------------------------
  void set_epoch(std::uint32_t epoch) { epoch_.advance_to(epoch); }
  std::uint32_t epoch() const noexcept { return epoch_.current(); }
  std::uint64_t clock() const noexcept { return clock_.now(); }

  // --- instrumentation -------------------------------------------------
  TxnCounters counters() const { return counters_.snapshot(); }
  void reset_counters() { counters_.reset(); }

  /// Called for every admission decision on a full bucket. Install while
  /// no batch is running.
  void set_eviction_observer(EvictionObserver obs) { observer_ = std::move(obs); }

  std::size_t bucket_of(Key key) const noexcept;
  /// Candidate buckets (equal in single mode).
  std::pair<std::size_t, std::size_t> candidate_buckets(Key key) const noexcept;
  BucketSnapshot inspect_bucket(std::size_t bucket) const;

  /// Hash of the concatenated key and digest arrays of every bucket.
  std::uint64_t structural_fingerprint() const;

  /// Full scan of digest/occupancy/size invariants; returns violations.
  std::vector<std::string> validate() const;

 private:
  struct Batch;

  void check_guard(const Guard& g, Role role) const;
  void check_keys(std::span<const Key> keys) const;
  void check_values(std::span<const value_type> values, std::size_t n) const;
  void check_scores_for_insert(std::span<const Score> scores, std::size_t n) const;

  template <class Fn>
  void run_batch(std::size_t n, Fn&& fn);

  std::optional<SlotPosition> locate(Key key, std::uint64_t h, TxnCounters& c) const;
  Score next_insert_score(std::span<const Score> scores, std::size_t i);
  Score next_hit_score(Score old, std::span<const Score> scores, std::size_t i);

  UpsertOutcome insert_new(Key key, std::uint64_t h, Score score,
                           std::span<const value_type> value, TxnCounters& c,
                           std::span<value_type> evicted_value_out);

  EvictedEntries upsert_batch(const Guard& g, std::span<const Key> keys,
                              std::span<const value_type> values, std::span<const Score> scores,
                              bool capture_evicted);

  void lock_buckets(std::size_t a, std::size_t b);
  void unlock_buckets(std::size_t a, std::size_t b);
  bool parallel() const noexcept { return config_.workers > 1; }

  TableConfig config_;
  std::size_t bucket_count_;
  std::unique_ptr<Bucket[]> buckets_;
  TieredStore store_;
  RoleGate gate_;
  CounterRegistry counters_;
  LogicalClock clock_;
  EpochState epoch_;
  std::atomic<std::size_t> size_{0};
  std::unique_ptr<std::atomic<bool>[]> bucket_locks_;
  EvictionObserver observer_;
};

}  // namespace cachekv
