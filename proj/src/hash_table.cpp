#include "cachekv/hash_table.hpp"

#include <algorithm>
#include <bit>
#include <thread>
#include <unordered_set>

namespace cachekv {

const char* to_string(TableMode m) noexcept { return m == TableMode::kSingle ? "single" : "dual"; }

const char* to_string(PolicyId p) noexcept {
  switch (p) {
    case PolicyId::kLru:
      return "lru";
    case PolicyId::kLfu:
      return "lfu";
    case PolicyId::kEpochLru:
      return "epoch_lru";
    case PolicyId::kEpochLfu:
      return "epoch_lfu";
    case PolicyId::kCustomized:
      return "customized";
  }
  return "?";
}

TableMode parse_mode(const std::string& s) {
  if (s == "single") return TableMode::kSingle;
  if (s == "dual") return TableMode::kDual;
  throw usage_error("unknown table mode: " + s);
}

PolicyId parse_policy(const std::string& s) {
  for (PolicyId p : {PolicyId::kLru, PolicyId::kLfu, PolicyId::kEpochLru, PolicyId::kEpochLfu,
                     PolicyId::kCustomized}) {
    if (s == to_string(p)) return p;
  }
  throw usage_error("unknown score policy: " + s);
}

void TableConfig::validate() const {
  if (capacity == 0 || capacity % kBucketSlots != 0) {
    throw usage_error("capacity must be a positive multiple of 128");
  }
  if (!std::has_single_bit(bucket_count())) {
    throw usage_error("bucket count (capacity / 128) must be a power of two");
  }
  if (value_dim == 0) throw usage_error("value_dim must be at least 1");
  if (fast_tier_budget && *fast_tier_budget > bucket_count()) {
    throw usage_error("fast_tier_budget exceeds bucket count");
  }
  if (workers == 0) throw usage_error("workers must be at least 1");
}

namespace {

const TableConfig& validated(const TableConfig& c) {
  c.validate();
  return c;
}

}  // namespace

HashTable::HashTable(TableConfig config, ArenaAllocator allocator)
    : config_(validated(config)),
      bucket_count_(config_.bucket_count()),
      buckets_(new Bucket[bucket_count_]),
      store_(bucket_count_, config_.value_dim, config_.fast_tier_budget.value_or(bucket_count_),
             std::move(allocator)),
      bucket_locks_(new std::atomic<bool>[bucket_count_]) {
  for (std::size_t b = 0; b < bucket_count_; ++b) bucket_locks_[b].store(false);
}

// --- helpers ---------------------------------------------------------------

template <class Fn>
void HashTable::run_batch(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(config_.workers, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    TxnCounters local;
    for (std::size_t i = 0; i < n; ++i) fn(i, local);
    counters_.merge(local);
    return;
  }
  std::vector<TxnCounters> shards(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    threads.emplace_back([&, w, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i, shards[w]);
    });
  }
  for (auto& t : threads) t.join();
  TxnCounters total;
  for (const auto& s : shards) total += s;
  counters_.merge(total);
}

void HashTable::check_guard(const Guard& g, Role role) const {
  if (!g.held() || g.gate() != &gate_) throw usage_error("guard does not belong to this table");
  if (g.role() != role) {
    throw usage_error(std::string("operation requires the ") + to_string(role) + " role");
  }
}

void HashTable::check_keys(std::span<const Key> keys) const {
  for (Key k : keys) {
    if (!is_user_key(k)) throw usage_error("sentinel key value is reserved");
  }
}

void HashTable::check_values(std::span<const value_type> values, std::size_t n) const {
  if (values.size() != n * config_.value_dim) {
    throw usage_error("value buffer length must equal keys.size() * value_dim");
  }
}

void HashTable::check_scores_for_insert(std::span<const Score> scores, std::size_t n) const {
  if (config_.score_policy == PolicyId::kCustomized) {
    if (scores.size() != n) throw usage_error("kCustomized requires one score per key");
  } else if (!scores.empty()) {
    throw usage_error("scores are only accepted under kCustomized");
  }
}

std::size_t HashTable::bucket_of(Key key) const noexcept {
  return bucket_from_hash(hash_key(key), bucket_count_);
}

std::pair<std::size_t, std::size_t> HashTable::candidate_buckets(Key key) const noexcept {
  const std::uint64_t h = hash_key(key);
  const std::size_t b1 = bucket_from_hash(h, bucket_count_);
  if (config_.mode == TableMode::kSingle) return {b1, b1};
  return {b1, bucket_from_hash(second_hash(h), bucket_count_)};
}

std::optional<SlotPosition> HashTable::locate(Key key, std::uint64_t h, TxnCounters& c) const {
  const Digest d = digest_from_hash(h);
  const std::size_t b1 = bucket_from_hash(h, bucket_count_);
  if (auto s = find_in_bucket(buckets_[b1], key, d, c, config_.digest_filter)) {
    return SlotPosition{b1, *s};
  }
  if (config_.mode == TableMode::kSingle) return std::nullopt;
  // The second probe is issued even when both hashes pick the same bucket,
  // so a dual-mode miss always costs two line loads.
  const std::size_t b2 = bucket_from_hash(second_hash(h), bucket_count_);
  if (auto s = find_in_bucket(buckets_[b2], key, d, c, config_.digest_filter)) {
    return SlotPosition{b2, *s};
  }
  return std::nullopt;
}

Score HashTable::next_insert_score(std::span<const Score> scores, std::size_t i) {
  const std::uint64_t tick = clock_.tick();
  if (config_.score_policy == PolicyId::kCustomized) {
    return score_on_insert(PolicyId::kCustomized, epoch_.current(), tick, scores[i]);
  }
  return score_on_insert(config_.score_policy, epoch_.current(), tick);
}

Score HashTable::next_hit_score(Score old, std::span<const Score> scores, std::size_t i) {
  const std::uint64_t tick = clock_.tick();
  std::optional<Score> custom;
  if (!scores.empty()) custom = scores[i];
  return score_on_hit(config_.score_policy, old, epoch_.current(), tick, custom);
}

void HashTable::lock_buckets(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  auto spin = [this](std::size_t i) {
    while (bucket_locks_[i].exchange(true, std::memory_order_acquire)) std::this_thread::yield();
  };
  spin(a);
  if (b != a) spin(b);
}

void HashTable::unlock_buckets(std::size_t a, std::size_t b) {
  bucket_locks_[a].store(false, std::memory_order_release);
  if (b != a) bucket_locks_[b].store(false, std::memory_order_release);
}

UpsertOutcome HashTable::insert_new(Key key, std::uint64_t h, Score score,
                                    std::span<const value_type> value, TxnCounters& c,
                                    std::span<value_type> evicted_value_out) {
  const Digest d = digest_from_hash(h);
  const std::size_t b1 = bucket_from_hash(h, bucket_count_);
  SlotWriteContext ctx{b1, &store_, &c, &observer_, UpsertPhase::kSingle, evicted_value_out};

  if (config_.mode == TableMode::kSingle) {
    return insert_absent(buckets_[b1], key, d, score, value, AdmissionRule::kAdmitTies, ctx);
  }

  const AdmissionRule dual_rule =
      config_.dual_admit_ties ? AdmissionRule::kAdmitTies : AdmissionRule::kRejectTies;
  const std::size_t b2 = bucket_from_hash(second_hash(h), bucket_count_);
  const std::uint32_t occ1 = buckets_[b1].occupied();
  const std::uint32_t occ2 = buckets_[b2].occupied();

  if (occ1 < kBucketSlots || occ2 < kBucketSlots) {
    ctx.bucket_index = occ1 <= occ2 ? b1 : b2;
    ctx.phase = UpsertPhase::kDualFill;
    return insert_absent(buckets_[ctx.bucket_index], key, d, score, value, dual_rule, ctx);
  }

  const auto m1 = min_score_slot(buckets_[b1], c);
  const auto m2 = b2 == b1 ? m1 : min_score_slot(buckets_[b2], c);
  const bool pick_first = !m2 || (m1 && m1->score <= m2->score);
  const auto& victim = pick_first ? m1 : m2;
  ctx.bucket_index = pick_first ? b1 : b2;
  ctx.phase = UpsertPhase::kDualEvict;
  if (victim && !admits(dual_rule, score, victim->score)) {
    if (observer_) {
      observer_(EvictionEvent{true, ctx.bucket_index, victim->slot, kEmptyKey, victim->score,
                              score, UpsertPhase::kDualEvict});
    }
    return {UpsertKind::kRejected, std::nullopt, std::nullopt, std::nullopt};
  }
  return insert_absent(buckets_[ctx.bucket_index], key, d, score, value,
                       AdmissionRule::kAdmitTies, ctx);
}

// --- readers -----------------------------------------------------------------

std::vector<LookupResult> HashTable::find(std::span<const Key> keys,
                                          std::span<value_type> values_out) {
  auto g = gate_.acquire(Role::kReader);
  return find(g, keys, values_out);
}

std::vector<LookupResult> HashTable::find(const Guard& g, std::span<const Key> keys,
                                          std::span<value_type> values_out) {
  check_guard(g, Role::kReader);
  check_keys(keys);
  if (values_out.size() != keys.size() * config_.value_dim) {
    throw usage_error("value buffer length must equal keys.size() * value_dim");
  }
  const std::size_t dim = config_.value_dim;
  std::vector<LookupResult> out(keys.size());
  run_batch(keys.size(), [&](std::size_t i, TxnCounters& c) {
    if (auto pos = locate(keys[i], hash_key(keys[i]), c)) {
      const ValueHandle h = store_.value_address(pos->bucket, pos->slot);
      store_.read_value(h, values_out.subspan(i * dim, dim), c);
      out[i] = {LookupOutcome::kFound, *pos, h};
    }
  });
  return out;
}

std::vector<LookupResult> HashTable::find_ptr(std::span<const Key> keys) {
  auto g = gate_.acquire(Role::kReader);
  return find_ptr(g, keys);
}

std::vector<LookupResult> HashTable::find_ptr(const Guard& g, std::span<const Key> keys) {
  check_guard(g, Role::kReader);
  check_keys(keys);
  std::vector<LookupResult> out(keys.size());
  run_batch(keys.size(), [&](std::size_t i, TxnCounters& c) {
    if (auto pos = locate(keys[i], hash_key(keys[i]), c)) {
      out[i] = {LookupOutcome::kFound, *pos, store_.value_address(pos->bucket, pos->slot)};
    }
  });
  return out;
}

std::vector<bool> HashTable::contains(std::span<const Key> keys) {
  auto g = gate_.acquire(Role::kReader);
  return contains(g, keys);
}

std::vector<bool> HashTable::contains(const Guard& g, std::span<const Key> keys) {
  check_guard(g, Role::kReader);
  check_keys(keys);
  std::vector<std::uint8_t> hit(keys.size(), 0);
  run_batch(keys.size(), [&](std::size_t i, TxnCounters& c) {
    hit[i] = locate(keys[i], hash_key(keys[i]), c).has_value();
  });
  return {hit.begin(), hit.end()};
}

ExportBatch HashTable::export_batch_if(const ExportPredicate& pred, std::size_t cursor,
                                       std::size_t max_count) {
  auto g = gate_.acquire(Role::kReader);
  return export_batch_if(g, pred, cursor, max_count);
}

ExportBatch HashTable::export_batch_if(const Guard& g, const ExportPredicate& pred,
                                       std::size_t cursor, std::size_t max_count) {
  check_guard(g, Role::kReader);
  if (cursor >= capacity()) throw usage_error("export cursor out of range");
  ExportBatch out;
  TxnCounters c;
  std::size_t idx = cursor;
  for (; idx < capacity() && out.keys.size() < max_count; ++idx) {
    const std::size_t b = idx / kBucketSlots;
    const std::size_t s = idx % kBucketSlots;
    const Key k = buckets_[b].keys[s].load(std::memory_order_acquire);
    if (!is_user_key(k)) continue;
    const Score sc = buckets_[b].scores[s].load(std::memory_order_relaxed);
    if (!pred(k, sc)) continue;
    out.keys.push_back(k);
    out.scores.push_back(sc);
    const std::size_t at = out.values.size();
    out.values.resize(at + config_.value_dim);
    store_.read_value(store_.value_address(b, s),
                      std::span(out.values).subspan(at, config_.value_dim), c);
  }
  if (idx < capacity()) out.next_cursor = idx;
  counters_.merge(c);
  return out;
}

// --- updaters ----------------------------------------------------------------

std::vector<AssignOutcome> HashTable::assign(std::span<const Key> keys,
                                             std::span<const value_type> values,
                                             std::span<const Score> scores) {
  auto g = gate_.acquire(Role::kUpdater);
  return assign(g, keys, values, scores);
}

std::vector<AssignOutcome> HashTable::assign(const Guard& g, std::span<const Key> keys,
                                             std::span<const value_type> values,
                                             std::span<const Score> scores) {
  check_guard(g, Role::kUpdater);
  check_keys(keys);
  check_values(values, keys.size());
  if (!scores.empty() && scores.size() != keys.size()) {
    throw usage_error("scores length must match keys");
  }
  const std::size_t dim = config_.value_dim;
  std::vector<AssignOutcome> out(keys.size(), AssignOutcome::kNotFound);
  run_batch(keys.size(), [&](std::size_t i, TxnCounters& c) {
    auto pos = locate(keys[i], hash_key(keys[i]), c);
    if (!pos) return;
    store_.write_value(store_.value_address(pos->bucket, pos->slot), values.subspan(i * dim, dim),
                       c);
    if (!scores.empty()) {
      buckets_[pos->bucket].scores[pos->slot].store(scores[i], std::memory_order_relaxed);
    }
    out[i] = AssignOutcome::kUpdated;
  });
  return out;
}

std::vector<AssignOutcome> HashTable::assign_scores(std::span<const Key> keys,
                                                    std::span<const Score> scores) {
  auto g = gate_.acquire(Role::kUpdater);
  return assign_scores(g, keys, scores);
}

std::vector<AssignOutcome> HashTable::assign_scores(const Guard& g, std::span<const Key> keys,
                                                    std::span<const Score> scores) {
  check_guard(g, Role::kUpdater);
  check_keys(keys);
  if (scores.empty() && config_.score_policy == PolicyId::kCustomized) {
    throw usage_error("kCustomized assign_scores requires explicit scores");
  }
  if (!scores.empty() && scores.size() != keys.size()) {
    throw usage_error("scores length must match keys");
  }
  std::vector<AssignOutcome> out(keys.size(), AssignOutcome::kNotFound);
  run_batch(keys.size(), [&](std::size_t i, TxnCounters& c) {
    auto pos = locate(keys[i], hash_key(keys[i]), c);
    if (!pos) return;
    auto& slot_score = buckets_[pos->bucket].scores[pos->slot];
    const Score s = scores.empty()
                        ? next_hit_score(slot_score.load(std::memory_order_relaxed), scores, i)
                        : scores[i];
    slot_score.store(s, std::memory_order_relaxed);
    out[i] = AssignOutcome::kUpdated;
  });
  return out;
}

// --- inserters ---------------------------------------------------------------

std::vector<UpsertOutcome> HashTable::insert_or_assign(std::span<const Key> keys,
                                                       std::span<const value_type> values,
                                                       std::span<const Score> scores) {
  auto g = gate_.acquire(Role::kInserter);
  return insert_or_assign(g, keys, values, scores);
}

std::vector<UpsertOutcome> HashTable::insert_or_assign(const Guard& g, std::span<const Key> keys,
                                                       std::span<const value_type> values,
                                                       std::span<const Score> scores) {
  return upsert_batch(g, keys, values, scores, false).outcomes;
}

EvictedEntries HashTable::insert_and_evict(std::span<const Key> keys,
                                           std::span<const value_type> values,
                                           std::span<const Score> scores) {
  auto g = gate_.acquire(Role::kInserter);
  return insert_and_evict(g, keys, values, scores);
}

EvictedEntries HashTable::insert_and_evict(const Guard& g, std::span<const Key> keys,
                                           std::span<const value_type> values,
                                           std::span<const Score> scores) {
  return upsert_batch(g, keys, values, scores, true);
}

EvictedEntries HashTable::upsert_batch(const Guard& g, std::span<const Key> keys,
                                       std::span<const value_type> values,
                                       std::span<const Score> scores, bool capture_evicted) {
  check_guard(g, Role::kInserter);
  check_keys(keys);
  check_values(values, keys.size());
  check_scores_for_insert(scores, keys.size());
  const std::size_t dim = config_.value_dim;
  const std::size_t n = keys.size();

  EvictedEntries result;
  result.outcomes.resize(n);
  std::vector<value_type> victim_values(capture_evicted ? n * dim : 0);
  run_batch(n, [&](std::size_t i, TxnCounters& c) {
    const Key key = keys[i];
    const std::uint64_t h = hash_key(key);
    const auto [b1, b2] = candidate_buckets(key);
    if (parallel()) lock_buckets(b1, b2);
    const auto value = values.subspan(i * dim, dim);
    if (auto pos = locate(key, h, c)) {
      auto& slot_score = buckets_[pos->bucket].scores[pos->slot];
      slot_score.store(next_hit_score(slot_score.load(std::memory_order_relaxed), scores, i),
                       std::memory_order_relaxed);
      store_.write_value(store_.value_address(pos->bucket, pos->slot), value, c);
      result.outcomes[i] = {UpsertKind::kUpdated, std::nullopt, std::nullopt, *pos};
    } else {
      std::span<value_type> victim_out;
      if (capture_evicted) victim_out = std::span(victim_values).subspan(i * dim, dim);
      result.outcomes[i] = insert_new(key, h, next_insert_score(scores, i), value, c, victim_out);
      if (result.outcomes[i].kind == UpsertKind::kInserted) {
        size_.fetch_add(1, std::memory_order_relaxed);
      }
    }
    if (parallel()) unlock_buckets(b1, b2);
  });

  for (std::size_t i = 0; i < n && capture_evicted; ++i) {
    const auto& o = result.outcomes[i];
    if (o.kind != UpsertKind::kEvicted) continue;
    result.keys.push_back(*o.evicted_key);
    result.scores.push_back(*o.evicted_score);
    result.values.insert(result.values.end(), victim_values.begin() + i * dim,
                         victim_values.begin() + (i + 1) * dim);
  }
  return result;
}

std::vector<FindOrInsertKind> HashTable::find_or_insert(std::span<const Key> keys,
                                                        std::span<value_type> values_inout,
                                                        std::span<const Score> scores) {
  auto g = gate_.acquire(Role::kInserter);
  return find_or_insert(g, keys, values_inout, scores);
}

std::vector<FindOrInsertKind> HashTable::find_or_insert(const Guard& g, std::span<const Key> keys,
                                                        std::span<value_type> values_inout,
                                                        std::span<const Score> scores) {
  check_guard(g, Role::kInserter);
  check_keys(keys);
  check_values(values_inout, keys.size());
  check_scores_for_insert(scores, keys.size());
  const std::size_t dim = config_.value_dim;
  std::vector<FindOrInsertKind> out(keys.size());
  run_batch(keys.size(), [&](std::size_t i, TxnCounters& c) {
    const Key key = keys[i];
    const std::uint64_t h = hash_key(key);
    const auto [b1, b2] = candidate_buckets(key);
    if (parallel()) lock_buckets(b1, b2);
    auto value = values_inout.subspan(i * dim, dim);
    if (auto pos = locate(key, h, c)) {
      store_.read_value(store_.value_address(pos->bucket, pos->slot), value, c);
      auto& slot_score = buckets_[pos->bucket].scores[pos->slot];
      slot_score.store(next_hit_score(slot_score.load(std::memory_order_relaxed), scores, i),
                       std::memory_order_relaxed);
      out[i] = FindOrInsertKind::kFound;
    } else {
      const auto o = insert_new(key, h, next_insert_score(scores, i), value, c, {});
      switch (o.kind) {
        case UpsertKind::kInserted:
          size_.fetch_add(1, std::memory_order_relaxed);
          out[i] = FindOrInsertKind::kInserted;
          break;
        case UpsertKind::kEvicted:
          out[i] = FindOrInsertKind::kEvicted;
          break;
        default:
          out[i] = FindOrInsertKind::kRejected;
          break;
      }
    }
    if (parallel()) unlock_buckets(b1, b2);
  });
  return out;
}

std::vector<EraseOutcome> HashTable::erase(std::span<const Key> keys) {
  auto g = gate_.acquire(Role::kInserter);
  return erase(g, keys);
}

std::vector<EraseOutcome> HashTable::erase(const Guard& g, std::span<const Key> keys) {
  check_guard(g, Role::kInserter);
  check_keys(keys);
  std::vector<EraseOutcome> out(keys.size(), EraseOutcome::kNotFound);
  run_batch(keys.size(), [&](std::size_t i, TxnCounters& c) {
    const auto [b1, b2] = candidate_buckets(keys[i]);
    if (parallel()) lock_buckets(b1, b2);
    if (auto pos = locate(keys[i], hash_key(keys[i]), c)) {
      Bucket& b = buckets_[pos->bucket];
      b.keys[pos->slot].store(kEmptyKey, std::memory_order_release);
      b.occupancy.fetch_sub(1, std::memory_order_relaxed);
      size_.fetch_sub(1, std::memory_order_relaxed);
      out[i] = EraseOutcome::kErased;
    }
    if (parallel()) unlock_buckets(b1, b2);
  });
  return out;
}

// --- instrumentation ---------------------------------------------------------

BucketSnapshot HashTable::inspect_bucket(std::size_t bucket) const {
  if (bucket >= bucket_count_) throw usage_error("bucket index out of range");
  return snapshot_of(buckets_[bucket]);
}

std::uint64_t HashTable::structural_fingerprint() const {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::size_t b = 0; b < bucket_count_; ++b) {
    for (const auto& k : buckets_[b].keys) h = fmix64(h ^ k.load(std::memory_order_acquire));
    for (const auto& w : buckets_[b].digests.words) {
      h = fmix64(h ^ w.load(std::memory_order_relaxed));
    }
  }
  return h;
}

std::vector<std::string> HashTable::validate() const {
  std::vector<std::string> issues;
  std::unordered_set<Key> seen;
  std::size_t total = 0;
  for (std::size_t b = 0; b < bucket_count_; ++b) {
    const BucketSnapshot s = snapshot_of(buckets_[b]);
    std::uint32_t occupied = 0;
    for (std::size_t i = 0; i < kBucketSlots; ++i) {
      const Key k = s.keys[i];
      const std::string where = "bucket " + std::to_string(b) + " slot " + std::to_string(i);
      if (k == kLockedKey) {
        issues.push_back(where + ": slot left locked");
        continue;
      }
      if (k == kEmptyKey) continue;
      ++occupied;
      if (s.digests[i] != digest_of(k)) issues.push_back(where + ": stale digest");
      const auto [c1, c2] = candidate_buckets(k);
      if (b != c1 && b != c2) issues.push_back(where + ": key outside its candidate buckets");
      if (!seen.insert(k).second) issues.push_back(where + ": duplicate key");
    }
    if (occupied != s.occupancy) {
      issues.push_back("bucket " + std::to_string(b) + ": occupancy counter mismatch");
    }
    total += occupied;
  }
  if (total != size()) issues.push_back("size counter mismatch");
  return issues;
}

// --- metrics over a table ------------------------------------------------------

double topn_retention(const HashTable& table, const IdealScoreLog& ideal, std::size_t n) {
  if (n == 0 || n > ideal.size()) throw usage_error("N must be in [1, distinct keys]");
  std::vector<std::pair<Score, Key>> ranked;
  ranked.reserve(ideal.size());
  for (const auto& [k, s] : ideal) ranked.emplace_back(s, k);
  std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n - 1),
                   ranked.end(), std::greater<>());
  std::unordered_set<Key> present;
  present.reserve(table.size() * 2);
  for (std::size_t b = 0; b < table.bucket_count(); ++b) {
    const BucketSnapshot s = table.inspect_bucket(b);
    for (Key k : s.keys) {
      if (is_user_key(k)) present.insert(k);
    }
  }
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) kept += present.count(ranked[i].second);
  return static_cast<double>(kept) / static_cast<double>(n);
}

}  // namespace cachekv
