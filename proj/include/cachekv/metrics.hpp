#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "cachekv/types.hpp"

namespace cachekv {

class HashTable;

/// Event tallies of the portable memory-transaction model. One digest-line
/// load is one read of a bucket's 128-byte digest array.
struct TxnCounters {
  std::uint64_t digest_line_loads = 0;
  std::uint64_t full_key_compares = 0;
  std::uint64_t score_scans = 0;
  std::uint64_t slot_lock_retries = 0;
  std::uint64_t value_copies_fast = 0;
  std::uint64_t value_copies_overflow = 0;

  TxnCounters& operator+=(const TxnCounters& o) noexcept;
  friend TxnCounters operator+(TxnCounters a, const TxnCounters& b) noexcept { return a += b; }
  friend bool operator==(const TxnCounters&, const TxnCounters&) = default;
};

/// Table-wide counter sink. Workers accumulate into private TxnCounters
/// and merge here at batch end.
class CounterRegistry {
 public:
  void merge(const TxnCounters& delta);
  TxnCounters snapshot() const;
  void reset();

 private:
  mutable std::mutex mu_;
  TxnCounters total_;
};

enum class UpsertPhase : std::uint8_t { kSingle, kDualFill, kDualEvict };

/// One admission decision on a full bucket.
struct EvictionEvent {
  bool rejected = false;
  std::size_t bucket_index = 0;
  std::size_t slot_index = 0;
  Key evicted_key = kEmptyKey;
  Score evicted_score = 0;  // bucket minimum at decision time
  Score incoming_score = 0;
  UpsertPhase phase = UpsertPhase::kSingle;
};

struct QualityStats {
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
  std::optional<double> first_eviction_lambda;
  std::optional<double> topn_retention;

  double hit_rate() const noexcept {
    return lookups == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(lookups);
  }
};

/// Exact final score of every key as if capacity were unbounded.
using IdealScoreLog = std::unordered_map<Key, Score>;

/// |top-N(ideal) ∩ keys(table)| / N. Score ties are broken by key value.
/// Throws usage_error if N exceeds the number of distinct logged keys or is 0.
double topn_retention(const HashTable& table, const IdealScoreLog& ideal, std::size_t n);

}  // namespace cachekv
