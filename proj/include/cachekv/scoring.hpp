#pragma once

#include <atomic>
#include <cstdint>
#include <optional>

#include "cachekv/types.hpp"

namespace cachekv {

/// Caller-advanced epoch used by the epoch-prefixed policies.
class EpochState {
 public:
  std::uint32_t current() const noexcept { return epoch_.load(std::memory_order_relaxed); }
  /// Throws usage_error if `epoch` would move the counter backwards.
  void advance_to(std::uint32_t epoch);

 private:
  std::atomic<std::uint32_t> epoch_{0};
};

/// Per-table logical clock. Ticks once per scored event.
class LogicalClock {
 public:
  std::uint64_t tick() noexcept { return now_.fetch_add(1, std::memory_order_relaxed) + 1; }
  std::uint64_t now() const noexcept { return now_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> now_{0};
};

constexpr Score epoch_prefixed(std::uint32_t epoch, std::uint64_t low) noexcept {
  return (static_cast<Score>(epoch) << 32) | (low & 0xffffffffULL);
}

constexpr Score saturating_increment(Score s) noexcept { return s == kMaxScore ? s : s + 1; }

/// Score assigned to a key entering the table. `custom` must be present
/// exactly when policy is kCustomized.
Score score_on_insert(PolicyId policy, std::uint32_t epoch, std::uint64_t clock,
                      std::optional<Score> custom = std::nullopt);

/// Score of an existing entry after it is touched again.
Score score_on_hit(PolicyId policy, Score old_score, std::uint32_t epoch, std::uint64_t clock,
                   std::optional<Score> custom = std::nullopt) noexcept;

/// Whether the policy consumes a clock tick per scored event.
constexpr bool policy_uses_clock(PolicyId p) noexcept {
  return p == PolicyId::kLru || p == PolicyId::kEpochLru;
}

}  // namespace cachekv
