#include "cachekv/scoring.hpp"

namespace cachekv {

void EpochState::advance_to(std::uint32_t epoch) {
  std::uint32_t cur = epoch_.load(std::memory_order_relaxed);
  do {
    if (epoch < cur) throw usage_error("epoch must be non-decreasing");
  } while (!epoch_.compare_exchange_weak(cur, epoch, std::memory_order_relaxed));
}

Score score_on_insert(PolicyId policy, std::uint32_t epoch, std::uint64_t clock,
                      std::optional<Score> custom) {
  if ((policy == PolicyId::kCustomized) != custom.has_value()) {
    throw usage_error(policy == PolicyId::kCustomized
                          ? "kCustomized requires a caller-supplied score"
                          : "caller score supplied for a built-in policy");
  }
  switch (policy) {
    case PolicyId::kLru:
      return clock;
    case PolicyId::kLfu:
      return 1;
    case PolicyId::kEpochLru:
      return epoch_prefixed(epoch, clock);
    case PolicyId::kEpochLfu:
      return epoch_prefixed(epoch, 1);
    case PolicyId::kCustomized:
      return *custom;
  }
  return 0;
}

Score score_on_hit(PolicyId policy, Score old_score, std::uint32_t epoch, std::uint64_t clock,
                   std::optional<Score> custom) noexcept {
  switch (policy) {
    case PolicyId::kLru:
      return clock;
    case PolicyId::kLfu:
      return saturating_increment(old_score);
    case PolicyId::kEpochLru:
      return epoch_prefixed(epoch, clock);
    case PolicyId::kEpochLfu: {
      const auto old_epoch = static_cast<std::uint32_t>(old_score >> 32);
      if (old_epoch != epoch) return epoch_prefixed(epoch, 1);
      const std::uint64_t low = old_score & 0xffffffffULL;
      return low == 0xffffffffULL ? old_score : epoch_prefixed(epoch, low + 1);
    }
    case PolicyId::kCustomized:
      return custom.value_or(old_score);
  }
  return old_score;
}

}  // namespace cachekv
