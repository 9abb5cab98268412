#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace cachekv {

using Key = std::uint64_t;
using Score = std::uint64_t;
using Digest = std::uint8_t;
using value_type = float;

inline constexpr std::size_t kBucketSlots = 128;

inline constexpr Key kEmptyKey = std::numeric_limits<Key>::max();
inline constexpr Key kLockedKey = std::numeric_limits<Key>::max() - 1;
inline constexpr Score kMaxScore = std::numeric_limits<Score>::max();

constexpr bool is_user_key(Key k) noexcept { return k < kLockedKey; }

/// Thrown when an API contract is violated by the caller (sentinel keys,
/// mismatched batch lengths, out-of-range positions, ...).
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TableMode : std::uint8_t { kSingle, kDual };

enum class PolicyId : std::uint8_t {
  kLru,
  kLfu,
  kEpochLru,
  kEpochLfu,
  kCustomized,
};

const char* to_string(TableMode m) noexcept;
const char* to_string(PolicyId p) noexcept;
TableMode parse_mode(const std::string& s);
PolicyId parse_policy(const std::string& s);

struct SlotPosition {
  std::size_t bucket = 0;
  std::size_t slot = 0;

  friend bool operator==(const SlotPosition&, const SlotPosition&) = default;
};

}  // namespace cachekv
