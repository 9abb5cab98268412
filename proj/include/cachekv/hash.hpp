#pragma once

#include <cstdint>

#include "cachekv/types.hpp"

namespace cachekv {

/// Murmur3 64-bit finalizer. Bijective on 64-bit words.
constexpr std::uint64_t fmix64(std::uint64_t k) noexcept {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

inline constexpr std::uint64_t kSecondHashSalt = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t hash_key(Key key) noexcept { return fmix64(key); }

/// Independent hash used for the second candidate bucket in dual mode.
constexpr std::uint64_t second_hash(std::uint64_t primary) noexcept {
  return fmix64(primary ^ kSecondHashSalt);
}

// Bits 32..39: disjoint from the bucket-index bits for up to 2^32 buckets.
constexpr Digest digest_from_hash(std::uint64_t h) noexcept {
  return static_cast<Digest>(h >> 32);
}

constexpr Digest digest_of(Key key) noexcept { return digest_from_hash(hash_key(key)); }

constexpr std::size_t bucket_from_hash(std::uint64_t h, std::size_t bucket_count) noexcept {
  return static_cast<std::size_t>(h & (bucket_count - 1));
}

}  // namespace cachekv
