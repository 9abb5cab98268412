#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "cachekv/types.hpp"

namespace cachekv::bench {

enum class Distribution : std::uint8_t { kUniformDistinct, kZipf };

struct WorkloadSpec {
  Distribution distribution = Distribution::kUniformDistinct;
  double alpha = 0.99;             // zipf only
  std::uint64_t universe = 1 << 22;  // zipf only: ranks in [1, universe]
  std::uint64_t total_ops = 0;     // 0: unbounded stream
  std::size_t batch_size = 1 << 16;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Bijective map from an index to a user key (never a sentinel). Distinct
/// indices give distinct keys for a fixed seed.
Key key_for_index(std::uint64_t index, std::uint64_t seed) noexcept;

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
double unit_uniform(std::mt19937_64& rng) noexcept;

/// Zipf sampler over ranks [1, n] with P(r) ∝ r^-alpha, using
/// Hörmann & Derflinger's rejection-inversion method.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double alpha);
  std::uint64_t operator()(std::mt19937_64& rng) const;

  std::uint64_t n() const noexcept { return n_; }
  double alpha() const noexcept { return alpha_; }

 private:
  double h(double x) const;
  double h_integral(double x) const;
  double h_integral_inverse(double x) const;

  std::uint64_t n_;
  double alpha_;
  double h_integral_x1_;
  double h_integral_n_;
  double s_;
};

/// Deterministic key stream for a workload spec.
class KeyStream {
 public:
  explicit KeyStream(const WorkloadSpec& spec);

  Key next();
  /// Fills `out` with the next keys; returns how many were produced (fewer
  /// than out.size() only when total_ops is exhausted).
  std::size_t fill(std::span<Key> out);
  /// Rank of the most recent zipf draw (1-based), or the index for uniform.
  std::uint64_t last_rank() const noexcept { return last_rank_; }
  std::uint64_t produced() const noexcept { return produced_; }

 private:
  WorkloadSpec spec_;
  std::mt19937_64 rng_;
  std::optional<ZipfSampler> zipf_;
  std::uint64_t key_seed_;
  std::uint64_t produced_ = 0;
  std::uint64_t last_rank_ = 0;
};

/// The first spec.total_ops keys of the stream.
std::vector<Key> gen_keys(const WorkloadSpec& spec);

}  // namespace cachekv::bench
