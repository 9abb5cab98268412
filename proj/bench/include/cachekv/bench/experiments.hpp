#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cachekv/bench/report.hpp"
#include "cachekv/hash_table.hpp"

namespace cachekv::bench {

/// Shared knobs of every experiment. Desk-scale defaults.
struct BenchConfig {
  std::size_t capacity = std::size_t{1} << 20;
  std::size_t dim = 8;
  TableMode mode = TableMode::kSingle;
  PolicyId policy = PolicyId::kLru;
  double alpha = 0.99;
  std::size_t batch = std::size_t{1} << 16;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::uint64_t universe_factor = 4;  // zipf universe = capacity * factor
  double ops_factor = 5.0;            // steady-state ops = capacity * factor

  TableConfig table_config() const;
  /// `cap=..;dim=..;mode=..;policy=..`: stable and comma-free.
  std::string describe() const;
};

/// Keys placed by fill_to_load_factor. Indices [0, next_index) of
/// key_for_index(., seed) were consumed; later indices are guaranteed absent.
struct FillResult {
  std::vector<Key> present;
  std::uint64_t next_index = 0;
  std::uint64_t seed = 0;
};

/// Inserts distinct keys so every bucket holds at most ceil(lambda*128)
/// entries and the table ends at exactly round(lambda*capacity) entries
/// without any eviction. Built-in policies only score by insert order;
/// kCustomized tables get scores 1, 2, 3, ...
FillResult fill_to_load_factor(HashTable& table, double lambda, std::uint64_t seed,
                               std::size_t batch = std::size_t{1} << 16);

/// `count` keys guaranteed absent from a table filled by `fill`.
std::vector<Key> absent_keys(const FillResult& fill, std::size_t count);

/// Load factor at the first Evicted outcome under uniform distinct-key
/// ingestion; nullopt if none occurs within `max_ops`.
std::optional<double> first_eviction_lambda(const BenchConfig& cfg, std::uint64_t max_ops);

ExperimentReport run_lf_sweep(const BenchConfig& cfg, std::span<const double> lambdas,
                              std::size_t baseline_samples = 1024);
ExperimentReport run_quality(const BenchConfig& cfg, std::span<const double> alphas,
                             std::span<const PolicyId> policies);
ExperimentReport run_admission_burst(const BenchConfig& cfg);
/// First-eviction lambda is measured for seeds seed..seed+eviction_seeds-1
/// and reported per seed plus a mean. Retention then starts from a table
/// prefilled to lambda 1.0 and ingests ops_factor * capacity Zipf accesses
/// with the base seed.
ExperimentReport run_retention(const BenchConfig& single_cfg, const BenchConfig& dual_cfg,
                               std::size_t eviction_seeds = 5);
ExperimentReport run_digest_ablation(const BenchConfig& cfg);
ExperimentReport run_min_score_montecarlo(std::size_t n_slots, std::size_t trials,
                                      std::uint64_t seed);

// Checks used by the CLI's --check mode. Each returns failure descriptions.
std::vector<std::string> check_lf_sweep(const ExperimentReport& r, TableMode mode);
std::vector<std::string> check_quality(const ExperimentReport& r);
std::vector<std::string> check_admission(const ExperimentReport& r);
std::vector<std::string> check_retention(const ExperimentReport& r);
std::vector<std::string> check_digest_ablation(const ExperimentReport& r);
std::vector<std::string> check_min_score(const ExperimentReport& r);

}  // namespace cachekv::bench
