#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cachekv/bench/report.hpp"

namespace cachekv::bench {

struct StressConfig {
  std::size_t threads = 8;
  std::uint64_t total_ops = 100'000;  // batch operations across all threads
  std::size_t capacity = std::size_t{1} << 14;
  std::size_t dim = 8;
  std::size_t batch = 16;
  std::uint64_t seed = 1;
};

/// Audit of a mixed-role run against the gate's compatibility matrix.
struct StressResult {
  std::uint64_t ops = 0;
  std::uint64_t ops_by_role[3] = {0, 0, 0};
  std::uint64_t incompatible_overlaps = 0;  // distinct roles active together
  std::uint64_t inserter_overlaps = 0;      // two inserter batches active together
  std::uint64_t negative_counts = 0;
  std::uint64_t torn_reads = 0;
  std::uint64_t structural_changes = 0;  // assign altered key/digest arrays
  std::uint64_t max_concurrent_readers = 0;
  std::uint64_t max_concurrent_updaters = 0;
  std::vector<std::string> table_issues;

  bool ok() const noexcept {
    return incompatible_overlaps == 0 && inserter_overlaps == 0 && negative_counts == 0 &&
           torn_reads == 0 && structural_changes == 0 && table_issues.empty();
  }
  ExperimentReport to_report(const StressConfig& cfg) const;
};

/// Threads issue reader, updater and inserter batches at random against one
/// table. Values are written as uniform stamps so a reader seeing mixed
/// elements has observed a torn write. Each updater thread owns a disjoint
/// key partition.
StressResult run_gate_stress(const StressConfig& cfg);

}  // namespace cachekv::bench
