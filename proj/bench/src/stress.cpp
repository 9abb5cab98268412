#include "cachekv/bench/stress.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include "cachekv/bench/workload.hpp"
#include "cachekv/hash_table.hpp"

namespace cachekv::bench {

namespace {

void atomic_max(std::atomic<std::uint64_t>& m, std::uint64_t v) {
  std::uint64_t cur = m.load(std::memory_order_relaxed);
  while (v > cur && !m.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
  }
}

}  // namespace

StressResult run_gate_stress(const StressConfig& cfg) {
  if (cfg.threads == 0 || cfg.batch == 0) throw usage_error("threads and batch must be positive");
  TableConfig tc;
  tc.capacity = cfg.capacity;
  tc.value_dim = cfg.dim;
  tc.score_policy = PolicyId::kLru;
  HashTable table(tc);

  std::atomic<std::int64_t> active[3] = {0, 0, 0};
  std::atomic<std::uint64_t> incompatible{0}, inserter_overlap{0}, negative{0};
  std::atomic<std::uint64_t> max_readers{0}, max_updaters{0};
  table.gate().set_observer([&](Role role, GateEvent ev) {
    const auto r = static_cast<std::size_t>(role);
    if (ev == GateEvent::kEnter) {
      const std::int64_t mine = active[r].fetch_add(1) + 1;
      for (std::size_t o = 0; o < 3; ++o) {
        if (o != r && active[o].load() != 0) incompatible.fetch_add(1);
      }
      if (role == Role::kInserter && mine > 1) inserter_overlap.fetch_add(1);
      if (role == Role::kReader) atomic_max(max_readers, static_cast<std::uint64_t>(mine));
      if (role == Role::kUpdater) atomic_max(max_updaters, static_cast<std::uint64_t>(mine));
    } else {
      if (active[r].fetch_sub(1) - 1 < 0) negative.fetch_add(1);
    }
  });

  const std::size_t pool = cfg.capacity / 2;
  const std::uint64_t key_seed = cfg.seed * 0x9e3779b97f4a7c15ULL + 17;
  auto key_at = [&](std::size_t i) { return key_for_index(i, key_seed); };

  std::atomic<std::uint64_t> torn{0}, structural{0}, next_op{0};
  std::atomic<std::uint64_t> by_role[3] = {0, 0, 0};
  std::atomic<std::uint32_t> stamp_counter{1};

  auto worker = [&](std::size_t t) {
    std::mt19937_64 rng(cfg.seed * 1000 + t);
    const std::size_t dim = cfg.dim;
    std::vector<Key> keys(cfg.batch);
    std::vector<value_type> vals(cfg.batch * dim);
    while (next_op.fetch_add(1) < cfg.total_ops) {
      const double pick = unit_uniform(rng);
      if (pick < 0.55) {
        for (auto& k : keys) k = key_at(rng() % pool);
        const auto res = table.find(keys, vals);
        for (std::size_t i = 0; i < keys.size(); ++i) {
          if (!res[i].found()) continue;
          const value_type first = vals[i * dim];
          for (std::size_t j = 1; j < dim; ++j) {
            if (vals[i * dim + j] != first) {
              torn.fetch_add(1);
              break;
            }
          }
        }
        by_role[0].fetch_add(1);
      } else if (pick < 0.85) {
        // Keys owned by this thread only, so concurrent updaters never share a slot.
        for (auto& k : keys) {
          const std::size_t slot = (rng() % (pool / cfg.threads)) * cfg.threads + t;
          k = key_at(slot);
        }
        for (std::size_t i = 0; i < keys.size(); ++i) {
          const auto stamp = static_cast<value_type>(stamp_counter.fetch_add(1) % (1u << 23));
          std::fill_n(vals.begin() + static_cast<std::ptrdiff_t>(i * dim), dim, stamp);
        }
        auto g = table.acquire(Role::kUpdater);
        const std::uint64_t before = table.structural_fingerprint();
        table.assign(g, keys, vals);
        if (table.structural_fingerprint() != before) structural.fetch_add(1);
        g.release();
        by_role[1].fetch_add(1);
      } else {
        for (auto& k : keys) k = key_at(rng() % pool);
        if (unit_uniform(rng) < 0.2) {
          table.erase(keys);
        } else {
          for (std::size_t i = 0; i < keys.size(); ++i) {
            const auto stamp = static_cast<value_type>(stamp_counter.fetch_add(1) % (1u << 23));
            std::fill_n(vals.begin() + static_cast<std::ptrdiff_t>(i * dim), dim, stamp);
          }
          table.insert_or_assign(keys, vals);
        }
        by_role[2].fetch_add(1);
      }
    }
  };

  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < cfg.threads; ++t) threads.emplace_back(worker, t);
  for (auto& th : threads) th.join();
  table.gate().set_observer(nullptr);

  StressResult r;
  for (std::size_t i = 0; i < 3; ++i) {
    r.ops_by_role[i] = by_role[i].load();
    r.ops += r.ops_by_role[i];
    if (active[i].load() != 0) ++r.negative_counts;
  }
  r.incompatible_overlaps = incompatible.load();
  r.inserter_overlaps = inserter_overlap.load();
  r.negative_counts += negative.load();
  r.torn_reads = torn.load();
  r.structural_changes = structural.load();
  r.max_concurrent_readers = max_readers.load();
  r.max_concurrent_updaters = max_updaters.load();
  r.table_issues = table.validate();
  return r;
}

ExperimentReport StressResult::to_report(const StressConfig& cfg) const {
  ExperimentReport rep;
  const std::string conf = "threads=" + std::to_string(cfg.threads) +
                           ";cap=" + std::to_string(cfg.capacity) + ";dim=" + std::to_string(cfg.dim);
  auto add = [&](const char* m, double v) { rep.add("stress-gate", conf, "mixed", m, v, cfg.seed); };
  add("ops", static_cast<double>(ops));
  add("reader_ops", static_cast<double>(ops_by_role[0]));
  add("updater_ops", static_cast<double>(ops_by_role[1]));
  add("inserter_ops", static_cast<double>(ops_by_role[2]));
  add("incompatible_overlaps", static_cast<double>(incompatible_overlaps));
  add("inserter_overlaps", static_cast<double>(inserter_overlaps));
  add("negative_counts", static_cast<double>(negative_counts));
  add("torn_reads", static_cast<double>(torn_reads));
  add("structural_changes", static_cast<double>(structural_changes));
  add("max_concurrent_readers", static_cast<double>(max_concurrent_readers));
  add("max_concurrent_updaters", static_cast<double>(max_concurrent_updaters));
  add("table_issues", static_cast<double>(table_issues.size()));
  return rep;
}

}  // namespace cachekv::bench
