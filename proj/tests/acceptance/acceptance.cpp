// Acceptance suite: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; otherwise only the listed numbers (1-12).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cachekv/bench/experiments.hpp"
#include "cachekv/bench/stress.hpp"
#include "cachekv/bench/workload.hpp"
#include "cachekv/hash_table.hpp"
#include "test_support.hpp"

using namespace cachekv;
using namespace cachekv::bench;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

constexpr std::size_t kDeskCapacity = std::size_t{1} << 20;

BenchConfig desk_config(TableMode mode, PolicyId policy = PolicyId::kLru) {
  BenchConfig c;
  c.capacity = kDeskCapacity;
  c.mode = mode;
  c.policy = policy;
  return c;
}

const char* mode_name(TableMode m) { return m == TableMode::kSingle ? "single" : "dual"; }

// 1. Definitive miss: exactly one line load per candidate bucket.
void definitive_miss(Verdict& v) {
  for (auto mode : {TableMode::kSingle, TableMode::kDual}) {
    HashTable t(desk_config(mode).table_config());
    const FillResult fill = fill_to_load_factor(t, 1.0, 1);
    v.expect(t.load_factor() == 1.0, "table not at lambda 1.0");
    const auto misses = absent_keys(fill, 1'000'000);
    t.reset_counters();
    const auto hit = t.contains(misses);
    const auto loads = t.counters().digest_line_loads;
    const std::uint64_t expect = (mode == TableMode::kSingle ? 1 : 2) * misses.size();
    v.detail << ' ' << mode_name(mode) << " loads=" << loads;
    v.expect(loads == expect, std::string(mode_name(mode)) + " load count");
    v.expect(std::count(hit.begin(), hit.end(), true) == 0, "absent key reported present");
  }
}

// 2. Digest selectivity on full buckets, and the no-digest ablation.
void digest_selectivity(Verdict& v) {
  for (bool digest : {true, false}) {
    TableConfig tc = desk_config(TableMode::kSingle).table_config();
    tc.digest_filter = digest;
    HashTable t(tc);
    const FillResult fill = fill_to_load_factor(t, 1.0, 2);
    const auto misses = absent_keys(fill, 1'000'000);
    t.reset_counters();
    t.contains(misses);
    const double per_miss = static_cast<double>(t.counters().full_key_compares) /
                            static_cast<double>(misses.size());
    v.detail << (digest ? " digest=" : " no-digest=") << format_value(per_miss);
    if (digest) {
      v.expect(per_miss >= 0.45 && per_miss <= 0.55, "compares per miss outside [0.45, 0.55]");
    } else {
      v.expect(per_miss == 128.0, "no-digest compares per miss != 128");
    }
  }
}

// 3. Per-miss and per-hit line loads do not move with the load factor.
void load_factor_invariance(Verdict& v) {
  const std::size_t probes = 100'000;
  for (auto mode : {TableMode::kSingle, TableMode::kDual}) {
    v.detail << ' ' << mode_name(mode) << ':';
    for (double lambda : {0.25, 0.5, 0.75, 1.0}) {
      HashTable t(desk_config(mode).table_config());
      const FillResult fill = fill_to_load_factor(t, lambda, 3);
      const auto misses = absent_keys(fill, probes);
      const std::vector<Key> hits(fill.present.begin(), fill.present.begin() + probes);
      t.reset_counters();
      t.find_ptr(misses);
      const auto miss_loads = t.counters().digest_line_loads;
      t.reset_counters();
      const auto res = t.find_ptr(hits);
      const auto hit_loads = t.counters().digest_line_loads;
      const bool all_found =
          std::all_of(res.begin(), res.end(), [](const LookupResult& r) { return r.found(); });
      v.detail << " l=" << lambda << " miss=" << format_value(double(miss_loads) / probes)
               << " hit=" << format_value(double(hit_loads) / probes);
      v.expect(all_found, "present key not found");
      if (mode == TableMode::kSingle) {
        v.expect(miss_loads == probes && hit_loads == probes, "single-mode loads moved with lambda");
      } else {
        // A dual hit costs one or two loads depending on which candidate holds it.
        v.expect(miss_loads == 2 * probes, "dual-mode miss loads moved with lambda");
        v.expect(hit_loads >= probes && hit_loads <= 2 * probes, "dual hit loads out of [1, 2]");
      }
    }
  }
}

// 4. Sustained upserts into a full table: no failure, exact outcome partition.
void full_capacity_ingest(Verdict& v) {
  for (auto mode : {TableMode::kSingle, TableMode::kDual}) {
    const BenchConfig cfg = desk_config(mode, PolicyId::kCustomized);
    HashTable t(cfg.table_config());
    const FillResult fill = fill_to_load_factor(t, 1.0, 4);
    const std::size_t buckets_before = t.bucket_count();
    const std::uint64_t total = 5 * cfg.capacity;
    std::mt19937_64 rng(4);
    std::uint64_t counts[4] = {0, 0, 0, 0};
    std::uint64_t inserted_size_delta = 0;
    bool threw = false;
    std::vector<Key> keys(cfg.batch);
    std::vector<Score> scores(cfg.batch);
    std::vector<value_type> values(cfg.batch * cfg.dim, 1.0F);
    try {
      for (std::uint64_t done = 0; done < total; done += cfg.batch) {
        for (std::size_t i = 0; i < cfg.batch; ++i) {
          // Half the draws revisit the prefill index range, half are new keys.
          keys[i] = key_for_index(rng() % (2 * fill.next_index), fill.seed);
          scores[i] = rng() % (2 * cfg.capacity) + 1;
        }
        const std::size_t before = t.size();
        const auto outs = t.insert_or_assign(keys, values, scores);
        for (const auto& o : outs) ++counts[static_cast<int>(o.kind)];
        inserted_size_delta += t.size() - before;
      }
    } catch (const std::exception& e) {
      threw = true;
      v.detail << " error=" << e.what();
    }
    const std::uint64_t sum = counts[0] + counts[1] + counts[2] + counts[3];
    v.detail << ' ' << mode_name(mode) << " ins=" << counts[0] << " upd=" << counts[1]
             << " rej=" << counts[2] << " evi=" << counts[3];
    v.expect(!threw, "capacity error raised");
    v.expect(sum == total, "outcomes do not partition the batch");
    v.expect(counts[0] == inserted_size_delta, "inserted count differs from size growth");
    v.expect(t.bucket_count() == buckets_before && t.capacity() == cfg.capacity, "table resized");
    v.expect(t.size() <= t.capacity(), "size above capacity");
    v.expect(counts[1] > 0 && counts[2] > 0 && counts[3] > 0, "an outcome kind never occurred");
    v.expect(t.validate().empty(), "table invariants violated");
  }
}

// 5. Forced evictions on crafted buckets match an independent min scan.
void eviction_oracle(Verdict& v) {
  std::mt19937_64 rng(5);
  std::size_t mismatches = 0;
  const std::size_t trials = 10'000;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto bucket = std::make_unique<Bucket>();
    TxnCounters c;
    SlotWriteContext ctx;
    ctx.counters = &c;
    const Score spread = 1 + rng() % 16;  // small ranges force score ties
    for (Key k = 1; k <= kBucketSlots; ++k) {
      upsert_single(*bucket, k, digest_of(k), rng() % spread, {}, ctx);
    }
    const auto before = snapshot_of(*bucket);
    const auto expect = cachekv::testing::oracle_min_slot(before);
    const Key incoming = 1000 + trial;
    const auto out = upsert_single(*bucket, incoming, digest_of(incoming), spread, {}, ctx);
    const bool ok = expect && out.kind == UpsertKind::kEvicted && out.position &&
                    out.position->slot == *expect && out.evicted_key == before.keys[*expect] &&
                    out.evicted_score == before.scores[*expect];
    mismatches += !ok;
  }

  // The same check through a dual-mode table, where the victim bucket is the
  // candidate with the lower minimum (first candidate on ties).
  TableConfig tc;
  tc.capacity = 256 * kBucketSlots;
  tc.mode = TableMode::kDual;
  tc.score_policy = PolicyId::kCustomized;
  tc.value_dim = 4;
  HashTable t(tc);
  const FillResult fill = fill_to_load_factor(t, 1.0, 5, 4096);
  std::vector<Score> crafted(fill.present.size());
  for (auto& s : crafted) s = rng() % 8;
  t.assign_scores(fill.present, crafted);
  const std::vector<value_type> value(tc.value_dim, 0.0F);
  const std::vector<Score> high{1'000'000'000};
  std::size_t table_mismatches = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const Key k = key_for_index(fill.next_index + i, fill.seed);
    const auto [b1, b2] = t.candidate_buckets(k);
    const auto s1 = t.inspect_bucket(b1);
    const auto s2 = t.inspect_bucket(b2);
    const auto m1 = cachekv::testing::oracle_min_slot(s1);
    const auto m2 = cachekv::testing::oracle_min_slot(s2);
    const bool first = s1.scores[*m1] <= s2.scores[*m2];
    const auto& snap = first ? s1 : s2;
    const std::size_t slot = first ? *m1 : *m2;
    const auto out = t.insert_or_assign(std::span(&k, 1), value, high)[0];
    const bool ok = out.kind == UpsertKind::kEvicted && out.position &&
                    out.position->bucket == (first ? b1 : b2) && out.position->slot == slot &&
                    out.evicted_key == snap.keys[slot];
    table_mismatches += !ok;
  }
  v.detail << " bucket-level mismatches=" << mismatches << "/" << trials
           << " dual-table mismatches=" << table_mismatches << "/" << trials;
  v.expect(mismatches == 0, "bucket-level eviction differs from oracle");
  v.expect(table_mismatches == 0, "dual-table eviction differs from oracle");
}

// Balls into bins over the table's own key stream: load factor when the
// first ball lands in a full bin.
double bins_first_overflow(std::size_t capacity, std::uint64_t seed) {
  const std::size_t bins = capacity / kBucketSlots;
  std::vector<std::size_t> load(bins, 0);
  WorkloadSpec spec;
  spec.seed = seed;
  KeyStream s(spec);
  for (std::uint64_t i = 0;; ++i) {
    if (++load[fmix64(s.next()) & (bins - 1)] > kBucketSlots) {
      return static_cast<double>(i) / static_cast<double>(capacity);
    }
  }
}

// 6. First-eviction load factor per mode over five seeds.
void first_eviction(Verdict& v) {
  for (auto mode : {TableMode::kSingle, TableMode::kDual}) {
    double sum = 0.0;
    v.detail << ' ' << mode_name(mode) << ':';
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      BenchConfig cfg = desk_config(mode, PolicyId::kCustomized);
      cfg.seed = seed;
      const auto l = first_eviction_lambda(cfg, 4 * cfg.capacity);
      v.expect(l.has_value(), "no eviction observed");
      const double val = l.value_or(1.0);
      sum += val;
      v.detail << ' ' << format_value(val);
      if (mode == TableMode::kSingle) {
        v.expect(val == bins_first_overflow(cfg.capacity, seed),
                 "single-mode value differs from the bins oracle");
      } else {
        v.expect(val >= 0.95, "dual first eviction below 0.95");
      }
    }
    const double mean = sum / 5.0;
    v.detail << " mean=" << format_value(mean);
    if (mode == TableMode::kSingle) {
      v.expect(mean >= 0.55 && mean <= 0.72, "single mean outside [0.55, 0.72]");
    }
  }
}

// 7. Dual mode keeps more of the ideal top-N than single mode at lambda 1.0.
void retention_advantage(Verdict& v) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    BenchConfig single = desk_config(TableMode::kSingle, PolicyId::kCustomized);
    BenchConfig dual = desk_config(TableMode::kDual, PolicyId::kCustomized);
    single.seed = dual.seed = seed;
    const auto rep = run_retention(single, dual, 1);
    const auto rs = rep.value("zipf0.99", "topn_retention", single.describe());
    const auto rd = rep.value("zipf0.99", "topn_retention", dual.describe());
    const auto ls = rep.value("zipf0.99", "lambda", single.describe());
    const auto ld = rep.value("zipf0.99", "lambda", dual.describe());
    v.expect(rs && rd, "retention rows missing");
    if (!rs || !rd) return;
    const double gain_pp = 100.0 * (*rd - *rs);
    v.detail << " seed" << seed << ": single=" << format_value(*rs) << " dual=" << format_value(*rd)
             << " gain=" << format_value(gain_pp) << "pp";
    v.expect(ls == 1.0 && ld == 1.0, "table left lambda 1.0");
    v.expect(gain_pp >= 2.0, "gain below 2 pp");
  }
}

// 8. LFU at least matches LRU under skew; hit rate rises with alpha.
void policy_ordering(Verdict& v) {
  const std::vector<double> alphas{0.5, 0.75, 0.99, 1.25};
  const std::vector<PolicyId> policies{PolicyId::kLru, PolicyId::kLfu};
  const BenchConfig cfg = desk_config(TableMode::kSingle);
  const auto rep = run_quality(cfg, alphas, policies);
  auto hit = [&](PolicyId p, double a) {
    BenchConfig c = cfg;
    c.policy = p;
    return rep.value(format_value(a), "hit_rate", c.describe()).value_or(-1.0);
  };
  for (auto p : policies) {
    v.detail << ' ' << to_string(p) << ':';
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      v.detail << ' ' << format_value(hit(p, alphas[i]));
      if (i > 0) v.expect(hit(p, alphas[i]) >= hit(p, alphas[i - 1]), "hit rate not monotone");
    }
  }
  for (double a : {0.75, 0.99}) {
    v.expect(hit(PolicyId::kLfu, a) >= hit(PolicyId::kLru, a), "lfu below lru");
  }
}

// 9. Admission control under low- and high-score bursts.
void admission_burst(Verdict& v) {
  const auto rep = run_admission_burst(desk_config(TableMode::kSingle, PolicyId::kCustomized));
  const auto low_adm = rep.value("low", "admitted_fraction");
  const auto low_dpp = rep.value("low", "hit_rate_delta_pp");
  const auto low_occ = rep.value("low", "occupancy_change");
  const auto high_adm = rep.value("high", "admitted_fraction");
  const auto high_dpp = rep.value("high", "hit_rate_delta_pp");
  v.expect(low_adm && low_dpp && low_occ && high_adm && high_dpp, "admission rows missing");
  if (!(low_adm && low_dpp && low_occ && high_adm && high_dpp)) return;
  v.detail << " low: admitted=" << format_value(*low_adm) << " delta=" << format_value(*low_dpp)
           << "pp; high: admitted=" << format_value(*high_adm)
           << " delta=" << format_value(*high_dpp) << "pp";
  v.expect(*low_adm == 0.0 && *low_dpp == 0.0 && *low_occ == 0.0, "low burst changed the table");
  v.expect(*high_adm == 1.0, "high burst not fully admitted");
  v.expect(*high_dpp <= -5.0, "high burst delta above -5 pp");
}

// 10. Expected minimum of n and 2n uniform scores.
void min_of_uniforms(Verdict& v) {
  const auto rep = run_min_score_montecarlo(128, 100'000, 10);
  const double single = rep.value("uniform", "mean_min_single").value_or(-1.0);
  const double dual = rep.value("uniform", "mean_min_dual").value_or(-1.0);
  const double ref_single = 1.0 / 129.0;
  const double ref_dual = 1.0 / 257.0;
  v.detail << " single=" << format_value(single) << " (ref " << format_value(ref_single)
           << ") dual=" << format_value(dual) << " (ref " << format_value(ref_dual) << ")";
  v.expect(std::abs(single - ref_single) <= 0.1 * ref_single, "single mean outside 10%");
  v.expect(std::abs(dual - ref_dual) <= 0.1 * ref_dual, "dual mean outside 10%");
}

// 11. Mixed-role stress against the compatibility matrix.
void gate_stress(Verdict& v) {
  StressConfig cfg;
  cfg.threads = 8;
  cfg.total_ops = 100'000;
  const auto r = run_gate_stress(cfg);
  v.detail << " ops=" << r.ops << " readers=" << r.ops_by_role[0]
           << " updaters=" << r.ops_by_role[1] << " inserters=" << r.ops_by_role[2]
           << " overlaps=" << r.incompatible_overlaps + r.inserter_overlaps
           << " torn=" << r.torn_reads << " negative=" << r.negative_counts
           << " structural=" << r.structural_changes;
  v.expect(r.ops == cfg.total_ops, "op count");
  v.expect(r.ops_by_role[0] > 0 && r.ops_by_role[1] > 0 && r.ops_by_role[2] > 0,
           "a role never ran");
  v.expect(r.ok(), "stress audit failed");
}

// 12. Line loads of find_ptr do not depend on where values live.
void tier_independence(Verdict& v) {
  const BenchConfig cfg = desk_config(TableMode::kSingle);
  TableConfig fast_cfg = cfg.table_config();
  TableConfig split_cfg = fast_cfg;
  split_cfg.fast_tier_budget = fast_cfg.bucket_count() / 2;
  HashTable fast(fast_cfg);
  HashTable split(split_cfg);
  const FillResult f1 = fill_to_load_factor(fast, 0.9, 12);
  const FillResult f2 = fill_to_load_factor(split, 0.9, 12);
  v.expect(f1.present == f2.present, "fills differ");
  std::vector<Key> batch(f1.present.begin(), f1.present.begin() + 500'000);
  const auto extra = absent_keys(f1, 500'000);
  batch.insert(batch.end(), extra.begin(), extra.end());
  fast.reset_counters();
  split.reset_counters();
  fast.find_ptr(batch);
  const auto res = split.find_ptr(batch);
  const auto a = fast.counters().digest_line_loads;
  const auto b = split.counters().digest_line_loads;
  const auto overflow = std::count_if(res.begin(), res.end(), [](const LookupResult& r) {
    return r.found() && r.handle.tier == Tier::kOverflow;
  });
  v.detail << " all-fast=" << a << " split=" << b << " overflow-hits=" << overflow;
  v.expect(a == b, "line loads differ between tier layouts");
  v.expect(overflow > 0, "no value landed in the overflow tier");
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "definitive miss", definitive_miss},
      {2, "digest selectivity", digest_selectivity},
      {3, "load-factor invariance", load_factor_invariance},
      {4, "full-capacity ingest", full_capacity_ingest},
      {5, "eviction oracle equivalence", eviction_oracle},
      {6, "first-eviction load factor", first_eviction},
      {7, "retention advantage", retention_advantage},
      {8, "policy ordering", policy_ordering},
      {9, "admission burst", admission_burst},
      {10, "min-score Monte Carlo", min_of_uniforms},
      {11, "triple-group stress", gate_stress},
      {12, "tier independence", tier_independence},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > static_cast<int>(all.size())) {
      std::fprintf(stderr, "unknown criterion '%s' (expected 1-%zu)\n", argv[i], all.size());
      return 2;
    }
    wanted.push_back(id);
  }

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d %-28s (%.1fs)%s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                v.detail.str().c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
