#include <doctest.h>

#include <thread>
#include <vector>

#include "cachekv/hash_table.hpp"
#include "cachekv/metrics.hpp"
#include "test_support.hpp"

using namespace cachekv;
using cachekv::testing::small_config;
using cachekv::testing::stamps;

TEST_SUITE("metrics") {
  TEST_CASE("counters add field by field") {
    TxnCounters a{1, 2, 3, 4, 5, 6};
    const TxnCounters b{10, 20, 30, 40, 50, 60};
    CHECK(a + b == TxnCounters{11, 22, 33, 44, 55, 66});
    a += b;
    CHECK(a == TxnCounters{11, 22, 33, 44, 55, 66});
  }

  TEST_CASE("registry merges shards from many threads") {
    CounterRegistry reg;
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t) {
      ts.emplace_back([&] {
        for (int i = 0; i < 1000; ++i) reg.merge(TxnCounters{1, 2, 0, 0, 0, 1});
      });
    }
    for (auto& th : ts) th.join();
    CHECK(reg.snapshot() == TxnCounters{4000, 8000, 0, 0, 0, 4000});
    reg.reset();
    CHECK(reg.snapshot() == TxnCounters{});
  }

  TEST_CASE("table counters are additive across batches and workers") {
    for (std::size_t workers : {std::size_t{1}, std::size_t{3}}) {
      TableConfig cfg = small_config(8);
      cfg.workers = workers;
      HashTable t(cfg);
      std::vector<Key> keys(600);
      for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = i + 1;
      t.insert_or_assign(keys, stamps(keys, cfg.value_dim));
      t.reset_counters();
      std::vector<Key> first(keys.begin(), keys.begin() + 300);
      std::vector<Key> second(keys.begin() + 300, keys.end());
      t.contains(first);
      const auto a = t.counters();
      t.contains(second);
      const auto ab = t.counters();
      t.reset_counters();
      t.contains(keys);
      CHECK(t.counters() == ab);
      CHECK(ab.digest_line_loads == 600);
      CHECK(a.digest_line_loads == 300);
    }
  }

  TEST_CASE("value copies are attributed to the tier") {
    TableConfig cfg = small_config(8);
    cfg.fast_tier_budget = 0;
    HashTable t(cfg);
    const std::vector<Key> keys{1, 2, 3};
    t.insert_or_assign(keys, stamps(keys, cfg.value_dim));
    std::vector<value_type> out(keys.size() * cfg.value_dim);
    t.reset_counters();
    t.find(keys, out);
    CHECK(t.counters().value_copies_overflow == 3);
    CHECK(t.counters().value_copies_fast == 0);
  }

  TEST_CASE("top-N retention against an ideal score log") {
    HashTable t(small_config(8, TableMode::kSingle, PolicyId::kCustomized));
    IdealScoreLog ideal;
    std::vector<Key> keep;
    std::vector<Score> keep_scores;
    for (Key k = 1; k <= 40; ++k) {
      ideal[k] = 1000 + k;  // top 40
      keep.push_back(k);
      keep_scores.push_back(1000 + k);
    }
    for (Key k = 41; k <= 100; ++k) ideal[k] = k;
    t.insert_or_assign(keep, stamps(keep, 4), keep_scores);
    CHECK(topn_retention(t, ideal, 40) == 1.0);
    CHECK(topn_retention(t, ideal, 80) == 0.5);

    HashTable other(small_config(8, TableMode::kSingle, PolicyId::kCustomized));
    std::vector<Key> low;
    for (Key k = 41; k <= 60; ++k) low.push_back(k);
    other.insert_or_assign(low, stamps(low, 4), std::vector<Score>(low.size(), 1));
    CHECK(topn_retention(other, ideal, 40) == 0.0);

    CHECK_THROWS_AS(topn_retention(t, ideal, 101), usage_error);
    CHECK_THROWS_AS(topn_retention(t, ideal, 0), usage_error);
  }

  TEST_CASE("top-N breaks score ties by key") {
    HashTable t(small_config(8, TableMode::kSingle, PolicyId::kCustomized));
    IdealScoreLog ideal{{5, 7}, {6, 7}, {7, 7}};
    const std::vector<Key> present{7};
    t.insert_or_assign(present, stamps(present, 4), std::vector<Score>{7});
    CHECK(topn_retention(t, ideal, 1) == 1.0);
  }

  TEST_CASE("quality stats hit rate") {
    QualityStats q;
    CHECK(q.hit_rate() == 0.0);
    q.lookups = 8;
    q.hits = 6;
    CHECK(q.hit_rate() == 0.75);
  }
}
