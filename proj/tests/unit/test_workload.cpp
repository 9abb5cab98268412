#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <unordered_set>
#include <vector>

#include "cachekv/bench/baseline.hpp"
#include "cachekv/bench/workload.hpp"

using namespace cachekv;
using namespace cachekv::bench;

namespace {

double generalized_harmonic(std::uint64_t n, double alpha) {
  double h = 0.0;
  for (std::uint64_t r = 1; r <= n; ++r) h += std::pow(static_cast<double>(r), -alpha);
  return h;
}

}  // namespace

TEST_SUITE("workload") {
  TEST_CASE("key_for_index yields distinct user keys") {
    std::unordered_set<Key> seen;
    for (std::uint64_t i = 0; i < 200000; ++i) {
      const Key k = key_for_index(i, 3);
      REQUIRE(is_user_key(k));
      seen.insert(k);
    }
    CHECK(seen.size() == 200000);
    CHECK(key_for_index(5, 3) != key_for_index(5, 4));
  }

  TEST_CASE("same seed, same stream") {
    WorkloadSpec spec;
    spec.distribution = Distribution::kZipf;
    spec.universe = 1000;
    spec.total_ops = 5000;
    spec.seed = 9;
    CHECK(gen_keys(spec) == gen_keys(spec));
    auto other = spec;
    other.seed = 10;
    CHECK(gen_keys(spec) != gen_keys(other));
  }

  TEST_CASE("bounded streams stop at total_ops") {
    WorkloadSpec spec;
    spec.total_ops = 10;
    KeyStream s(spec);
    std::vector<Key> buf(8);
    CHECK(s.fill(buf) == 8);
    CHECK(s.fill(buf) == 2);
    CHECK(s.fill(buf) == 0);
    CHECK(s.produced() == 10);
  }

  TEST_CASE("uniform-distinct streams never repeat") {
    WorkloadSpec spec;
    spec.total_ops = 100000;
    const auto keys = gen_keys(spec);
    CHECK(std::unordered_set<Key>(keys.begin(), keys.end()).size() == keys.size());
  }

  TEST_CASE("zipf rank frequencies follow the power law") {
    for (double alpha : {0.5, 0.99, 1.25}) {
      const std::uint64_t n = 10000;
      ZipfSampler z(n, alpha);
      std::mt19937_64 rng(17);
      const int draws = 400000;
      std::map<std::uint64_t, int> counts;
      for (int i = 0; i < draws; ++i) {
        const auto r = z(rng);
        REQUIRE(r >= 1);
        REQUIRE(r <= n);
        ++counts[r];
      }
      const double h = generalized_harmonic(n, alpha);
      for (std::uint64_t rank : {1, 2, 10}) {
        const double expected = std::pow(static_cast<double>(rank), -alpha) / h;
        const double observed = static_cast<double>(counts[rank]) / draws;
        CHECK(observed == doctest::Approx(expected).epsilon(0.1));
      }
    }
  }

  TEST_CASE("zipf keys are a function of rank") {
    WorkloadSpec spec;
    spec.distribution = Distribution::kZipf;
    spec.universe = 100;
    KeyStream s(spec);
    std::map<std::uint64_t, Key> by_rank;
    std::unordered_set<Key> keys;
    for (int i = 0; i < 5000; ++i) {
      const Key k = s.next();
      REQUIRE(s.last_rank() >= 1);
      REQUIRE(s.last_rank() <= 100);
      const auto [it, fresh] = by_rank.emplace(s.last_rank(), k);
      REQUIRE(it->second == k);
      keys.insert(k);
    }
    CHECK(keys.size() == by_rank.size());
  }

  TEST_CASE("invalid specs are refused") {
    WorkloadSpec spec;
    spec.distribution = Distribution::kZipf;
    spec.alpha = 0.0;
    CHECK_THROWS_AS(spec.validate(), usage_error);
    CHECK_THROWS_AS(ZipfSampler(10, -1.0), usage_error);
    CHECK_THROWS_AS(ZipfSampler(0, 1.0), usage_error);
    spec.alpha = 1.0;
    spec.batch_size = 0;
    CHECK_THROWS_AS(spec.validate(), usage_error);
  }

  TEST_CASE("unit_uniform stays in [0, 1)") {
    std::mt19937_64 rng(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double u = unit_uniform(rng);
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  }
}

TEST_SUITE("baseline") {
  TEST_CASE("linear probing finds what it inserted and fails when full") {
    BaselineTable t(64);
    for (Key k = 1; k <= 64; ++k) REQUIRE(t.insert(k).ok);
    CHECK(t.load_factor() == 1.0);
    const auto miss = t.find(1000);
    CHECK_FALSE(miss.ok);
    CHECK(miss.probes == 64);
    CHECK_FALSE(t.insert(1000).ok);
    for (Key k = 1; k <= 64; ++k) CHECK(t.find(k).ok);
    CHECK_THROWS_AS(BaselineTable(100), usage_error);
  }

  TEST_CASE("probe length grows with load") {
    BaselineTable t(1 << 14);
    Key next = 1;
    double prev = 0.0;
    for (double lf : {0.25, 0.5, 0.75, 0.9}) {
      while (t.load_factor() < lf) t.insert(next++);
      std::size_t probes = 0;
      for (Key k = 1'000'000; k < 1'002'000; ++k) probes += t.find(k).probes;
      const double mean = probes / 2000.0;
      CHECK(mean > prev);
      prev = mean;
    }
  }
}
