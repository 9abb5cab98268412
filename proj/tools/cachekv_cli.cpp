// cachekv command-line experiment harness.
//
//   cachekv bench lf-sweep|quality|admission|retention|digest-ablation|min-score [flags]
//   cachekv stress gate [flags]
//
// Results are written as CSV (stdout unless --csv is given). With --check,
// the experiment's expectations are evaluated and the exit code is nonzero
// on any failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cachekv/bench/experiments.hpp"
#include "cachekv/bench/stress.hpp"

namespace {

using namespace cachekv;
using namespace cachekv::bench;

struct Options {
  std::size_t capacity = std::size_t{1} << 20;
  std::size_t dim = 8;
  std::string mode = "single";
  std::string policy = "lru";
  std::vector<double> alphas;
  std::vector<double> lambdas;
  std::vector<std::string> policies;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::size_t batch = std::size_t{1} << 16;
  std::size_t trials = 100'000;
  std::uint64_t ops = 100'000;
  double ops_factor = 5.0;
  std::uint64_t universe_factor = 4;
  std::string csv;
  bool check = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--capacity", o.capacity, "Key slots (multiple of 128, power-of-two buckets)");
  sub->add_option("--dim", o.dim, "Value elements per key");
  sub->add_option("--mode", o.mode, "Bucket mode")->check(CLI::IsMember({"single", "dual"}));
  sub->add_option("--policy", o.policy, "Score policy")
      ->check(CLI::IsMember({"lru", "lfu", "epoch_lru", "epoch_lfu", "customized"}));
  sub->add_option("--alpha", o.alphas, "Zipf skew (repeatable)");
  sub->add_option("--seed", o.seed, "RNG seed");
  sub->add_option("--threads", o.threads, "Worker threads");
  sub->add_option("--batch", o.batch, "Keys per batch");
  sub->add_option("--csv", o.csv, "Write CSV here instead of stdout");
  sub->add_flag("--check", o.check, "Evaluate expectations; exit nonzero on failure");
}

BenchConfig bench_config(const Options& o) {
  BenchConfig c;
  c.capacity = o.capacity;
  c.dim = o.dim;
  c.mode = parse_mode(o.mode);
  c.policy = parse_policy(o.policy);
  c.alpha = o.alphas.empty() ? 0.99 : o.alphas.front();
  c.batch = o.batch;
  c.seed = o.seed;
  c.threads = o.threads;
  c.ops_factor = o.ops_factor;
  c.universe_factor = o.universe_factor;
  return c;
}

int emit(const Options& o, const ExperimentReport& rep, const std::vector<std::string>& fails) {
  if (o.csv.empty()) {
    rep.write_csv(std::cout);
  } else {
    std::ofstream f(o.csv, std::ios::binary);
    if (!f) {
      std::cerr << "cannot open " << o.csv << "\n";
      return 2;
    }
    rep.write_csv(f);
  }
  if (!o.check) return 0;
  for (const auto& f : fails) std::cerr << "CHECK FAILED: " << f << "\n";
  if (fails.empty()) std::cerr << "all checks passed\n";
  return fails.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cachekv: cache-semantic hash table experiment harness"};
  app.require_subcommand(1);
  Options o;
  int rc = 0;

  auto* bench = app.add_subcommand("bench", "Run an experiment")->require_subcommand(1);

  auto* lf = bench->add_subcommand("lf-sweep", "Miss/hit work versus load factor, with a linear-probing baseline");
  add_common(lf, o);
  lf->add_option("--lambda", o.lambdas, "Load factors (repeatable)");
  lf->callback([&] {
    if (o.lambdas.empty()) o.lambdas = {0.25, 0.5, 0.75, 0.875, 1.0};
    const auto cfg = bench_config(o);
    const auto rep = run_lf_sweep(cfg, o.lambdas);
    rc = emit(o, rep, check_lf_sweep(rep, cfg.mode));
  });

  auto* quality = bench->add_subcommand("quality", "Hit rate by score policy and zipf skew");
  add_common(quality, o);
  quality->add_option("--policies", o.policies, "Policies to sweep (default: all five)");
  quality->add_option("--ops-factor", o.ops_factor, "Measured ops as a multiple of capacity");
  quality->add_option("--universe-factor", o.universe_factor, "Zipf universe as a multiple of capacity");
  quality->callback([&] {
    if (o.alphas.empty()) o.alphas = {0.5, 0.75, 0.99, 1.25};
    std::vector<PolicyId> ps;
    if (o.policies.empty()) {
      ps = {PolicyId::kLru, PolicyId::kLfu, PolicyId::kEpochLru, PolicyId::kEpochLfu,
            PolicyId::kCustomized};
    }
    for (const auto& p : o.policies) ps.push_back(parse_policy(p));
    const auto rep = run_quality(bench_config(o), o.alphas, ps);
    rc = emit(o, rep, check_quality(rep));
  });

  auto* admission = bench->add_subcommand("admission", "Low/high score burst into a saturated table");
  add_common(admission, o);
  admission->callback([&] {
    const auto rep = run_admission_burst(bench_config(o));
    rc = emit(o, rep, check_admission(rep));
  });

  auto* retention = bench->add_subcommand("retention", "Single vs dual bucket: first eviction and top-N retention");
  add_common(retention, o);
  retention->add_option("--ops-factor", o.ops_factor, "Zipf ops as a multiple of capacity");
  retention->add_option("--universe-factor", o.universe_factor, "Zipf universe as a multiple of capacity");
  retention->callback([&] {
    auto single = bench_config(o);
    single.mode = TableMode::kSingle;
    auto dual = single;
    dual.mode = TableMode::kDual;
    const auto rep = run_retention(single, dual);
    rc = emit(o, rep, check_retention(rep));
  });

  auto* ablation = bench->add_subcommand("digest-ablation", "Key compares per miss with and without digests");
  add_common(ablation, o);
  ablation->callback([&] {
    const auto rep = run_digest_ablation(bench_config(o));
    rc = emit(o, rep, check_digest_ablation(rep));
  });

  auto* min_score = bench->add_subcommand("min-score", "Monte Carlo of single vs two-bucket minimum score");
  add_common(min_score, o);
  min_score->add_option("--trials", o.trials, "Trials (>= 1e5)");
  min_score->callback([&] {
    if (o.trials < 100'000) throw CLI::ValidationError("--trials", "must be at least 100000");
    const auto rep = run_min_score_montecarlo(kBucketSlots, o.trials, o.seed);
    rc = emit(o, rep, check_min_score(rep));
  });

  auto* stress = app.add_subcommand("stress", "Concurrency stress runs")->require_subcommand(1);
  auto* gate = stress->add_subcommand("gate", "Mixed reader/updater/inserter run with a role audit");
  add_common(gate, o);
  gate->add_option("--ops", o.ops, "Total batch operations");
  gate->callback([&] {
    StressConfig sc;
    sc.threads = o.threads > 1 ? o.threads : 8;
    sc.total_ops = o.ops;
    sc.capacity = gate->count("--capacity") ? o.capacity : std::size_t{1} << 14;
    sc.dim = o.dim;
    sc.seed = o.seed;
    const auto res = run_gate_stress(sc);
    std::vector<std::string> fails;
    if (!res.ok()) fails.push_back("role audit found violations");
    for (const auto& issue : res.table_issues) fails.push_back(issue);
    rc = emit(o, res.to_report(sc), fails);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const cachekv::usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
