#include "cachekv/bench/workload.hpp"

#include <cmath>

#include "cachekv/hash.hpp"

namespace cachekv::bench {

void WorkloadSpec::validate() const {
  if (batch_size == 0) throw usage_error("batch_size must be at least 1");
  if (distribution == Distribution::kZipf) {
    if (!(alpha > 0.0)) throw usage_error("zipf alpha must be positive");
    if (universe == 0) throw usage_error("zipf universe must be non-empty");
  }
}

Key key_for_index(std::uint64_t index, std::uint64_t seed) noexcept {
  // Cycle-walk past the two sentinel values to stay a bijection onto user keys.
  std::uint64_t k = fmix64(index ^ fmix64(seed + 0x632be59bd9b4e019ULL));
  while (!is_user_key(k)) k = fmix64(k);
  return k;
}

double unit_uniform(std::mt19937_64& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

// log1p(x)/x, stable near zero.
double helper1(double x) {
  return std::abs(x) > 1e-8 ? std::log1p(x) / x : 1.0 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x));
}

// expm1(x)/x, stable near zero.
double helper2(double x) {
  return std::abs(x) > 1e-8 ? std::expm1(x) / x : 1.0 + x * 0.5 * (1.0 + x / 3.0 * (1.0 + 0.25 * x));
}

}  // namespace

ZipfSampler::ZipfSampler(std::uint64_t n, double alpha) : n_(n), alpha_(alpha) {
  if (n == 0) throw usage_error("zipf universe must be non-empty");
  if (!(alpha > 0.0)) throw usage_error("zipf alpha must be positive");
  h_integral_x1_ = h_integral(1.5) - 1.0;
  h_integral_n_ = h_integral(static_cast<double>(n) + 0.5);
  s_ = 2.0 - h_integral_inverse(h_integral(2.5) - h(2.0));
}

double ZipfSampler::h(double x) const { return std::exp(-alpha_ * std::log(x)); }

double ZipfSampler::h_integral(double x) const {
  const double log_x = std::log(x);
  return helper2((1.0 - alpha_) * log_x) * log_x;
}

double ZipfSampler::h_integral_inverse(double x) const {
  double t = x * (1.0 - alpha_);
  if (t < -1.0) t = -1.0;
  return std::exp(helper1(t) * x);
}

std::uint64_t ZipfSampler::operator()(std::mt19937_64& rng) const {
  for (;;) {
    const double u = h_integral_n_ + unit_uniform(rng) * (h_integral_x1_ - h_integral_n_);
    const double x = h_integral_inverse(u);
    double kf = std::floor(x + 0.5);
    if (kf < 1.0) kf = 1.0;
    if (kf > static_cast<double>(n_)) kf = static_cast<double>(n_);
    if (kf - x <= s_ || u >= h_integral(kf + 0.5) - h(kf)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

KeyStream::KeyStream(const WorkloadSpec& spec)
    : spec_(spec), rng_(spec.seed), key_seed_(fmix64(spec.seed ^ 0x5851f42d4c957f2dULL)) {
  spec_.validate();
  if (spec_.distribution == Distribution::kZipf) zipf_.emplace(spec_.universe, spec_.alpha);
}

Key KeyStream::next() {
  if (zipf_) {
    last_rank_ = (*zipf_)(rng_);
  } else {
    last_rank_ = produced_;
  }
  ++produced_;
  return key_for_index(last_rank_, key_seed_);
}

std::size_t KeyStream::fill(std::span<Key> out) {
  std::size_t n = 0;
  while (n < out.size() && (spec_.total_ops == 0 || produced_ < spec_.total_ops)) out[n++] = next();
  return n;
}

std::vector<Key> gen_keys(const WorkloadSpec& spec) {
  KeyStream stream(spec);
  std::vector<Key> keys(spec.total_ops);
  stream.fill(keys);
  return keys;
}

}  // namespace cachekv::bench
