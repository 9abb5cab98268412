#include "cachekv/metrics.hpp"

namespace cachekv {

TxnCounters& TxnCounters::operator+=(const TxnCounters& o) noexcept {
  digest_line_loads += o.digest_line_loads;
  full_key_compares += o.full_key_compares;
  score_scans += o.score_scans;
  slot_lock_retries += o.slot_lock_retries;
  value_copies_fast += o.value_copies_fast;
  value_copies_overflow += o.value_copies_overflow;
  return *this;
}

void CounterRegistry::merge(const TxnCounters& delta) {
  std::lock_guard lk(mu_);
  total_ += delta;
}

TxnCounters CounterRegistry::snapshot() const {
  std::lock_guard lk(mu_);
  return total_;
}

void CounterRegistry::reset() {
  std::lock_guard lk(mu_);
  total_ = {};
}

}  // namespace cachekv
