#include "cachekv/role_gate.hpp"

#include "cachekv/types.hpp"

namespace cachekv {

namespace {
std::size_t idx(Role r) { return static_cast<std::size_t>(r); }
}  // namespace

const char* to_string(Role r) noexcept {
  switch (r) {
    case Role::kReader:
      return "reader";
    case Role::kUpdater:
      return "updater";
    case Role::kInserter:
      return "inserter";
  }
  return "?";
}

RoleGate::Guard& RoleGate::Guard::operator=(Guard&& o) noexcept {
  if (this != &o) {
    if (gate_) gate_->release(role_);
    gate_ = o.gate_;
    role_ = o.role_;
    o.gate_ = nullptr;
  }
  return *this;
}

RoleGate::Guard::~Guard() {
  if (gate_) gate_->release(role_);
}

void RoleGate::Guard::release() {
  if (!gate_) throw usage_error("role guard released twice");
  RoleGate* g = gate_;
  gate_ = nullptr;
  g->release(role_);
}

bool RoleGate::others_waiting(Role role) const {
  for (std::size_t r = 0; r < kRoleCount; ++r) {
    if (r != idx(role) && waiting_[r] > 0) return true;
  }
  return false;
}

bool RoleGate::fast_path_open(Role role) const {
  if (grant_role_) return false;
  if (active_count_ == 0) return !others_waiting(role);
  return *active_role_ == role && role != Role::kInserter && !others_waiting(role);
}

void RoleGate::enter_locked(Role role) {
  active_role_ = role;
  ++active_count_;
}

RoleGate::Guard RoleGate::acquire(Role role) {
  {
    std::unique_lock lk(mu_);
    if (!fast_path_open(role)) {
      ++waiting_[idx(role)];
      // A drained gate with queued waiters but no grant happens when the
      // waiters arrived while it was idle; hand out a grant here.
      if (active_count_ == 0 && !grant_role_) {
        grant_role_ = role;
        grant_quota_ = role == Role::kInserter ? 1 : waiting_[idx(role)];
      }
      cv_.wait(lk, [&] { return grant_role_ == role && grant_quota_ > 0 &&
                                (active_count_ == 0 || active_role_ == role) &&
                                !(role == Role::kInserter && active_count_ > 0); });
      --waiting_[idx(role)];
      if (--grant_quota_ == 0) grant_role_.reset();
    }
    enter_locked(role);
  }
  if (observer_) observer_(role, GateEvent::kEnter);
  return Guard(this, role);
}

std::optional<RoleGate::Guard> RoleGate::try_acquire(Role role) {
  {
    std::lock_guard lk(mu_);
    if (!fast_path_open(role)) return std::nullopt;
    enter_locked(role);
  }
  if (observer_) observer_(role, GateEvent::kEnter);
  return Guard(this, role);
}

void RoleGate::release(Role role) {
  if (observer_) observer_(role, GateEvent::kExit);
  std::lock_guard lk(mu_);
  if (active_count_ == 0 || active_role_ != role) {
    throw usage_error("role gate released without a matching holder");
  }
  if (--active_count_ > 0) return;
  active_role_.reset();
  if (grant_role_) {
    cv_.notify_all();
    return;
  }
  for (std::size_t step = 1; step <= kRoleCount; ++step) {
    const std::size_t r = (idx(role) + step) % kRoleCount;
    if (waiting_[r] > 0) {
      grant_role_ = static_cast<Role>(r);
      grant_quota_ = grant_role_ == Role::kInserter ? 1 : waiting_[r];
      cv_.notify_all();
      return;
    }
  }
}

RoleGate::Snapshot RoleGate::snapshot() const {
  std::lock_guard lk(mu_);
  return Snapshot{active_role_, active_count_, waiting_};
}

}  // namespace cachekv
