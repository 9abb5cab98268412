#pragma once

#include <array>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>

#include "cachekv/types.hpp"

namespace cachekv {

/// Operation groups. Readers share with readers, updaters with updaters,
/// inserters run alone.
enum class Role : std::uint8_t { kReader = 0, kUpdater = 1, kInserter = 2 };

inline constexpr std::size_t kRoleCount = 3;

const char* to_string(Role r) noexcept;

constexpr bool roles_compatible(Role a, Role b) noexcept {
  return a == b && a != Role::kInserter;
}

enum class GateEvent : std::uint8_t { kEnter, kExit };

/// Table-level admission gate enforcing the reader/updater/inserter
/// compatibility matrix.
///
/// Waiters are served phase-fair: once a waiter of a different role is
/// queued, newly arriving holders of the active role queue behind it, and
/// when a phase drains the next phase goes round-robin to the next role
/// with waiters. All waiters of a granted shared role enter together.
class RoleGate {
 public:
  class Guard {
   public:
    Guard() = default;
    Guard(Guard&& o) noexcept : gate_(o.gate_), role_(o.role_) { o.gate_ = nullptr; }
    Guard& operator=(Guard&& o) noexcept;
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;
    ~Guard();

    /// Throws usage_error when the guard was already released.
    void release();
    bool held() const noexcept { return gate_ != nullptr; }
    Role role() const noexcept { return role_; }
    const RoleGate* gate() const noexcept { return gate_; }

   private:
    friend class RoleGate;
    Guard(RoleGate* g, Role r) : gate_(g), role_(r) {}
    RoleGate* gate_ = nullptr;
    Role role_ = Role::kReader;
  };

  using Observer = std::function<void(Role, GateEvent)>;

  RoleGate() = default;
  RoleGate(const RoleGate&) = delete;
  RoleGate& operator=(const RoleGate&) = delete;

  Guard acquire(Role role);
  std::optional<Guard> try_acquire(Role role);

  /// Instrumentation hook: called after a holder enters and before it
  /// leaves. Install only while the gate is idle.
  void set_observer(Observer obs) { observer_ = std::move(obs); }

  struct Snapshot {
    std::optional<Role> active_role;
    std::size_t active_count = 0;
    std::array<std::size_t, kRoleCount> waiting{};
  };
  Snapshot snapshot() const;

 private:
  void release(Role role);
  bool fast_path_open(Role role) const;
  bool others_waiting(Role role) const;
  void enter_locked(Role role);

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::optional<Role> active_role_;
  std::size_t active_count_ = 0;
  std::array<std::size_t, kRoleCount> waiting_{};
  std::optional<Role> grant_role_;
  std::size_t grant_quota_ = 0;
  Observer observer_;
};

}  // namespace cachekv
