#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modattach/catalog.hpp"
#include "modattach/hardware.hpp"
#include "modattach/registry.hpp"

namespace modattach {

enum class Strategy : std::uint8_t { Stage0, Stage1, Stage2, Stage3 };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view s) noexcept;

/// Index version a strategy consumes: v1 for stage1, v0 otherwise.
IndexVersion index_version_for(Strategy s) noexcept;

/// Simulated attach latency: base_us + size_kb * per_kb_us.
struct LoadCost {
  std::uint64_t base_us = 0;
  std::uint64_t per_kb_us = 0;
};

struct StrategyConfig {
  Strategy strategy = Strategy::Stage0;
  unsigned workers = 1;  // models cores
  LoadCost cost;
};

enum class EventKind : std::uint8_t { Load, SkipHw, SkipFlag, DupAttempt };

std::string_view to_string(EventKind k) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view s) noexcept;

struct LoadEvent {
  std::uint64_t timestamp_us = 0;
  unsigned worker = 0;
  EventKind kind = EventKind::Load;
  std::string module;

  friend bool operator==(const LoadEvent&, const LoadEvent&) = default;
};

using Trace = std::vector<LoadEvent>;

/// Shared per-module load table. Reads are lock-free; the only write a
/// worker may race on is `try_claim`, an atomic compare-and-swap, so a
/// module can be claimed (and therefore loaded) at most once per session.
class LoadState {
 public:
  enum class Status : std::uint8_t { Unloaded, Claimed, Loaded };

  explicit LoadState(std::size_t modules);

  std::size_t size() const noexcept { return size_; }
  Status status(std::size_t i) const noexcept {
    return static_cast<Status>(status_[i].load(std::memory_order_acquire));
  }
  bool loaded(std::size_t i) const noexcept { return status(i) == Status::Loaded; }
  /// Number of claim attempts made on module `i`.
  std::uint32_t attempts(std::size_t i) const noexcept {
    return attempts_[i].load(std::memory_order_relaxed);
  }
  /// True if the module was attached during the session (not resident).
  bool attached(std::size_t i) const noexcept { return loaded(i) && !resident_[i]; }

  bool try_claim(std::size_t i) noexcept;
  void publish(std::size_t i) noexcept;
  /// Base-kernel modules: present before the session starts.
  void mark_resident(std::size_t i) noexcept;
  /// Spins (yielding) until a claimed module is published.
  void wait_loaded(std::size_t i) const noexcept;

 private:
  std::size_t size_ = 0;
  std::unique_ptr<std::atomic<std::uint8_t>[]> status_;
  std::unique_ptr<std::atomic<std::uint32_t>[]> attempts_;
  std::vector<bool> resident_;
};

struct LoadResult {
  LoadState state;
  Trace trace;
  std::uint64_t session_us = 0;  // whole session, setup included
};

/// Stage-3 ranges: `workers - 1` loading workers, step = ceil(n / (workers - 1)).
struct PartitionPlan {
  std::size_t loaders = 0;
  std::size_t step = 0;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // [start, end)
};

PartitionPlan plan_partitions(std::size_t n_modules, unsigned workers);

std::uint64_t nominal_load_us(const ModuleRecord& module, const LoadCost& cost) noexcept;

/// Sleeps for the nominal latency and returns the measured elapsed time.
std::uint64_t simulate_load(const ModuleRecord& module, const LoadCost& cost);

LoadResult load_stage0(const ModuleCatalog& catalog, const IndexFile& index,
                       const HardwareInventory& inventory, const StrategyConfig& config);
LoadResult load_stage1(const ModuleCatalog& catalog, const IndexFile& index,
                       const HardwareInventory& inventory, const StrategyConfig& config);
LoadResult load_stage2(const ModuleCatalog& catalog, const IndexFile& index,
                       const HardwareInventory& inventory, const StrategyConfig& config);
LoadResult load_stage3(const ModuleCatalog& catalog, const IndexFile& index,
                       const HardwareInventory& inventory, const StrategyConfig& config);

/// Dispatches on `config.strategy`.
LoadResult run_load(const ModuleCatalog& catalog, const IndexFile& index,
                    const HardwareInventory& inventory, const StrategyConfig& config);

/// `<timestamp_us> <worker_id> <KIND> <module>` per line.
std::string write_trace(const Trace& trace);
Trace parse_trace(std::string_view text);

/// Structural check of a finished trace: every module LOADed at most once
/// and after all of its non-resident dependencies. Returns one message per
/// violation; empty means the trace is sound.
std::vector<std::string> trace_violations(const ModuleCatalog& catalog, const Trace& trace);

/// Catalog positions with a LOAD event, ascending.
std::vector<std::size_t> loaded_positions(const ModuleCatalog& catalog, const Trace& trace);

}  // namespace modattach
