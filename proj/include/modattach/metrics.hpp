#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modattach/catalog.hpp"
#include "modattach/hardware.hpp"
#include "modattach/loader.hpp"
#include "modattach/registry.hpp"

namespace modattach {

/// Logger view of one session: first/last LOAD timestamps plus counters.
struct SessionTiming {
  std::uint64_t first_load_us = 0;
  std::uint64_t last_load_us = 0;
  std::uint64_t wall_us = 0;
  std::uint64_t loads = 0;
  std::uint64_t skips_hw = 0;
  std::uint64_t skips_flag = 0;
  std::uint64_t dup_attempts = 0;

  friend bool operator==(const SessionTiming&, const SessionTiming&) = default;
};

SessionTiming timing_from_trace(const Trace& trace);

/// total_kb == loaded_kb + saved_kb + base_only_kb always holds.
struct SpaceReport {
  std::uint64_t total_kb = 0;
  std::uint64_t loaded_kb = 0;
  std::uint64_t saved_kb = 0;
  std::uint64_t base_only_kb = 0;

  friend bool operator==(const SpaceReport&, const SpaceReport&) = default;
};

SpaceReport space_report(const ModuleCatalog& catalog, const LoadState& state);
/// Same, for a session known only by the catalog positions it attached.
SpaceReport space_report(const ModuleCatalog& catalog, std::span<const std::size_t> attached);

struct StrategyRow {
  Strategy strategy = Strategy::Stage0;
  SessionTiming timing;             // from the median-wall repetition
  std::uint64_t median_wall_us = 0;
  std::uint64_t median_session_us = 0;
  double normalized = 1.0;          // median_wall_us / stage0 median_wall_us
  std::uint64_t violations = 0;     // trace_violations summed over repetitions
  bool stable_loaded_set = true;    // same attached set every repetition
};

/// One registration followed by four boots, for the bit-flag (v0 + stage0)
/// and the level-index (v1 + stage1) pipelines.
struct CompositeCost {
  std::uint64_t register_v0_us = 0;
  std::uint64_t register_v1_us = 0;
  std::uint64_t load_v0_us = 0;  // median stage0 session
  std::uint64_t load_v1_us = 0;  // median stage1 session
  std::uint64_t total_v0_us = 0;
  std::uint64_t total_v1_us = 0;
  double improvement_pct = 0.0;  // (total_v0 / total_v1 - 1) * 100
};

inline constexpr int kCompositeLoads = 4;
inline constexpr double kReferenceImprovementPct = 150.0;

struct BenchReport {
  unsigned workers = 0;
  unsigned repetitions = 0;
  LoadCost cost;
  std::vector<StrategyRow> rows;
  CompositeCost composite;
};

struct BenchOptions {
  std::vector<Strategy> strategies;
  unsigned workers = 8;
  unsigned repetitions = 5;
  LoadCost cost;
};

/// Runs every requested strategy `repetitions` times on identical inputs
/// and reports medians, normalised against stage0 (run as a baseline even
/// when not requested). Selection is resolved once, so interactive
/// policies prompt a single time.
BenchReport bench(const ModuleCatalog& catalog, const SelectionPolicy& policy,
                  const HardwareInventory& inventory, const BenchOptions& options);

std::string format_bench_text(const BenchReport& report);
std::string format_bench_csv(const BenchReport& report);

std::string format_session_text(const SessionTiming& timing, const SpaceReport& space);
std::string format_session_csv(const SessionTiming& timing, const SpaceReport& space);

}  // namespace modattach
