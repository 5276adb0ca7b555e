#include "modattach/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "modattach/error.hpp"

namespace modattach {

SessionTiming timing_from_trace(const Trace& trace) {
  SessionTiming t;
  bool any_load = false;
  for (const auto& ev : trace) {
    switch (ev.kind) {
      case EventKind::Load:
        if (!any_load) {
          t.first_load_us = t.last_load_us = ev.timestamp_us;
          any_load = true;
        }
        t.first_load_us = std::min(t.first_load_us, ev.timestamp_us);
        t.last_load_us = std::max(t.last_load_us, ev.timestamp_us);
        ++t.loads;
        break;
      case EventKind::SkipHw: ++t.skips_hw; break;
      case EventKind::SkipFlag: ++t.skips_flag; break;
      case EventKind::DupAttempt: ++t.dup_attempts; break;
    }
  }
  t.wall_us = t.last_load_us - t.first_load_us;
  return t;
}

SpaceReport space_report(const ModuleCatalog& catalog, std::span<const std::size_t> attached) {
  SpaceReport r;
  for (const auto& rec : catalog.records()) {
    r.total_kb += rec.size_kb;
    if (rec.base_kernel_only) r.base_only_kb += rec.size_kb;
  }
  for (auto i : attached) {
    if (!catalog[i].base_kernel_only) r.loaded_kb += catalog[i].size_kb;
  }
  r.saved_kb = r.total_kb - r.loaded_kb - r.base_only_kb;
  return r;
}

SpaceReport space_report(const ModuleCatalog& catalog, const LoadState& state) {
  std::vector<std::size_t> attached;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.attached(i)) attached.push_back(i);
  }
  return space_report(catalog, attached);
}

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t micros_since(Clock::time_point start) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count());
}

template <typename T>
T median(std::vector<T> values) {
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];
}

template <typename Fn>
std::uint64_t median_timed(unsigned reps, Fn&& fn) {
  std::vector<std::uint64_t> samples;
  for (unsigned r = 0; r < reps; ++r) {
    const auto start = Clock::now();
    fn();
    samples.push_back(micros_since(start));
  }
  return median(std::move(samples));
}

StrategyRow run_strategy(const ModuleCatalog& catalog, const IndexFile& index,
                         const HardwareInventory& inventory, const BenchOptions& options,
                         Strategy strategy) {
  const StrategyConfig config{strategy, options.workers, options.cost};
  StrategyRow row;
  row.strategy = strategy;

  std::vector<SessionTiming> timings;
  std::vector<std::uint64_t> sessions;
  std::optional<std::vector<std::size_t>> first_set;
  for (unsigned r = 0; r < options.repetitions; ++r) {
    auto result = run_load(catalog, index, inventory, config);
    row.violations += trace_violations(catalog, result.trace).size();
    auto loaded = loaded_positions(catalog, result.trace);
    if (!first_set) {
      first_set = std::move(loaded);
    } else if (*first_set != loaded) {
      row.stable_loaded_set = false;
    }
    timings.push_back(timing_from_trace(result.trace));
    sessions.push_back(result.session_us);
  }

  auto by_wall = timings;
  std::sort(by_wall.begin(), by_wall.end(),
            [](const auto& a, const auto& b) { return a.wall_us < b.wall_us; });
  row.timing = by_wall[by_wall.size() / 2];
  row.median_wall_us = row.timing.wall_us;
  row.median_session_us = median(std::move(sessions));
  return row;
}

double normalise(std::uint64_t wall, std::uint64_t baseline) {
  if (baseline > 0) return static_cast<double>(wall) / static_cast<double>(baseline);
  return wall == 0 ? 1.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

BenchReport bench(const ModuleCatalog& catalog, const SelectionPolicy& policy,
                  const HardwareInventory& inventory, const BenchOptions& options) {
  if (options.repetitions < 1) throw Error(ErrorCode::ConfigError, "repetitions must be >= 1");
  if (options.strategies.empty()) throw Error(ErrorCode::ConfigError, "no strategies given");

  const auto selected = resolve_selection(catalog, policy);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (selected[i]) names.push_back(catalog[i].name);
  }
  const auto fixed = SelectionPolicy::from_file(std::move(names));

  const auto index_v0 = register_v0(catalog, fixed);
  const auto index_v1 = register_v1(catalog, fixed, inventory);

  BenchReport report;
  report.workers = options.workers;
  report.repetitions = options.repetitions;
  report.cost = options.cost;

  auto run = [&](Strategy s) {
    return run_strategy(catalog, s == Strategy::Stage1 ? index_v1 : index_v0, inventory, options,
                        s);
  };
  auto find_or_run = [&](Strategy s) {
    for (const auto& row : report.rows) {
      if (row.strategy == s) return row;
    }
    return run(s);
  };

  for (auto s : options.strategies) report.rows.push_back(run(s));
  const auto baseline = find_or_run(Strategy::Stage0);
  for (auto& row : report.rows) {
    row.normalized = row.strategy == Strategy::Stage0
                         ? 1.0
                         : normalise(row.median_wall_us, baseline.median_wall_us);
  }

  auto& c = report.composite;
  c.register_v0_us = median_timed(options.repetitions, [&] { (void)register_v0(catalog, fixed); });
  c.register_v1_us =
      median_timed(options.repetitions, [&] { (void)register_v1(catalog, fixed, inventory); });
  c.load_v0_us = baseline.median_session_us;
  c.load_v1_us = find_or_run(Strategy::Stage1).median_session_us;
  c.total_v0_us = c.register_v0_us + kCompositeLoads * c.load_v0_us;
  c.total_v1_us = c.register_v1_us + kCompositeLoads * c.load_v1_us;
  c.improvement_pct = c.total_v1_us == 0
                          ? 0.0
                          : (static_cast<double>(c.total_v0_us) / c.total_v1_us - 1.0) * 100.0;
  return report;
}

std::string format_bench_text(const BenchReport& report) {
  std::ostringstream out;
  out << "# scores normalised to stage0: score = median wall_us / stage0 median wall_us\n";
  out << "# workers=" << report.workers << " reps=" << report.repetitions
      << " load_base_us=" << report.cost.base_us << " load_per_kb_us=" << report.cost.per_kb_us
      << '\n';
  out << std::left << std::setw(9) << "strategy" << std::right << std::setw(16)
      << "median_wall_us" << std::setw(12) << "normalized" << std::setw(8) << "loads"
      << std::setw(10) << "skips_hw" << std::setw(12) << "skips_flag" << std::setw(14)
      << "dup_attempts" << std::setw(12) << "violations" << '\n';
  for (const auto& row : report.rows) {
    out << std::left << std::setw(9) << to_string(row.strategy) << std::right << std::setw(16)
        << row.median_wall_us << std::setw(12) << std::fixed << std::setprecision(3)
        << row.normalized << std::setw(8) << row.timing.loads << std::setw(10)
        << row.timing.skips_hw << std::setw(12) << row.timing.skips_flag << std::setw(14)
        << row.timing.dup_attempts << std::setw(12) << row.violations << '\n';
  }
  const auto& c = report.composite;
  out << "composite (1 registration + " << kCompositeLoads << " loads): v0 " << c.total_v0_us
      << " us, v1 " << c.total_v1_us << " us, v1 improvement " << std::setprecision(1)
      << c.improvement_pct << "% (reference figure: around " << kReferenceImprovementPct
      << "%)\n";
  return out.str();
}

std::string format_bench_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "strategy,workers,reps,median_wall_us,normalized,loads,skips_hw,skips_flag,"
         "dup_attempts,violations,median_session_us\n";
  for (const auto& row : report.rows) {
    out << to_string(row.strategy) << ',' << report.workers << ',' << report.repetitions << ','
        << row.median_wall_us << ',' << std::fixed << std::setprecision(6) << row.normalized
        << ',' << row.timing.loads << ',' << row.timing.skips_hw << ',' << row.timing.skips_flag
        << ',' << row.timing.dup_attempts << ',' << row.violations << ','
        << row.median_session_us << '\n';
  }
  return out.str();
}

std::string format_session_text(const SessionTiming& t, const SpaceReport& s) {
  std::ostringstream out;
  out << "first_load_us  " << t.first_load_us << '\n'
      << "last_load_us   " << t.last_load_us << '\n'
      << "wall_us        " << t.wall_us << '\n'
      << "loads          " << t.loads << '\n'
      << "skips_hw       " << t.skips_hw << '\n'
      << "skips_flag     " << t.skips_flag << '\n'
      << "dup_attempts   " << t.dup_attempts << '\n'
      << "total_kb       " << s.total_kb << '\n'
      << "loaded_kb      " << s.loaded_kb << '\n'
      << "saved_kb       " << s.saved_kb << '\n'
      << "base_only_kb   " << s.base_only_kb << '\n';
  return out.str();
}

std::string format_session_csv(const SessionTiming& t, const SpaceReport& s) {
  std::ostringstream out;
  out << "first_load_us,last_load_us,wall_us,loads,skips_hw,skips_flag,dup_attempts,total_kb,"
         "loaded_kb,saved_kb,base_only_kb\n"
      << t.first_load_us << ',' << t.last_load_us << ',' << t.wall_us << ',' << t.loads << ','
      << t.skips_hw << ',' << t.skips_flag << ',' << t.dup_attempts << ',' << s.total_kb << ','
      << s.loaded_kb << ',' << s.saved_kb << ',' << s.base_only_kb << '\n';
  return out.str();
}

}  // namespace modattach
