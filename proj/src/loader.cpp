#include "modattach/loader.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <set>
#include <thread>

#include "modattach/error.hpp"
#include "text_util.hpp"

namespace modattach {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Stage0: return "stage0";
    case Strategy::Stage1: return "stage1";
    case Strategy::Stage2: return "stage2";
    case Strategy::Stage3: return "stage3";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view s) noexcept {
  for (auto st : {Strategy::Stage0, Strategy::Stage1, Strategy::Stage2, Strategy::Stage3}) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

IndexVersion index_version_for(Strategy s) noexcept {
  return s == Strategy::Stage1 ? IndexVersion::V1 : IndexVersion::V0;
}

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::Load: return "LOAD";
    case EventKind::SkipHw: return "SKIP_HW";
    case EventKind::SkipFlag: return "SKIP_FLAG";
    case EventKind::DupAttempt: return "DUP_ATTEMPT";
  }
  return "UNKNOWN";
}

std::optional<EventKind> parse_event_kind(std::string_view s) noexcept {
  for (auto k : {EventKind::Load, EventKind::SkipHw, EventKind::SkipFlag, EventKind::DupAttempt}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

// LoadState

LoadState::LoadState(std::size_t modules)
    : size_(modules),
      status_(std::make_unique<std::atomic<std::uint8_t>[]>(modules)),
      attempts_(std::make_unique<std::atomic<std::uint32_t>[]>(modules)),
      resident_(modules, false) {
  for (std::size_t i = 0; i < modules; ++i) {
    status_[i].store(static_cast<std::uint8_t>(Status::Unloaded), std::memory_order_relaxed);
    attempts_[i].store(0, std::memory_order_relaxed);
  }
}

bool LoadState::try_claim(std::size_t i) noexcept {
  attempts_[i].fetch_add(1, std::memory_order_relaxed);
  auto expected = static_cast<std::uint8_t>(Status::Unloaded);
  return status_[i].compare_exchange_strong(expected, static_cast<std::uint8_t>(Status::Claimed),
                                            std::memory_order_acq_rel,
                                            std::memory_order_acquire);
}

void LoadState::publish(std::size_t i) noexcept {
  status_[i].store(static_cast<std::uint8_t>(Status::Loaded), std::memory_order_release);
}

void LoadState::mark_resident(std::size_t i) noexcept {
  resident_[i] = true;
  publish(i);
}

void LoadState::wait_loaded(std::size_t i) const noexcept {
  while (!loaded(i)) std::this_thread::yield();
}

// Partitioning and simulated latency

PartitionPlan plan_partitions(std::size_t n_modules, unsigned workers) {
  if (workers < 2) {
    throw Error(ErrorCode::ConfigError,
                "partitioned loading needs at least 2 workers, got " + std::to_string(workers));
  }
  PartitionPlan plan;
  plan.loaders = workers - 1;
  plan.step = (n_modules + plan.loaders - 1) / plan.loaders;
  plan.ranges.reserve(plan.loaders);
  for (std::size_t t = 0; t < plan.loaders; ++t) {
    const auto start = std::min(t * plan.step, n_modules);
    const auto end = std::min((t + 1) * plan.step, n_modules);
    plan.ranges.emplace_back(start, end);
  }
  return plan;
}

std::uint64_t nominal_load_us(const ModuleRecord& module, const LoadCost& cost) noexcept {
  return cost.base_us + module.size_kb * cost.per_kb_us;
}

std::uint64_t simulate_load(const ModuleRecord& module, const LoadCost& cost) {
  const auto nominal = nominal_load_us(module, cost);
  if (nominal == 0) return 0;
  const auto start = std::chrono::steady_clock::now();
  std::this_thread::sleep_for(std::chrono::microseconds(nominal));
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                        std::chrono::steady_clock::now() - start)
                                        .count());
}

namespace {

using Clock = std::chrono::steady_clock;

// State for one loading session. Each worker appends only to its own event
// buffer; a shared sequence number gives the merged trace a total order
// consistent with every claim/publish handoff.
class Session {
 public:
  Session(const ModuleCatalog& catalog, const StrategyConfig& config, unsigned workers)
      : catalog_(catalog),
        config_(config),
        start_(Clock::now()),
        state_(catalog.size()),
        buffers_(workers),
        skip_reported_(std::make_unique<std::atomic<bool>[]>(catalog.size())) {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (catalog[i].base_kernel_only) state_.mark_resident(i);
      skip_reported_[i].store(false, std::memory_order_relaxed);
    }
  }

  const ModuleCatalog& catalog() const { return catalog_; }
  LoadState& state() { return state_; }

  void emit(unsigned worker, EventKind kind, std::size_t module) {
    const auto ts = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start_).count());
    const auto seq = seq_.fetch_add(1, std::memory_order_acq_rel);
    buffers_[worker].push_back({seq, {ts, worker, kind, catalog_[module].name}});
  }

  /// Emits a skip event unless another worker already reported this module.
  void emit_skip_once(unsigned worker, EventKind kind, std::size_t module) {
    if (!skip_reported_[module].exchange(true, std::memory_order_acq_rel)) {
      emit(worker, kind, module);
    }
  }

  /// Claims, attaches and publishes `module`. Caller guarantees the claim
  /// cannot fail (single-threaded or under the stage-2 lock).
  void attach(unsigned worker, std::size_t module) {
    state_.try_claim(module);
    simulate_load(catalog_[module], config_.cost);
    emit(worker, EventKind::Load, module);
    state_.publish(module);
  }

  /// Stage-0 handle_module: dependencies depth-first, then the module.
  void handle_module_sequential(unsigned worker, std::size_t module) {
    if (state_.loaded(module)) return;
    for (auto dep : catalog_.deps_of(module)) handle_module_sequential(worker, dep);
    attach(worker, module);
  }

  /// Stage-3 handle_module: no lock. The final check-and-load is an atomic
  /// claim; losing it means another worker got there first.
  void handle_module_claiming(unsigned worker, std::size_t module) {
    if (state_.loaded(module)) return;
    for (auto dep : catalog_.deps_of(module)) handle_module_claiming(worker, dep);
    if (state_.try_claim(module)) {
      simulate_load(catalog_[module], config_.cost);
      emit(worker, EventKind::Load, module);
      state_.publish(module);
    } else {
      emit(worker, EventKind::DupAttempt, module);
      // The dependent we are serving must not attach before this completes.
      state_.wait_loaded(module);
    }
  }

  LoadResult finish() && {
    std::vector<std::pair<std::uint64_t, LoadEvent>> merged;
    for (auto& buf : buffers_) {
      std::move(buf.begin(), buf.end(), std::back_inserter(merged));
    }
    std::sort(merged.begin(), merged.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    LoadResult result{std::move(state_), {}, 0};
    result.trace.reserve(merged.size());
    for (auto& [seq, ev] : merged) result.trace.push_back(std::move(ev));
    result.session_us = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start_).count());
    return result;
  }

 private:
  const ModuleCatalog& catalog_;
  StrategyConfig config_;
  Clock::time_point start_;
  LoadState state_;
  std::atomic<std::uint64_t> seq_{0};
  std::vector<std::vector<std::pair<std::uint64_t, LoadEvent>>> buffers_;
  std::unique_ptr<std::atomic<bool>[]> skip_reported_;
};

void map_flags(const IndexFile& index, std::size_t begin, std::size_t end,
               std::vector<std::uint8_t>& flags) {
  for (auto i = begin; i < end; ++i) flags[i] = index.entries[i].value != 0 ? 1 : 0;
}

// Shared scan body for stage0 and the per-range loops of stage2/stage3.
template <typename Handle>
void scan(Session& session, unsigned worker, std::size_t begin, std::size_t end,
          const std::vector<std::uint8_t>& flags, const DeviceMatcher& matcher, Handle&& handle) {
  const auto& catalog = session.catalog();
  for (auto i = begin; i < end; ++i) {
    if (!flags[i]) {
      session.emit_skip_once(worker, EventKind::SkipFlag, i);
      continue;
    }
    if (catalog[i].base_kernel_only) continue;
    if (!matcher.supports(catalog[i])) {
      session.emit_skip_once(worker, EventKind::SkipHw, i);
      continue;
    }
    handle(i);
  }
}

void require_workers(const StrategyConfig& config, Strategy s) {
  if (config.workers < 2) {
    throw Error(ErrorCode::ConfigError, std::string(to_string(s)) +
                                            " needs at least 2 workers, got " +
                                            std::to_string(config.workers));
  }
}

}  // namespace

LoadResult load_stage0(const ModuleCatalog& catalog, const IndexFile& index,
                       const HardwareInventory& inventory, const StrategyConfig& config) {
  require_aligned(index, catalog, IndexVersion::V0);
  Session session(catalog, config, 1);
  std::vector<std::uint8_t> flags(catalog.size());
  map_flags(index, 0, catalog.size(), flags);
  const DeviceMatcher matcher(inventory);
  scan(session, 0, 0, catalog.size(), flags, matcher,
       [&](std::size_t i) { session.handle_module_sequential(0, i); });
  return std::move(session).finish();
}

LoadResult load_stage1(const ModuleCatalog& catalog, const IndexFile& index,
                       const HardwareInventory&, const StrategyConfig& config) {
  require_aligned(index, catalog, IndexVersion::V1);
  Session session(catalog, config, 1);
  std::uint32_t deepest = 0;
  for (const auto& e : index.entries) deepest = std::max(deepest, e.value);
  // One sweep per level; level-0 entries are never attached.
  for (std::uint32_t depth = 1; depth <= deepest; ++depth) {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (index.entries[i].value == depth && !session.state().loaded(i)) session.attach(0, i);
    }
  }
  return std::move(session).finish();
}

LoadResult load_stage2(const ModuleCatalog& catalog, const IndexFile& index,
                       const HardwareInventory& inventory, const StrategyConfig& config) {
  require_workers(config, Strategy::Stage2);
  require_aligned(index, catalog, IndexVersion::V0);
  Session session(catalog, config, config.workers);

  // Setup: index mapping and hardware read run side by side.
  std::vector<std::uint8_t> flags(catalog.size());
  std::optional<DeviceMatcher> matcher;
  {
    std::jthread mapper([&] { map_flags(index, 0, catalog.size(), flags); });
    std::jthread reader([&] { matcher.emplace(inventory); });
  }

  std::mutex handle_lock;
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < config.workers; ++w) {
      workers.emplace_back([&, w] {
        scan(session, w, 0, catalog.size(), flags, *matcher, [&](std::size_t i) {
          std::lock_guard guard(handle_lock);
          session.handle_module_sequential(w, i);
        });
      });
    }
  }
  return std::move(session).finish();
}

LoadResult load_stage3(const ModuleCatalog& catalog, const IndexFile& index,
                       const HardwareInventory& inventory, const StrategyConfig& config) {
  require_workers(config, Strategy::Stage3);
  require_aligned(index, catalog, IndexVersion::V0);
  const auto plan = plan_partitions(catalog.size(), config.workers);
  Session session(catalog, config, static_cast<unsigned>(plan.loaders));

  // Setup: all threads but one map their slice of the index; the last one
  // reads the hardware inventory.
  std::vector<std::uint8_t> flags(catalog.size());
  std::optional<DeviceMatcher> matcher;
  {
    std::vector<std::jthread> setup;
    for (const auto& [start, end] : plan.ranges) {
      setup.emplace_back([&, start = start, end = end] { map_flags(index, start, end, flags); });
    }
    setup.emplace_back([&] { matcher.emplace(inventory); });
  }

  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < plan.loaders; ++w) {
      const auto [start, end] = plan.ranges[w];
      workers.emplace_back([&, w, start = start, end = end] {
        scan(session, w, start, end, flags, *matcher,
             [&](std::size_t i) { session.handle_module_claiming(w, i); });
      });
    }
  }
  return std::move(session).finish();
}

LoadResult run_load(const ModuleCatalog& catalog, const IndexFile& index,
                    const HardwareInventory& inventory, const StrategyConfig& config) {
  switch (config.strategy) {
    case Strategy::Stage0: return load_stage0(catalog, index, inventory, config);
    case Strategy::Stage1: return load_stage1(catalog, index, inventory, config);
    case Strategy::Stage2: return load_stage2(catalog, index, inventory, config);
    case Strategy::Stage3: return load_stage3(catalog, index, inventory, config);
  }
  throw Error(ErrorCode::ConfigError, "unknown strategy");
}

// Trace I/O

std::string write_trace(const Trace& trace) {
  std::string out;
  for (const auto& ev : trace) {
    out += std::to_string(ev.timestamp_us);
    out += ' ';
    out += std::to_string(ev.worker);
    out += ' ';
    out += to_string(ev.kind);
    out += ' ';
    out += ev.module;
    out += '\n';
  }
  return out;
}

Trace parse_trace(std::string_view text) {
  Trace trace;
  std::size_t line_no = 0;
  for (auto line : detail::lines(text)) {
    ++line_no;
    if (detail::is_skippable(line)) continue;
    std::vector<std::string_view> fields;
    for (auto f : detail::split(detail::trim(line), ' ')) {
      if (!f.empty()) fields.push_back(f);
    }
    const auto ts = fields.size() == 4 ? detail::parse_int<std::uint64_t>(fields[0]) : std::nullopt;
    const auto worker = fields.size() == 4 ? detail::parse_int<unsigned>(fields[1]) : std::nullopt;
    const auto kind = fields.size() == 4 ? parse_event_kind(fields[2]) : std::nullopt;
    if (!ts || !worker || !kind) {
      throw Error(ErrorCode::MalformedTrace, "line " + std::to_string(line_no));
    }
    trace.push_back({*ts, *worker, *kind, std::string(fields[3])});
  }
  return trace;
}

std::vector<std::string> trace_violations(const ModuleCatalog& catalog, const Trace& trace) {
  std::vector<std::string> problems;
  std::vector<bool> seen(catalog.size(), false);
  for (const auto& ev : trace) {
    if (ev.kind != EventKind::Load) continue;
    const auto i = catalog.index_of(ev.module);
    if (!i) {
      problems.push_back("LOAD of unknown module " + ev.module);
      continue;
    }
    if (seen[*i]) problems.push_back("second LOAD of " + ev.module);
    for (auto d : catalog.deps_of(*i)) {
      if (!catalog[d].base_kernel_only && !seen[d]) {
        problems.push_back("LOAD of " + ev.module + " before its dependency " + catalog[d].name);
      }
    }
    seen[*i] = true;
  }
  return problems;
}

std::vector<std::size_t> loaded_positions(const ModuleCatalog& catalog, const Trace& trace) {
  std::set<std::size_t> out;
  for (const auto& ev : trace) {
    if (ev.kind != EventKind::Load) continue;
    if (const auto i = catalog.index_of(ev.module)) out.insert(*i);
  }
  return {out.begin(), out.end()};
}

}  // namespace modattach
