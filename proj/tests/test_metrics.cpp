#include <doctest.h>

#include <random>

#include "modattach/metrics.hpp"
#include "oracles.hpp"

using namespace modattach;

namespace {

ModuleCatalog parse(std::string body) { return parse_catalog("MODCAT v1\n" + body); }

}  // namespace

TEST_CASE("timing_from_trace examples") {
  const auto t = timing_from_trace(
      {{100, 0, EventKind::Load, "a"}, {300, 0, EventKind::Load, "b"}});
  CHECK(t.first_load_us == 100);
  CHECK(t.last_load_us == 300);
  CHECK(t.wall_us == 200);
  CHECK(t.loads == 2);

  const auto skip = timing_from_trace({{7, 0, EventKind::SkipHw, "a"}});
  CHECK(skip.loads == 0);
  CHECK(skip.skips_hw == 1);
  CHECK(skip.wall_us == 0);

  // Racing fixture: worker 1 loses the claim on the shared dependency.
  const auto race = timing_from_trace({{10, 0, EventKind::Load, "a"},
                                       {11, 1, EventKind::DupAttempt, "a"},
                                       {20, 1, EventKind::Load, "b"},
                                       {21, 2, EventKind::Load, "c"}});
  CHECK(race.dup_attempts == 1);
  CHECK(race.loads == 3);
  CHECK(race.wall_us == 11);

  CHECK(timing_from_trace({}) == SessionTiming{});
}

TEST_CASE("timing_from_trace ignores the position of non-LOAD events") {
  std::mt19937_64 rng(3);
  Trace loads{{5, 0, EventKind::Load, "a"}, {9, 1, EventKind::Load, "b"}};
  Trace noise{{1, 0, EventKind::SkipFlag, "x"}, {2, 1, EventKind::SkipHw, "y"},
              {3, 1, EventKind::DupAttempt, "a"}, {12, 0, EventKind::SkipFlag, "z"}};
  const auto expect = [&] {
    auto t = loads;
    t.insert(t.end(), noise.begin(), noise.end());
    return timing_from_trace(t);
  }();
  for (int i = 0; i < 50; ++i) {
    auto t = loads;
    for (const auto& n : noise) t.insert(t.begin() + static_cast<long>(rng() % (t.size() + 1)), n);
    CHECK(timing_from_trace(t) == expect);
  }
}

TEST_CASE("space_report examples") {
  SUBCASE("unloaded 2112 KB module") {
    const auto cat = parse("inet6|2112||\nbase|500||@base\nfs|40||\n");
    const std::vector<std::size_t> attached{*cat.index_of("fs")};
    const auto s = space_report(cat, attached);
    CHECK(s.saved_kb == 2112);
    CHECK(s.base_only_kb == 500);
    CHECK(s.total_kb == s.loaded_kb + s.saved_kb + s.base_only_kb);
  }
  SUBCASE("unloaded 2331 KB architecture bundle") {
    const auto cat = parse("arch_a|1200||\narch_b|1131||\nkern|900||@base\ncore|64||\n");
    const std::vector<std::size_t> attached{*cat.index_of("core")};
    CHECK(space_report(cat, attached).saved_kb == 2331);
  }
  SUBCASE("everything loaded") {
    const auto cat = parse("a|10||\nb|20|a|\n");
    const auto r = load_stage0(cat, register_v0(cat, SelectionPolicy::all_load()), {}, {});
    const auto s = space_report(cat, r.state);
    CHECK(s.saved_kb == 0);
    CHECK(s.loaded_kb == 30);
  }
}

TEST_CASE("bench in instant mode") {
  const auto cat = parse("c|1|b|\nb|1|a|\na|1||\nx|3||nic\ny|4|x|\n");
  const HardwareInventory inv{{"the nic"}};
  BenchOptions opts{{Strategy::Stage0, Strategy::Stage1, Strategy::Stage2, Strategy::Stage3}, 4, 3, {}};
  const auto report = bench(cat, SelectionPolicy::all_load(), inv, opts);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].normalized == 1.0);
  for (const auto& row : report.rows) {
    CHECK(row.violations == 0);
    CHECK(row.stable_loaded_set);
    CHECK(row.timing.loads == 5);
  }
  CHECK(report.composite.total_v0_us ==
        report.composite.register_v0_us + 4 * report.composite.load_v0_us);

  const auto csv = format_bench_csv(report);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.rfind("strategy,", 0) == 0);
  CHECK(format_bench_text(report).find("normalised to stage0") != std::string::npos);

  BenchOptions self{{Strategy::Stage0}, 2, 1, {}};
  CHECK(bench(cat, SelectionPolicy::all_load(), inv, self).rows.at(0).normalized == 1.0);
  BenchOptions none{{Strategy::Stage0}, 2, 0, {}};
  CHECK_THROWS(bench(cat, SelectionPolicy::all_load(), inv, none));
}

TEST_CASE("bench prompts an interactive policy only once") {
  const auto cat = parse("a|1||\nb|1||\n");
  int asked = 0;
  const auto policy = SelectionPolicy::interactive([&](const ModuleRecord&) {
    ++asked;
    return true;
  });
  bench(cat, policy, {}, {{Strategy::Stage0, Strategy::Stage1}, 2, 3, {}});
  CHECK(asked == 2);
}

TEST_CASE("property: space conservation holds for every session") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cat = oracle::random_dag(rng, 1 + rng() % 60, 5, 0.2);
    std::vector<std::string> sel;
    for (const auto& r : cat.records()) {
      if (rng() % 2) sel.push_back(r.name);
    }
    const auto idx = register_v0(cat, SelectionPolicy::from_file(sel));
    for (auto s : {Strategy::Stage0, Strategy::Stage2, Strategy::Stage3}) {
      const auto r = run_load(cat, idx, {}, {s, 3, {}});
      const auto sp = space_report(cat, r.state);
      CHECK(sp.total_kb == sp.loaded_kb + sp.saved_kb + sp.base_only_kb);
      const auto positions = loaded_positions(cat, r.trace);
      CHECK(space_report(cat, positions) == sp);
    }
  }
}
