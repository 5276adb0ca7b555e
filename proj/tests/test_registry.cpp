#include <doctest.h>

#include <random>

#include "modattach/error.hpp"
#include "modattach/registry.hpp"
#include "oracles.hpp"

using namespace modattach;

namespace {

ModuleCatalog parse(std::string body) { return parse_catalog("MODCAT v1\n" + body); }

std::map<std::string, std::uint32_t> values(const IndexFile& idx) {
  std::map<std::string, std::uint32_t> out;
  for (const auto& e : idx.entries) out[e.name] = e.value;
  return out;
}

ModuleCatalog chain(std::size_t length) {
  std::vector<ModuleRecord> recs(length);
  char buf[16];
  for (std::size_t i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "c%04zu", i);
    recs[i].name = buf;
    if (i) recs[i].deps = {recs[i - 1].name};
  }
  return ModuleCatalog::from_records(std::move(recs));
}

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::UsageError;
}

}  // namespace

TEST_CASE("register_v0 examples") {
  const auto ab = parse("a|1||\nb|1||\n");
  CHECK(register_v0(ab, SelectionPolicy::all_load()).entries ==
        std::vector<IndexEntry>{{"a", 1}, {"b", 1}});
  CHECK(register_v0(ab, SelectionPolicy::from_file({"b"})).entries ==
        std::vector<IndexEntry>{{"a", 0}, {"b", 1}});
  const auto abc = parse("a|1||\nb|1||\nc|1||\n");
  CHECK(register_v0(abc, SelectionPolicy::all_skip()).entries ==
        std::vector<IndexEntry>{{"a", 0}, {"b", 0}, {"c", 0}});
  CHECK(error_of([&] { register_v0(ab, SelectionPolicy::from_file({"zz"})); }) ==
        ErrorCode::UnknownSelection);
}

TEST_CASE("register_v0 ignores hardware; interactive asks once per module in order") {
  const auto cat = parse("b|1||ath9k\na|1||e1000\n");
  std::vector<std::string> asked;
  const auto idx = register_v0(cat, SelectionPolicy::interactive([&](const ModuleRecord& r) {
                                 asked.push_back(r.name);
                                 return r.name == "a";
                               }));
  CHECK(asked == std::vector<std::string>{"a", "b"});
  CHECK(values(idx) == std::map<std::string, std::uint32_t>{{"a", 1}, {"b", 0}});
}

TEST_CASE("register_v1 examples") {
  SUBCASE("chain, select the top") {
    const auto cat = parse("c|1|b|\nb|1|a|\na|1||\n");
    const auto idx = register_v1(cat, SelectionPolicy::from_file({"c"}), {});
    CHECK(values(idx) == oracle::longest_path_levels(cat));
    CHECK(values(idx) == std::map<std::string, std::uint32_t>{{"a", 1}, {"b", 2}, {"c", 3}});
  }
  SUBCASE("unsupported selected module stays 0") {
    const auto cat = parse("a|1||ath9k\n");
    const auto idx = register_v1(cat, SelectionPolicy::all_load(),
                                 HardwareInventory{{"Intel e1000 Gigabit"}});
    CHECK(values(idx) == std::map<std::string, std::uint32_t>{{"a", 0}});
  }
  SUBCASE("diamond") {
    const auto cat = parse("d|1|b,c|\nb|1|a|\nc|1|a|\na|1||\n");
    const auto idx = register_v1(cat, SelectionPolicy::from_file({"d"}), {});
    CHECK(values(idx) ==
          std::map<std::string, std::uint32_t>{{"a", 1}, {"b", 2}, {"c", 2}, {"d", 3}});
  }
  SUBCASE("dependencies get levelled even when unsupported themselves") {
    const auto cat = parse("top|1|drv|\ndrv|1||ath9k\nidle|1||\n");
    const auto idx = register_v1(cat, SelectionPolicy::from_file({"top"}), {});
    CHECK(values(idx) ==
          std::map<std::string, std::uint32_t>{{"drv", 1}, {"idle", 0}, {"top", 2}});
  }
  SUBCASE("all_skip is all zeros") {
    const auto cat = parse("d|1|b,c|\nb|1|a|\nc|1|a|\na|1||\n");
    for (const auto& e : register_v1(cat, SelectionPolicy::all_skip(), {}).entries) {
      CHECK(e.value == 0);
    }
  }
}

TEST_CASE("register_v1 depth bound is one byte") {
  const auto ok = chain(255);
  const auto idx = register_v1(ok, SelectionPolicy::all_load(), {});
  CHECK(idx.entries.back().value == 255);
  const auto too_deep = chain(256);
  try {
    register_v1(too_deep, SelectionPolicy::from_file({"c0255"}), {});
    FAIL("no overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DepthOverflow);
    CHECK(std::string(e.what()).find("256") != std::string::npos);
  }
  // Selecting only the shallower part of the same chain is fine.
  CHECK(register_v1(too_deep, SelectionPolicy::from_file({"c0254"}), {}).entries[254].value ==
        255);
}

TEST_CASE("index text round trip and read errors") {
  const auto cat = parse("d|1|b,c|\nb|1|a|\nc|1|a|\na|1||\n");
  const auto v1 = register_v1(cat, SelectionPolicy::from_file({"d"}), {});
  const auto text = write_index(v1);
  CHECK(text == "MODINDEX v1\na 1\nb 2\nc 2\nd 3\n");
  CHECK(read_index(text, cat) == v1);
  CHECK(read_index(text, cat, IndexVersion::V1) == v1);

  const auto v0 = register_v0(cat, SelectionPolicy::all_load());
  CHECK(read_index(write_index(v0), cat) == v0);

  CHECK(error_of([&] { read_index(text, cat, IndexVersion::V0); }) == ErrorCode::VersionMismatch);
  CHECK(error_of([&] { read_index("MODINDEX v7\n", cat); }) == ErrorCode::VersionMismatch);
  CHECK(error_of([&] { read_index("MODINDEX v1\na 1\nb 2\nc 256\nd 3\n", cat); }) ==
        ErrorCode::ValueOutOfRange);
  CHECK(error_of([&] { read_index("MODINDEX v0\na 1\nb 2\nc 0\nd 1\n", cat); }) ==
        ErrorCode::ValueOutOfRange);
  CHECK(error_of([&] { read_index("MODINDEX v0\nb 1\na 1\nc 0\nd 1\n", cat); }) ==
        ErrorCode::PositionMismatch);
  CHECK(error_of([&] { read_index("MODINDEX v0\na 1\nb 1\n", cat); }) ==
        ErrorCode::PositionMismatch);
  CHECK(error_of([&] { read_index("MODINDEX v0\na\nb 1\nc 1\nd 1\n", cat); }) ==
        ErrorCode::ValueOutOfRange);
}

TEST_CASE("property: register_v1 agrees with the relaxation oracle on random DAGs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 80; ++trial) {
    const auto cat = oracle::random_dag(rng, 1 + rng() % 200, 1 + rng() % 8);
    HardwareInventory inv;
    for (std::size_t i = 0; i < cat.size(); ++i) {
      if (rng() % 2) inv.devices.push_back("slot dev" + cat[i].name.substr(cat[i].name.find('_') + 1));
    }
    std::vector<std::string> picked;
    for (const auto& r : cat.records()) {
      if (rng() % 3 == 0) picked.push_back(r.name);
    }
    const auto policy = SelectionPolicy::from_file(picked);
    const auto idx = register_v1(cat, policy, inv);
    const auto expect = oracle::relaxed_levels(cat);
    for (std::size_t i = 0; i < cat.size(); ++i) {
      const auto v = idx.entries[i].value;
      if (v != 0) CHECK(v == expect.at(cat[i].name));
      if (v >= 2) {
        for (const auto& d : cat[i].deps) {
          const auto dv = idx.entries[*cat.index_of(d)].value;
          CHECK(dv > 0);
          CHECK(dv < v);
        }
      }
    }
    // Nonzero set is exactly the closure of selected & supported roots.
    std::set<std::string> roots;
    for (const auto& n : picked) {
      if (check_hardware_support(cat[*cat.index_of(n)], inv)) roots.insert(n);
    }
    const auto reach = oracle::closure(cat, roots);
    for (std::size_t i = 0; i < cat.size(); ++i) {
      CHECK((idx.entries[i].value != 0) == (reach.count(cat[i].name) == 1));
    }
    // Determinism and v0 hardware independence.
    CHECK(write_index(register_v1(cat, policy, inv)) == write_index(idx));
    CHECK(register_v0(cat, policy) == register_v0(cat, policy));
  }
}
