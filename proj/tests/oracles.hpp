#pragma once

// Test-only reference computations. None of these call into the code paths
// they check: levels come from path enumeration or relaxation, load orders
// from a plain recursive walk, and trace checks from event positions.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "modattach/catalog.hpp"
#include "modattach/loader.hpp"

namespace oracle {

using modattach::ModuleCatalog;
using modattach::ModuleRecord;

/// Longest dependency path (in nodes) starting at each module, by walking
/// every simple path. Exponential; small catalogs only.
inline std::map<std::string, std::uint32_t> longest_path_levels(const ModuleCatalog& cat) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < cat.size(); ++i) pos[cat[i].name] = i;
  std::function<std::uint32_t(std::size_t, std::vector<bool>&)> walk =
      [&](std::size_t m, std::vector<bool>& on_path) -> std::uint32_t {
    on_path[m] = true;
    std::uint32_t best = 1;
    for (const auto& d : cat[m].deps) {
      const auto j = pos.at(d);
      if (!on_path[j]) best = std::max(best, 1 + walk(j, on_path));
    }
    on_path[m] = false;
    return best;
  };
  std::map<std::string, std::uint32_t> out;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    std::vector<bool> on_path(cat.size(), false);
    out[cat[i].name] = walk(i, on_path);
  }
  return out;
}

/// Longest-path levels by repeated relaxation until nothing changes.
/// Polynomial; fine for a few hundred modules.
inline std::map<std::string, std::uint32_t> relaxed_levels(const ModuleCatalog& cat) {
  std::map<std::string, std::uint32_t> level;
  for (const auto& r : cat.records()) level[r.name] = 1;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : cat.records()) {
      for (const auto& d : r.deps) {
        if (level[d] + 1 > level[r.name]) {
          level[r.name] = level[d] + 1;
          changed = true;
        }
      }
    }
  }
  return level;
}

/// Transitive dependency closure of `roots` (roots included).
inline std::set<std::string> closure(const ModuleCatalog& cat, const std::set<std::string>& roots) {
  std::set<std::string> out;
  std::vector<std::string> todo(roots.begin(), roots.end());
  while (!todo.empty()) {
    auto name = todo.back();
    todo.pop_back();
    if (!out.insert(name).second) continue;
    for (const auto& d : cat[*cat.index_of(name)].deps) todo.push_back(d);
  }
  return out;
}

/// Sequential depth-first post-order over flagged roots in catalog order:
/// the order in which a single core must attach modules.
inline std::vector<std::string> dfs_load_order(const ModuleCatalog& cat,
                                               const std::set<std::string>& roots) {
  std::set<std::string> done;
  std::vector<std::string> order;
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    if (done.count(name)) return;
    const auto& rec = cat[*cat.index_of(name)];
    if (rec.base_kernel_only) return;
    for (const auto& d : rec.deps) visit(d);
    done.insert(name);
    order.push_back(name);
  };
  for (const auto& r : cat.records()) {
    if (roots.count(r.name)) visit(r.name);
  }
  return order;
}

inline std::vector<std::string> load_names(const modattach::Trace& trace) {
  std::vector<std::string> out;
  for (const auto& ev : trace) {
    if (ev.kind == modattach::EventKind::Load) out.push_back(ev.module);
  }
  return out;
}

inline std::set<std::string> load_set(const modattach::Trace& trace) {
  const auto v = load_names(trace);
  return {v.begin(), v.end()};
}

/// Counts LOAD events that repeat a module or precede one of its
/// non-resident dependencies, using trace positions only.
inline std::size_t safety_violations(const ModuleCatalog& cat, const modattach::Trace& trace) {
  std::map<std::string, std::size_t> first_load;
  std::size_t bad = 0;
  for (std::size_t p = 0; p < trace.size(); ++p) {
    if (trace[p].kind != modattach::EventKind::Load) continue;
    if (!first_load.emplace(trace[p].module, p).second) ++bad;
  }
  for (const auto& [name, p] : first_load) {
    for (const auto& d : cat[*cat.index_of(name)].deps) {
      if (cat[*cat.index_of(d)].base_kernel_only) continue;
      const auto it = first_load.find(d);
      if (it == first_load.end() || it->second > p) ++bad;
    }
  }
  return bad;
}

/// Random acyclic catalog: module i may only depend on modules with a
/// smaller hidden rank, and no chain is longer than `max_depth`.
inline ModuleCatalog random_dag(std::mt19937_64& rng, std::size_t n, std::uint32_t max_depth,
                                double base_fraction = 0.0) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = "m" + std::to_string(rng() % 1000000) + "_" +
                                                 std::to_string(i);
  std::vector<std::uint32_t> depth(n, 1);
  std::vector<ModuleRecord> recs(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    recs[i].name = names[i];
    recs[i].size_kb = rng() % 600;
    if (i > 0) {
      const auto k = rng() % 4;
      for (std::size_t e = 0; e < k; ++e) {
        const auto j = rng() % i;
        if (depth[j] + 1 > max_depth) continue;
        if (std::find(recs[i].deps.begin(), recs[i].deps.end(), names[j]) != recs[i].deps.end())
          continue;
        recs[i].deps.push_back(names[j]);
        depth[i] = std::max(depth[i], depth[j] + 1);
      }
    }
    const auto t = rng() % 3;
    if (t == 1) recs[i].hw_tags = {"dev" + std::to_string(i)};
    if (t == 2) recs[i].hw_tags = {"dev" + std::to_string(i), "alt" + std::to_string(i)};
    if (recs[i].deps.empty() && unit(rng) < base_fraction) {
      recs[i].base_kernel_only = true;
      recs[i].hw_tags.clear();
    }
  }
  return ModuleCatalog::from_records(std::move(recs));
}

}  // namespace oracle
