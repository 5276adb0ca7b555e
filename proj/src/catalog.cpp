#include "modattach/catalog.hpp"

#include <algorithm>
#include <deque>

#include "modattach/error.hpp"
#include "text_util.hpp"

namespace modattach {

namespace {

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return c == '|' || c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::MalformedRecord,
              "line " + std::to_string(line_no) + ": " + what);
}

ModuleRecord parse_record(std::string_view line, std::size_t line_no) {
  const auto fields = detail::split(line, '|');
  if (fields.size() != 4) {
    malformed(line_no, "expected 4 '|'-separated fields, got " +
                           std::to_string(fields.size()));
  }
  ModuleRecord rec;
  rec.name = std::string(detail::trim(fields[0]));
  if (!valid_name(rec.name)) malformed(line_no, "bad module name '" + rec.name + "'");

  const auto size = detail::parse_int<std::uint64_t>(detail::trim(fields[1]));
  if (!size) malformed(line_no, "bad size_kb for " + rec.name);
  rec.size_kb = *size;

  if (!detail::trim(fields[2]).empty()) {
    for (auto dep : detail::split(fields[2], ',')) {
      dep = detail::trim(dep);
      if (!valid_name(dep)) {
        malformed(line_no, "bad dependency name in " + rec.name);
      }
      rec.deps.emplace_back(dep);
    }
  }
  if (!detail::trim(fields[3]).empty()) {
    for (auto tag : detail::split(fields[3], ',')) {
      tag = detail::trim(tag);
      if (tag.empty()) malformed(line_no, "empty hw tag in " + rec.name);
      if (tag == kBaseTag) {
        rec.base_kernel_only = true;
      } else {
        rec.hw_tags.emplace_back(tag);
      }
    }
  }
  return rec;
}

// Iterative three-colour DFS; throws CycleError with the first cycle found
// when walking roots in catalog order.
void reject_cycles(const std::vector<ModuleRecord>& records,
                   const std::vector<std::vector<std::size_t>>& deps) {
  enum : std::uint8_t { kWhite, kGrey, kBlack };
  std::vector<std::uint8_t> colour(records.size(), kWhite);
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // (node, next dep)

  for (std::size_t root = 0; root < records.size(); ++root) {
    if (colour[root] != kWhite) continue;
    stack.emplace_back(root, 0);
    colour[root] = kGrey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next == deps[node].size()) {
        colour[node] = kBlack;
        stack.pop_back();
        continue;
      }
      const auto dep = deps[node][next++];
      if (colour[dep] == kGrey) {
        std::vector<std::string> cycle;
        auto it = std::find_if(stack.begin(), stack.end(),
                               [dep](const auto& f) { return f.first == dep; });
        for (; it != stack.end(); ++it) cycle.push_back(records[it->first].name);
        throw CycleError(std::move(cycle));
      }
      if (colour[dep] == kWhite) {
        colour[dep] = kGrey;
        stack.emplace_back(dep, 0);
      }
    }
  }
}

}  // namespace

bool is_helper_entry(std::string_view name) noexcept {
  return name.size() >= kHelperSuffix.size() &&
         name.substr(name.size() - kHelperSuffix.size()) == kHelperSuffix;
}

ModuleCatalog ModuleCatalog::from_records(std::vector<ModuleRecord> records) {
  std::erase_if(records, [](const ModuleRecord& r) { return is_helper_entry(r.name); });
  std::sort(records.begin(), records.end(),
            [](const ModuleRecord& a, const ModuleRecord& b) { return a.name < b.name; });

  ModuleCatalog cat;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!valid_name(records[i].name)) {
      throw Error(ErrorCode::MalformedRecord, "bad module name '" + records[i].name + "'");
    }
    if (!cat.index_of_.emplace(records[i].name, i).second) {
      throw Error(ErrorCode::DuplicateModule, records[i].name);
    }
  }

  cat.dep_index_.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& dep : records[i].deps) {
      const auto it = cat.index_of_.find(dep);
      if (it == cat.index_of_.end()) {
        throw Error(ErrorCode::UnknownDependency, records[i].name + " depends on " + dep);
      }
      cat.dep_index_[i].push_back(it->second);
    }
  }
  reject_cycles(records, cat.dep_index_);
  cat.records_ = std::move(records);
  return cat;
}

std::optional<std::size_t> ModuleCatalog::index_of(std::string_view name) const {
  const auto it = index_of_.find(name);
  if (it == index_of_.end()) return std::nullopt;
  return it->second;
}

ModuleCatalog parse_catalog(std::string_view text) {
  const auto all = detail::lines(text);
  if (all.empty() || detail::trim(all.front()) != kCatalogHeader) {
    throw Error(ErrorCode::MalformedRecord, "missing 'MODCAT v1' header");
  }
  std::vector<ModuleRecord> records;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (detail::is_skippable(all[i])) continue;
    records.push_back(parse_record(all[i], i + 1));
  }
  return ModuleCatalog::from_records(std::move(records));
}

std::string serialize_catalog(const ModuleCatalog& catalog) {
  std::string out(kCatalogHeader);
  out += '\n';
  auto join = [&out](const std::vector<std::string>& items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ',';
      out += items[i];
    }
  };
  for (const auto& rec : catalog.records()) {
    out += rec.name;
    out += '|';
    out += std::to_string(rec.size_kb);
    out += '|';
    join(rec.deps);
    out += '|';
    join(rec.hw_tags);
    if (rec.base_kernel_only) {
      if (!rec.hw_tags.empty()) out += ',';
      out += kBaseTag;
    }
    out += '\n';
  }
  return out;
}

std::vector<std::uint32_t> topo_levels(const ModuleCatalog& catalog) {
  const auto n = catalog.size();
  std::vector<std::vector<std::size_t>> dependents(n);
  std::vector<std::size_t> pending(n);
  for (std::size_t i = 0; i < n; ++i) {
    pending[i] = catalog.deps_of(i).size();
    for (auto d : catalog.deps_of(i)) dependents[d].push_back(i);
  }

  // Kahn's order: a module is levelled once all of its deps are.
  std::vector<std::uint32_t> level(n, 1);
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    const auto m = ready.front();
    ready.pop_front();
    for (auto up : dependents[m]) {
      level[up] = std::max(level[up], level[m] + 1);
      if (--pending[up] == 0) ready.push_back(up);
    }
  }
  return level;
}

std::map<std::string, std::uint32_t> topo_level_map(const ModuleCatalog& catalog) {
  const auto levels = topo_levels(catalog);
  std::map<std::string, std::uint32_t> out;
  for (std::size_t i = 0; i < catalog.size(); ++i) out.emplace(catalog[i].name, levels[i]);
  return out;
}

}  // namespace modattach
