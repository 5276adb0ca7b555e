#include "modattach/registry.hpp"

#include <algorithm>

#include "modattach/error.hpp"
#include "text_util.hpp"

namespace modattach {

namespace {

constexpr std::string_view kIndexHeaderV0 = "MODINDEX v0";
constexpr std::string_view kIndexHeaderV1 = "MODINDEX v1";

IndexFile blank_index(const ModuleCatalog& catalog, IndexVersion version) {
  IndexFile index{version, {}};
  index.entries.reserve(catalog.size());
  for (const auto& rec : catalog.records()) index.entries.push_back({rec.name, 0});
  return index;
}

std::uint32_t max_value(IndexVersion v) { return v == IndexVersion::V0 ? 1 : kMaxLevel; }

// Post-order walk from `root`, filling `level` for every module reachable
// through dependencies. A non-zero entry is final.
void handle_dependency(const ModuleCatalog& catalog, std::size_t root,
                       std::vector<std::uint32_t>& level) {
  if (level[root] != 0) return;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto deps = catalog.deps_of(node);
    while (next < deps.size() && level[deps[next]] != 0) ++next;
    if (next < deps.size()) {
      stack.emplace_back(deps[next], 0);
      continue;
    }
    std::uint32_t deepest = 0;
    for (auto d : deps) deepest = std::max(deepest, level[d]);
    if (deepest + 1 > kMaxLevel) {
      throw Error(ErrorCode::DepthOverflow,
                  catalog[node].name + " would need level " + std::to_string(deepest + 1));
    }
    level[node] = deepest + 1;
    stack.pop_back();
  }
}

}  // namespace

std::string_view to_string(IndexVersion v) noexcept { return v == IndexVersion::V0 ? "v0" : "v1"; }

std::vector<bool> resolve_selection(const ModuleCatalog& catalog, const SelectionPolicy& policy) {
  std::vector<bool> selected(catalog.size(), false);
  switch (policy.kind) {
    case SelectionPolicy::Kind::AllLoad:
      selected.assign(catalog.size(), true);
      break;
    case SelectionPolicy::Kind::AllSkip:
      break;
    case SelectionPolicy::Kind::FromFile:
      for (const auto& name : policy.names) {
        const auto i = catalog.index_of(name);
        if (!i) throw Error(ErrorCode::UnknownSelection, name);
        selected[*i] = true;
      }
      break;
    case SelectionPolicy::Kind::Interactive:
      if (!policy.ask) throw Error(ErrorCode::ConfigError, "interactive policy without prompt");
      for (std::size_t i = 0; i < catalog.size(); ++i) selected[i] = policy.ask(catalog[i]);
      break;
  }
  return selected;
}

std::vector<std::string> parse_selection_list(std::string_view text) {
  std::vector<std::string> names;
  for (auto line : detail::lines(text)) {
    if (detail::is_skippable(line)) continue;
    names.emplace_back(detail::trim(line));
  }
  return names;
}

IndexFile register_v0(const ModuleCatalog& catalog, const SelectionPolicy& policy) {
  const auto selected = resolve_selection(catalog, policy);
  auto index = blank_index(catalog, IndexVersion::V0);
  for (std::size_t i = 0; i < catalog.size(); ++i) index.entries[i].value = selected[i] ? 1 : 0;
  return index;
}

IndexFile register_v1(const ModuleCatalog& catalog, const SelectionPolicy& policy,
                      const HardwareInventory& inventory) {
  const auto selected = resolve_selection(catalog, policy);
  const DeviceMatcher matcher(inventory);
  std::vector<std::uint32_t> level(catalog.size(), 0);
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (!selected[i] || !matcher.supports(catalog[i])) continue;
    handle_dependency(catalog, i, level);
  }
  auto index = blank_index(catalog, IndexVersion::V1);
  for (std::size_t i = 0; i < catalog.size(); ++i) index.entries[i].value = level[i];
  return index;
}

std::string write_index(const IndexFile& index) {
  std::string out(index.version == IndexVersion::V0 ? kIndexHeaderV0 : kIndexHeaderV1);
  out += '\n';
  for (const auto& e : index.entries) {
    out += e.name;
    out += ' ';
    out += std::to_string(e.value);
    out += '\n';
  }
  return out;
}

IndexFile read_index(std::string_view text, const ModuleCatalog& catalog,
                     std::optional<IndexVersion> expected) {
  std::vector<std::string_view> body;
  std::optional<std::string_view> header;
  for (auto line : detail::lines(text)) {
    if (detail::is_skippable(line)) continue;
    if (!header) {
      header = detail::trim(line);
    } else {
      body.push_back(detail::trim(line));
    }
  }

  IndexFile index;
  if (header == kIndexHeaderV0) {
    index.version = IndexVersion::V0;
  } else if (header == kIndexHeaderV1) {
    index.version = IndexVersion::V1;
  } else {
    throw Error(ErrorCode::VersionMismatch,
                "unrecognised index header '" + std::string(header.value_or("")) + "'");
  }
  if (expected && *expected != index.version) {
    throw Error(ErrorCode::VersionMismatch, "expected index " + std::string(to_string(*expected)) +
                                                ", found " + std::string(to_string(index.version)));
  }

  if (body.size() != catalog.size()) {
    throw Error(ErrorCode::PositionMismatch, "index has " + std::to_string(body.size()) +
                                                 " entries, catalog has " +
                                                 std::to_string(catalog.size()));
  }
  const auto limit = max_value(index.version);
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto sp = body[i].find_first_of(" \t");
    const auto name = body[i].substr(0, sp);
    const auto raw = sp == std::string_view::npos ? std::string_view{}
                                                  : detail::trim(body[i].substr(sp));
    if (name != catalog[i].name) {
      throw Error(ErrorCode::PositionMismatch, "position " + std::to_string(i) + " holds '" +
                                                   std::string(name) + "', catalog has '" +
                                                   catalog[i].name + "'");
    }
    const auto value = detail::parse_int<std::uint64_t>(raw);
    if (!value || *value > limit) {
      throw Error(ErrorCode::ValueOutOfRange,
                  std::string(name) + " has value '" + std::string(raw) + "'");
    }
    index.entries.push_back({std::string(name), static_cast<std::uint32_t>(*value)});
  }
  return index;
}

void require_aligned(const IndexFile& index, const ModuleCatalog& catalog, IndexVersion wanted) {
  if (index.version != wanted) {
    throw Error(ErrorCode::IndexMismatch, "strategy needs an index " +
                                              std::string(to_string(wanted)) + ", got " +
                                              std::string(to_string(index.version)));
  }
  if (index.entries.size() != catalog.size()) {
    throw Error(ErrorCode::IndexMismatch, "index length differs from catalog");
  }
  const auto limit = max_value(wanted);
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (index.entries[i].name != catalog[i].name || index.entries[i].value > limit) {
      throw Error(ErrorCode::IndexMismatch, "entry " + std::to_string(i) + " ('" +
                                                index.entries[i].name + "') does not match catalog");
    }
  }
}

}  // namespace modattach
