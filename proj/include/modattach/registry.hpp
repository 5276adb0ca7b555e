#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modattach/catalog.hpp"
#include "modattach/hardware.hpp"

namespace modattach {

/// Who answers "load or skip?" for each module during registration.
struct SelectionPolicy {
  enum class Kind { AllLoad, AllSkip, FromFile, Interactive };

  Kind kind = Kind::AllLoad;
  std::vector<std::string> names;  // FromFile only
  std::function<bool(const ModuleRecord&)> ask;  // Interactive only

  static SelectionPolicy all_load() { return {Kind::AllLoad, {}, {}}; }
  static SelectionPolicy all_skip() { return {Kind::AllSkip, {}, {}}; }
  static SelectionPolicy from_file(std::vector<std::string> selected) {
    return {Kind::FromFile, std::move(selected), {}};
  }
  static SelectionPolicy interactive(std::function<bool(const ModuleRecord&)> ask) {
    return {Kind::Interactive, {}, std::move(ask)};
  }
};

/// One bool per catalog position. Interactive policies are asked once per
/// module, in catalog order. Throws UnknownSelection.
std::vector<bool> resolve_selection(const ModuleCatalog& catalog, const SelectionPolicy& policy);

/// Names listed one per line; `#` comments and blanks ignored.
std::vector<std::string> parse_selection_list(std::string_view text);

enum class IndexVersion : std::uint8_t { V0 = 0, V1 = 1 };

std::string_view to_string(IndexVersion v) noexcept;

inline constexpr std::uint32_t kMaxLevel = 255;

struct IndexEntry {
  std::string name;
  std::uint32_t value = 0;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

/// Per-module registration outcome, aligned with catalog positions.
/// v0 holds load bits; v1 holds dependency levels where 0 means not
/// supported or not selected, 1 an independent module, 2..255 a dependent one.
struct IndexFile {
  IndexVersion version = IndexVersion::V0;
  std::vector<IndexEntry> entries;

  friend bool operator==(const IndexFile&, const IndexFile&) = default;
};

/// Stage-0 registration: load bit per module, no hardware check.
IndexFile register_v0(const ModuleCatalog& catalog, const SelectionPolicy& policy);

/// Stage-1 registration. Each selected, hardware-supported module and its
/// transitive dependencies receive their dependency level; everything else
/// stays 0. Throws DepthOverflow past level 255.
IndexFile register_v1(const ModuleCatalog& catalog, const SelectionPolicy& policy,
                      const HardwareInventory& inventory);

std::string write_index(const IndexFile& index);

/// Parses and checks positional alignment against `catalog`. When
/// `expected` is given, a different header version is a VersionMismatch.
IndexFile read_index(std::string_view text, const ModuleCatalog& catalog,
                     std::optional<IndexVersion> expected = std::nullopt);

/// Throws IndexMismatch unless `index` lines up with `catalog` and has
/// the wanted version and value range.
void require_aligned(const IndexFile& index, const ModuleCatalog& catalog, IndexVersion wanted);

}  // namespace modattach
