#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modattach {

/// Reserved hw tag marking a module that belongs to the base kernel.
inline constexpr std::string_view kBaseTag = "@base";
inline constexpr std::string_view kCatalogHeader = "MODCAT v1";
inline constexpr std::string_view kHelperSuffix = ".symbols";

struct ModuleRecord {
  std::string name;
  std::uint64_t size_kb = 0;
  std::vector<std::string> deps;
  std::vector<std::string> hw_tags;
  bool base_kernel_only = false;

  friend bool operator==(const ModuleRecord&, const ModuleRecord&) = default;
};

/// The kernel-modules directory: records in bytewise ascending name order.
/// A record's position is the canonical index shared with every index file.
/// Immutable once built, so any number of loader threads may read it.
class ModuleCatalog {
 public:
  ModuleCatalog() = default;

  /// Sorts, validates dependencies and rejects cycles. Records named
  /// `*.symbols` are dropped first. Throws modattach::Error.
  static ModuleCatalog from_records(std::vector<ModuleRecord> records);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const ModuleRecord& operator[](std::size_t i) const { return records_[i]; }
  std::span<const ModuleRecord> records() const noexcept { return records_; }

  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Dependencies of record `i` as catalog positions, in declaration order.
  std::span<const std::size_t> deps_of(std::size_t i) const { return dep_index_[i]; }

  friend bool operator==(const ModuleCatalog& a, const ModuleCatalog& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<ModuleRecord> records_;
  std::map<std::string, std::size_t, std::less<>> index_of_;
  std::vector<std::vector<std::size_t>> dep_index_;
};

bool is_helper_entry(std::string_view name) noexcept;

/// Parses `MODCAT v1` text: `name|size_kb|dep1,dep2|tag1,tag2` per line,
/// `#` comments and blank lines ignored.
ModuleCatalog parse_catalog(std::string_view text);

std::string serialize_catalog(const ModuleCatalog& catalog);

/// Dependency depth per module: 1 for leaves, else 1 + deepest dependency.
/// Indexed by catalog position.
std::vector<std::uint32_t> topo_levels(const ModuleCatalog& catalog);

/// Same as topo_levels, keyed by module name.
std::map<std::string, std::uint32_t> topo_level_map(const ModuleCatalog& catalog);

}  // namespace modattach
