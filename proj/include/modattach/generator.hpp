#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace modattach {

struct GenOptions {
  std::size_t modules = 1;
  std::uint32_t max_depth = 1;
  std::uint64_t seed = 0;
  double hw_coverage = 1.0;  // fraction of hardware-gated modules with a matching device
};

struct GeneratedFixture {
  std::string catalog_text;    // MODCAT v1
  std::string inventory_text;  // HWINV v1
};

/// Synthetic module directory plus a matching hardware inventory.
/// Deterministic for a given seed (mt19937_64, no std distributions, so
/// output is identical across standard libraries). The longest dependency
/// chain is exactly min(max_depth, modules). Every fourth module is
/// software-only (no hw tags), every fiftieth leaf is base-kernel, and every
/// tenth module gets a `.symbols` helper entry that parsing drops.
GeneratedFixture generate_fixture(const GenOptions& options);

}  // namespace modattach
