#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modattach/catalog.hpp"

namespace modattach {

inline constexpr std::string_view kInventoryHeader = "HWINV v1";

/// Device descriptions as a hardware-info tool would print them.
struct HardwareInventory {
  std::vector<std::string> devices;

  friend bool operator==(const HardwareInventory&, const HardwareInventory&) = default;
};

/// `HWINV v1` header, then one device per non-comment line (trimmed).
HardwareInventory parse_inventory(std::string_view text);

std::string serialize_inventory(const HardwareInventory& inv);

/// Inventory with devices pre-folded to lower case, built once per loading
/// session so repeated checks don't re-normalise the device list.
class DeviceMatcher {
 public:
  explicit DeviceMatcher(const HardwareInventory& inv);

  /// True when any tag of `module` occurs as a whole word in any device,
  /// ignoring case. Modules without tags are not hardware-gated.
  bool supports(const ModuleRecord& module) const;

 private:
  std::vector<std::string> devices_;
};

bool check_hardware_support(const ModuleRecord& module, const HardwareInventory& inv);

/// Case-insensitive whole-word containment of `tag` within `device`.
bool matches_word(std::string_view device, std::string_view tag);

}  // namespace modattach
