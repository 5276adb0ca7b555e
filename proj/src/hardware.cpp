#include "modattach/hardware.hpp"

#include <algorithm>
#include <cctype>

#include "modattach/error.hpp"
#include "text_util.hpp"

namespace modattach {

namespace {

char fold(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string lowered(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), fold);
  return out;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Both arguments already folded.
bool contains_word(std::string_view device, std::string_view tag) {
  if (tag.empty()) return false;
  for (auto pos = device.find(tag); pos != std::string_view::npos;
       pos = device.find(tag, pos + 1)) {
    const auto end = pos + tag.size();
    const bool left_ok = pos == 0 || !is_word_char(device[pos - 1]) || !is_word_char(tag.front());
    const bool right_ok =
        end == device.size() || !is_word_char(device[end]) || !is_word_char(tag.back());
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace

HardwareInventory parse_inventory(std::string_view text) {
  const auto all = detail::lines(text);
  if (all.empty() || detail::trim(all.front()) != kInventoryHeader) {
    throw Error(ErrorCode::MalformedInventory, "missing 'HWINV v1' header");
  }
  HardwareInventory inv;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (detail::is_skippable(all[i])) continue;
    inv.devices.emplace_back(detail::trim(all[i]));
  }
  return inv;
}

std::string serialize_inventory(const HardwareInventory& inv) {
  std::string out(kInventoryHeader);
  out += '\n';
  for (const auto& d : inv.devices) {
    out += d;
    out += '\n';
  }
  return out;
}

DeviceMatcher::DeviceMatcher(const HardwareInventory& inv) {
  devices_.reserve(inv.devices.size());
  for (const auto& d : inv.devices) devices_.push_back(lowered(d));
}

bool DeviceMatcher::supports(const ModuleRecord& module) const {
  if (module.hw_tags.empty()) return true;
  for (const auto& raw : module.hw_tags) {
    const auto tag = lowered(raw);
    for (const auto& device : devices_) {
      if (contains_word(device, tag)) return true;
    }
  }
  return false;
}

bool check_hardware_support(const ModuleRecord& module, const HardwareInventory& inv) {
  return DeviceMatcher(inv).supports(module);
}

bool matches_word(std::string_view device, std::string_view tag) {
  return contains_word(lowered(device), lowered(tag));
}

}  // namespace modattach
