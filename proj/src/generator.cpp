#include "modattach/generator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <vector>

#include "modattach/error.hpp"

namespace modattach {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform-ish in [0, n); n > 0.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::string module_name(std::size_t i, std::size_t count) {
  const auto width = std::to_string(count).size();
  std::ostringstream s;
  s << "kmod_" << std::setw(static_cast<int>(width)) << std::setfill('0') << i;
  return s.str();
}

}  // namespace

GeneratedFixture generate_fixture(const GenOptions& o) {
  if (o.modules < 1) throw Error(ErrorCode::ConfigError, "modules must be >= 1");
  if (o.max_depth < 1) throw Error(ErrorCode::ConfigError, "max_depth must be >= 1");
  if (!(o.hw_coverage >= 0.0 && o.hw_coverage <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "hw_coverage must lie in [0, 1]");
  }

  Rng rng(o.seed);
  const auto n = o.modules;
  const auto depth = static_cast<std::uint32_t>(std::min<std::size_t>(o.max_depth, n));

  // Levels: each of 1..depth used at least once, the rest uniform.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<std::uint32_t> level(n);
  for (std::size_t k = 0; k < n; ++k) {
    level[order[k]] = k < depth ? static_cast<std::uint32_t>(k + 1)
                                : static_cast<std::uint32_t>(1 + rng.below(depth));
  }
  std::vector<std::vector<std::size_t>> by_level(depth + 1);
  for (std::size_t i = 0; i < n; ++i) by_level[level[i]].push_back(i);

  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = module_name(i, n);

  std::ostringstream cat;
  cat << "MODCAT v1\n";
  cat << "# generated: modules=" << n << " max_depth=" << o.max_depth << " seed=" << o.seed
      << " hw_coverage=" << std::fixed << std::setprecision(4) << o.hw_coverage << '\n';

  std::vector<std::size_t> gated;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> deps;
    if (level[i] > 1) {
      // One dep on the level directly below pins the exact level; a few
      // more from anywhere below add fan-in.
      const auto& below = by_level[level[i] - 1];
      deps.push_back(below[rng.below(below.size())]);
      const auto extra = rng.below(3);
      for (std::size_t e = 0; e < extra; ++e) {
        const auto& pool = by_level[1 + rng.below(level[i] - 1)];
        const auto pick = pool[rng.below(pool.size())];
        if (std::find(deps.begin(), deps.end(), pick) == deps.end()) deps.push_back(pick);
      }
    }
    const auto size_kb = 8 + rng.below(505);
    const bool base = n >= 10 && i % 50 == 49 && level[i] == 1;
    const bool software = i % 4 == 3;

    cat << names[i] << '|' << size_kb << '|';
    for (std::size_t d = 0; d < deps.size(); ++d) cat << (d ? "," : "") << names[deps[d]];
    cat << '|';
    if (base) {
      cat << "@base";
    } else if (!software) {
      cat << names[i];
      gated.push_back(i);
    }
    cat << '\n';
    if (i % 10 == 0) cat << names[i] << ".symbols|1||\n";
  }

  rng.shuffle(gated);
  const auto covered =
      static_cast<std::size_t>(std::llround(o.hw_coverage * static_cast<double>(gated.size())));
  std::vector<std::string> devices = {"Generic PS/2 keyboard", "ACPI power button",
                                      "Standard 16550 UART"};
  for (std::size_t k = 0; k < covered; ++k) {
    devices.push_back("PCI device " + names[gated[k]] + " rev " + std::to_string(1 + rng.below(9)));
  }
  rng.shuffle(devices);

  std::ostringstream inv;
  inv << "HWINV v1\n";
  for (const auto& d : devices) inv << d << '\n';
  return {cat.str(), inv.str()};
}

}  // namespace modattach
