#ifndef TIERSIM_TYPES_H_
#define TIERSIM_TYPES_H_

#include <cstdint>
#include <limits>
#include <string_view>

namespace tiersim {

using Tick = std::int64_t;
using PageCount = std::uint64_t;
using PageId = std::uint32_t;
using ContainerId = std::uint32_t;

inline constexpr PageId kNoPage = std::numeric_limits<PageId>::max();
inline constexpr Tick kNever = std::numeric_limits<Tick>::min();

// Local is the fast tier; Cxl is the capacity tier.
enum class Tier : std::uint8_t { kLocal = 0, kCxl = 1 };

inline constexpr Tier Other(Tier t) {
  return t == Tier::kLocal ? Tier::kCxl : Tier::kLocal;
}

std::string_view ToString(Tier t);

enum class WatermarkState : std::uint8_t { kAboveHigh, kBelowHigh, kBelowLow };

std::string_view ToString(WatermarkState s);

// Outcomes the driver treats as recorded events rather than failures.
enum class Status : std::uint8_t {
  kOk,
  kOutOfMemory,
  kDestinationFull,
  kCxlFull,
};

std::string_view ToString(Status s);

}  // namespace tiersim

#endif  // TIERSIM_TYPES_H_
