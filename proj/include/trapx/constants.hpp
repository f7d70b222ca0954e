#pragma once
#include <numbers>

namespace trapx {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPlanck = 6.62607015e-34;       // J s (exact, SI 2019)
inline constexpr double kHbar = kPlanck / (2.0 * kPi);  // J s
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s (exact)
inline constexpr double kGravity = 9.80665;             // m/s^2 (standard)

// Default working atom (Rb-87); a config value, not baked into any physics op.
inline constexpr double kRb87MassKg = 1.44316e-25;

}  // namespace trapx
