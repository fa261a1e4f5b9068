#pragma once

#include <cstdint>
#include <vector>

#include "ecpr/config.hpp"

namespace ecpr {

// Application context assigned to one vehicle: how far it wants to be heard
// and how often it wants to transmit.
struct ContextAssignment {
    double target_range_m;
    double target_rate_hz;
};

// Deterministic per-vehicle context for a test profile. Pure function of
// (profile, count, seed): the same inputs always give the same assignment.
//
//   Test1: range 90 m, rate 10 Hz for everyone.
//   Test2: range 90 m, rate uniform in [5, 10] Hz.
//   Test3: range from {30, 60, 90, 120, 150, 180} m, rate 10 Hz.
//   Test4: both randomized as above.
//   Custom: fixed (custom_range, custom_rate) for everyone.
std::vector<ContextAssignment> assign_context_profile(TestProfile profile, int vehicle_count,
                                                      std::uint64_t seed,
                                                      bool integer_rates = false,
                                                      double custom_range_m = 90.0,
                                                      double custom_rate_hz = 10.0);

}  // namespace ecpr
