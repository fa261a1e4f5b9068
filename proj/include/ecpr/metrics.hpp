#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecpr/geometry.hpp"
#include "ecpr/types.hpp"

namespace ecpr {

// Ground-truth awareness metrics, computed by the omniscient simulator over
// 1-second windows (the metrics window is fixed at 1 s even though the
// control loop runs faster).

// One second of evidence for a vehicle population: end-of-window positions
// and a row-major n x n matrix counting messages receiver i decoded from
// sender j during the window.
struct AwarenessWindow {
    std::span<const Vec2> positions;
    std::span<const std::uint16_t> heard;  // heard[i * n + j]
    int n = 0;

    bool heard_from(int i, int j) const {
        return heard[static_cast<std::size_t>(i) * n + j] > 0;
    }
};

// Fraction of true neighbors within `range_m` of ego that were heard from in
// the window. No true neighbors in range: vacuously 1.
double compute_nar(const AwarenessWindow& win, int ego, double range_m);

// Fraction of heard senders lying beyond `range_m`. Nothing heard: 0.
double compute_rnar(const AwarenessWindow& win, int ego, double range_m);

struct PerVehicleMetrics {
    double nar = 0.0;
    double rnar = 0.0;
    double rate_hz = 0.0;
    double power_dbm = 0.0;
    double hidden_node_ratio = 0.0;
};

struct StepMetrics {
    int second = 0;
    double mean_nar = 0.0;
    double mean_rnar = 0.0;
    double mean_rate_hz = 0.0;
    double mean_power_dbm = 0.0;
    double cbr_mean = 0.0;
    double cbr_std = 0.0;
    double hidden_node_ratio = 0.0;
};

double mean_of(std::span<const double> values);
// Two-pass population standard deviation.
double std_of(std::span<const double> values);

// Across-vehicle means for one metrics window. Throws domain_error on an
// empty vehicle set.
StepMetrics aggregate_step(int second, std::span<const PerVehicleMetrics> per_vehicle,
                           std::span<const double> cbr_samples);

}  // namespace ecpr
