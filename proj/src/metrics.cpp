#include "ecpr/metrics.hpp"

#include <cmath>

namespace ecpr {

double compute_nar(const AwarenessWindow& win, int ego, double range_m) {
    int in_range = 0;
    int detected = 0;
    for (int j = 0; j < win.n; ++j) {
        if (j == ego) continue;
        if (distance(win.positions[static_cast<std::size_t>(ego)],
                     win.positions[static_cast<std::size_t>(j)]) <= range_m) {
            ++in_range;
            if (win.heard_from(ego, j)) ++detected;
        }
    }
    if (in_range == 0) return 1.0;
    return static_cast<double>(detected) / static_cast<double>(in_range);
}

double compute_rnar(const AwarenessWindow& win, int ego, double range_m) {
    int heard = 0;
    int above = 0;
    for (int j = 0; j < win.n; ++j) {
        if (j == ego) continue;
        if (!win.heard_from(ego, j)) continue;
        ++heard;
        if (distance(win.positions[static_cast<std::size_t>(ego)],
                     win.positions[static_cast<std::size_t>(j)]) > range_m) {
            ++above;
        }
    }
    if (heard == 0) return 0.0;
    return static_cast<double>(above) / static_cast<double>(heard);
}

double mean_of(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double std_of(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    double m = mean_of(values);
    double acc = 0.0;
    for (double v : values) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

StepMetrics aggregate_step(int second, std::span<const PerVehicleMetrics> per_vehicle,
                           std::span<const double> cbr_samples) {
    if (per_vehicle.empty()) throw domain_error("aggregate_step: empty vehicle set");
    StepMetrics out;
    out.second = second;
    double n = static_cast<double>(per_vehicle.size());
    for (const PerVehicleMetrics& v : per_vehicle) {
        out.mean_nar += v.nar;
        out.mean_rnar += v.rnar;
        out.mean_rate_hz += v.rate_hz;
        out.mean_power_dbm += v.power_dbm;
        out.hidden_node_ratio += v.hidden_node_ratio;
    }
    out.mean_nar /= n;
    out.mean_rnar /= n;
    out.mean_rate_hz /= n;
    out.mean_power_dbm /= n;
    out.hidden_node_ratio /= n;
    out.cbr_mean = mean_of(cbr_samples);
    out.cbr_std = std_of(cbr_samples);
    return out;
}

}  // namespace ecpr
