#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ecpr/channel.hpp"
#include "ecpr/config.hpp"
#include "ecpr/metrics.hpp"
#include "ecpr/mobility.hpp"

namespace ecpr {

struct ReceptionLogRow {
    std::int64_t step = 0;
    int sender = 0;
    int receiver = 0;
    double rx_power_dbm = 0.0;
    bool received = false;
    DropCause drop_cause = DropCause::none;
};

struct DecisionLogRow {
    std::int64_t step = 0;
    int vehicle = 0;
    double power_dbm = 0.0;
    double rate_hz = 0.0;
    double cbr = 0.0;
    double enar = 0.0;
    double delta_a = 0.0;
    double delta_r = 0.0;
    int table2_row = 0;
};

// Optional sinks; rows arrive in a canonical order that does not depend on
// the worker count.
struct RunObserver {
    std::function<void(const StepMetrics&)> on_second;
    std::function<void(const ReceptionLogRow&)> on_event;
    std::function<void(const DecisionLogRow&)> on_decision;
    std::function<void(std::int64_t, std::span<const VehiclePose>)> on_positions;
};

struct RunSummary {
    std::vector<StepMetrics> seconds;
    // Extremes across every vehicle and step, for bounds checks.
    double min_power_dbm = 0.0;
    double max_power_dbm = 0.0;
    double min_rate_hz = 0.0;
    double max_rate_hz = 0.0;
    long rejected_observations = 0;
    long total_messages = 0;

    // Means over the steady-state window (seconds after `skip_seconds`).
    double steady_mean(double StepMetrics::*field, int skip_seconds = 10) const;
};

// Runs one scenario: per step it advances mobility, emits messages at each
// vehicle's current rate, evaluates every pair within the radio horizon,
// measures per-vehicle CBR, steps the controllers, and emits metrics each
// whole second. Vehicles entering the simulation start at the default power
// and the maximum rate.
RunSummary run_scenario(const SimConfig& cfg, MobilityModel& mobility,
                        const RunObserver* observer = nullptr);

// Builds the mobility model from the config (synthetic kinds only).
RunSummary run_scenario(const SimConfig& cfg, const RunObserver* observer = nullptr);

// Distance beyond which no pair is evaluated: where max power at the
// smallest configured exponent lands 10 dB below sensitivity.
double radio_horizon_m(const SimConfig& cfg);

}  // namespace ecpr
