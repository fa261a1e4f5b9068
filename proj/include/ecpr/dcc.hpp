#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ecpr/config.hpp"
#include "ecpr/types.hpp"

namespace ecpr {

// Congestion controllers. The combined controller adapts transmit power to
// hit a target awareness ratio at a target range, while a linear rate
// controller keeps the channel busy ratio near its threshold; a state table
// arbitrates power changes when the channel is loaded.

struct PleDiagnostics {
    long rejected_observations = 0;
};

// Path-loss exponent of one received message:
//   (tx - rx) / (10*log10(4*pi*d/lambda)).
// Observations with a nonpositive denominator (d <= lambda/(4*pi)) or with
// rx > tx are rejected: the estimate is meaningless there. Rejections are
// counted, never thrown.
std::optional<double> estimate_ple(const NeighborObservation& obs, double wavelength_m,
                                   PleDiagnostics* diag = nullptr);

// Transmit power needed to reach one neighbor's range-extrapolated channel.
// All observations must come from the same neighbor within one window. The
// per-message PLEs are averaged over the window to counter fading, as is the
// received power. With Eq3Floor::mean_rx the mean received power anchors the
// extrapolation; with Eq3Floor::sensitivity the receiver sensitivity does.
// Throws domain_error on an empty list or if every observation is rejected.
double required_power_to_neighbor(std::span<const NeighborObservation> window_obs,
                                  double target_range_m, double wavelength_m,
                                  Eq3Floor floor = Eq3Floor::mean_rx,
                                  double rx_sensitivity_dbm = -90.0,
                                  PleDiagnostics* diag = nullptr);

// Percentile selection over per-neighbor required powers: sort ascending and
// take entry round(ta * N), 1-based, half-up, clamped to [1, N]. The result
// is clamped to the power bounds; an empty list falls back to the default.
double select_tx_power(std::vector<double> required_dbm, double ta, PowerBounds bounds,
                       double default_tx_power_dbm);

struct RateParams {
    double a = 0.1;
    double b = 1.0 / 150.0;
    double step_cap_hz = 0.5;  // X
    double gain = 1.0;         // G
    RateMode mode = RateMode::paper_literal;
    double cbr_threshold = 0.6;
    RateBounds bounds;
};

// One step of the linear rate controller.
//   paper_literal: r' = (1-a)r + sign(th - cbr) * min(X, G*b*|th - cbr|)
//   classic_rg:    r' = (1-a)r + G*b*(Rg - r),  Rg = r*th/max(cbr, 0.01)
// sign(0) = 0. The result is clamped to the rate bounds.
double rate_step(double current_rate_hz, double cbr, const RateParams& p);

// Transmitter-side awareness estimate over the detected neighbors within the
// target range. Each neighbor's reverse-link path loss stands in for the
// forward link (the simulated channel is exactly reciprocal), and the count
// is perturbed by the configured estimation error. No detected neighbors
// means no evidence of unawareness: returns 1.
double estimate_enar(std::span<const double> reverse_pathloss_db, double own_prev_power_dbm,
                     double rx_sensitivity_dbm, double error_draw);

struct CombinerParams {
    double cbr_threshold = 0.6;
    double gamma = 1.0;
    CombinerMode mode = CombinerMode::table2;
    PowerBounds power_bounds;
};

struct DccDecision {
    double next_power_dbm = 0.0;
    bool power_applied = false;  // candidate accepted (vs. previous kept)
    int state_row = 0;           // 1..8
    double delta_awareness = 0.0;
    double delta_rate = 0.0;
};

// Power-candidate arbitration against channel load, awareness, and rate
// state. Rows 1-8 classify (CBR vs threshold, eNAR vs target, rate vs
// target); the action per row:
//
//   row 1-3: apply the candidate
//   row 4:   apply only if it does not increase power   [table2 mode]
//            apply the candidate                        [algorithm1 mode]
//   row 5,7: apply if not an increase, or if delta_A >= gamma*delta_R
//   row 6,8: apply only if it does not increase power
//
// Throws config_error when target_rate is zero (delta_R undefined).
DccDecision ecpr_decide(double candidate_power_dbm, double prev_power_dbm, double cbr,
                        double enar, double awareness_target, double target_rate_hz,
                        double current_rate_hz, const CombinerParams& p);

}  // namespace ecpr
