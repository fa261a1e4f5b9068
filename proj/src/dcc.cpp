#include "ecpr/dcc.hpp"

#include <algorithm>
#include <cmath>

#include "ecpr/propagation.hpp"

namespace ecpr {

std::optional<double> estimate_ple(const NeighborObservation& obs, double wavelength_m,
                                   PleDiagnostics* diag) {
    double denom_arg = 4.0 * M_PI * obs.distance_m / wavelength_m;
    if (obs.distance_m <= 0.0 || denom_arg <= 1.0 || !obs.physically_valid()) {
        if (diag) ++diag->rejected_observations;
        return std::nullopt;
    }
    double pathloss = obs.tx_power_dbm - obs.rx_power_dbm;
    return pathloss / (10.0 * std::log10(denom_arg));
}

double required_power_to_neighbor(std::span<const NeighborObservation> window_obs,
                                  double target_range_m, double wavelength_m, Eq3Floor floor,
                                  double rx_sensitivity_dbm, PleDiagnostics* diag) {
    if (window_obs.empty()) {
        throw domain_error("required_power_to_neighbor: empty observation window");
    }
    double sum_rx = 0.0;
    double sum_ple = 0.0;
    long m = 0;
    for (const NeighborObservation& obs : window_obs) {
        auto ple = estimate_ple(obs, wavelength_m, diag);
        if (!ple) continue;
        sum_rx += obs.rx_power_dbm;
        sum_ple += *ple;
        ++m;
    }
    if (m == 0) {
        throw domain_error("required_power_to_neighbor: no usable observations");
    }
    double mean_ple = sum_ple / static_cast<double>(m);
    double range_loss = mean_ple * reference_loss_db(target_range_m, wavelength_m);
    double anchor = floor == Eq3Floor::mean_rx ? sum_rx / static_cast<double>(m)
                                               : rx_sensitivity_dbm;
    return anchor + range_loss;
}

double select_tx_power(std::vector<double> required_dbm, double ta, PowerBounds bounds,
                       double default_tx_power_dbm) {
    if (required_dbm.empty()) return clamp(default_tx_power_dbm, bounds.min_dbm, bounds.max_dbm);
    std::sort(required_dbm.begin(), required_dbm.end());
    auto n = static_cast<long>(required_dbm.size());
    long k = static_cast<long>(std::floor(ta * static_cast<double>(n) + 0.5));  // half-up
    k = std::clamp(k, 1L, n);
    return clamp(required_dbm[static_cast<std::size_t>(k - 1)], bounds.min_dbm, bounds.max_dbm);
}

double rate_step(double current_rate_hz, double cbr, const RateParams& p) {
    double next;
    if (p.mode == RateMode::paper_literal) {
        double gap = p.cbr_threshold - cbr;
        double sign = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
        double drive = std::min(p.step_cap_hz, p.gain * p.b * std::fabs(gap));
        next = (1.0 - p.a) * current_rate_hz + sign * drive;
    } else {
        double rg = current_rate_hz * p.cbr_threshold / std::max(cbr, 0.01);
        next = (1.0 - p.a) * current_rate_hz + p.gain * p.b * (rg - current_rate_hz);
    }
    return clamp(next, p.bounds.min_hz, p.bounds.max_hz);
}

double estimate_enar(std::span<const double> reverse_pathloss_db, double own_prev_power_dbm,
                     double rx_sensitivity_dbm, double error_draw) {
    if (reverse_pathloss_db.empty()) return 1.0;
    long reached = 0;
    for (double pl : reverse_pathloss_db) {
        if (own_prev_power_dbm - pl > rx_sensitivity_dbm) ++reached;
    }
    double estimated = (1.0 + error_draw) * static_cast<double>(reached);
    return clamp_cbr(estimated / static_cast<double>(reverse_pathloss_db.size()));
}

DccDecision ecpr_decide(double candidate_power_dbm, double prev_power_dbm, double cbr,
                        double enar, double awareness_target, double target_rate_hz,
                        double current_rate_hz, const CombinerParams& p) {
    if (target_rate_hz == 0.0) {
        throw config_error("ecpr_decide: target rate must be nonzero");
    }
    DccDecision d;
    d.delta_awareness = awareness_target - enar;
    d.delta_rate = (target_rate_hz - current_rate_hz) / target_rate_hz;

    bool congested = cbr >= p.cbr_threshold;
    bool aware = enar >= awareness_target;
    bool rate_below = current_rate_hz < target_rate_hz;
    d.state_row = (congested ? 5 : 1) + (rate_below ? 2 : 0) + (aware ? 1 : 0);

    bool apply;
    bool not_increase = candidate_power_dbm <= prev_power_dbm;
    bool awareness_wins = d.delta_awareness >= p.gamma * d.delta_rate;
    if (!congested) {
        if (d.state_row == 4 && p.mode == CombinerMode::table2) {
            apply = not_increase;
        } else {
            apply = true;
        }
    } else if (p.mode == CombinerMode::table2 && aware) {
        apply = not_increase;  // rows 6, 8
    } else {
        apply = not_increase || awareness_wins;  // rows 5, 7
    }

    d.power_applied = apply;
    double chosen = apply ? candidate_power_dbm : prev_power_dbm;
    d.next_power_dbm = clamp(chosen, p.power_bounds.min_dbm, p.power_bounds.max_dbm);
    return d;
}

}  // namespace ecpr
