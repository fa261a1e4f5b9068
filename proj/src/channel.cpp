#include "ecpr/channel.hpp"

#include <cmath>

namespace ecpr {

CbrMeasurement cbr_from_bytes(double window_bytes, double capacity_bytes) {
    CbrMeasurement m;
    m.window_bytes = window_bytes;
    m.capacity_bytes = capacity_bytes;
    m.cbr = capacity_bytes > 0.0 ? std::min(1.0, window_bytes / capacity_bytes) : 1.0;
    return m;
}

CbrMeasurement measure_cbr(std::span<const NeighborObservation> observed, const SimConfig& cfg) {
    double bytes = 0.0;
    for (const NeighborObservation& o : observed) {
        if (o.rx_power_dbm >= cfg.carrier_sense_threshold) {
            bytes += static_cast<double>(o.msg_length_bytes);
        }
    }
    return cbr_from_bytes(bytes, cfg.capacity_bytes());
}

double mac_drop_probability(double cbr) {
    if (cbr < 0.0 || cbr > 1.0) throw domain_error("mac_drop_probability: cbr outside [0, 1]");
    if (cbr < 0.2) return 0.00;
    if (cbr < 0.3) return 0.01;
    if (cbr < 0.4) return 0.03;
    if (cbr < 0.5) return 0.07;
    if (cbr < 0.6) return 0.10;
    return 0.30;
}

ReceptionEvent decide_reception(const LinkBudget& budget, int sender, int receiver,
                                int msg_index, double receiver_prev_cbr,
                                bool collisions_enabled, double rx_sensitivity_dbm,
                                double coin) {
    ReceptionEvent ev;
    ev.sender = sender;
    ev.receiver = receiver;
    ev.msg_index = msg_index;
    ev.rx_power_dbm = budget.rx_power_dbm;
    if (budget.rx_power_dbm < rx_sensitivity_dbm) {
        ev.received = false;
        ev.drop_cause = DropCause::below_sensitivity;
        return ev;
    }
    if (collisions_enabled && coin < mac_drop_probability(receiver_prev_cbr)) {
        ev.received = false;
        ev.drop_cause = DropCause::mac_collision;
        return ev;
    }
    ev.received = true;
    ev.drop_cause = DropCause::none;
    return ev;
}

namespace {

template <typename T>
double hidden_node_ratio_impl(std::span<const T> audibility_matrix, int neighbor_count) {
    if (neighbor_count < 2) return 0.0;
    auto n = static_cast<std::size_t>(neighbor_count);
    if (audibility_matrix.size() != n * n) {
        throw domain_error("hidden_node_ratio: matrix size mismatch");
    }
    long hidden = 0;
    long pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            ++pairs;
            if (!audibility_matrix[i * n + j] || !audibility_matrix[j * n + i]) ++hidden;
        }
    }
    return static_cast<double>(hidden) / static_cast<double>(pairs);
}

}  // namespace

double hidden_node_ratio(std::span<const bool> audibility_matrix, int neighbor_count) {
    return hidden_node_ratio_impl(audibility_matrix, neighbor_count);
}

double hidden_node_ratio(std::span<const char> audibility_matrix, int neighbor_count) {
    return hidden_node_ratio_impl(audibility_matrix, neighbor_count);
}

}  // namespace ecpr
