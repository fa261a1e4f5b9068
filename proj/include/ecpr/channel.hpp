#pragma once

#include <span>
#include <vector>

#include "ecpr/config.hpp"
#include "ecpr/propagation.hpp"
#include "ecpr/types.hpp"

namespace ecpr {

enum class DropCause { none, below_sensitivity, mac_collision };

inline const char* to_string(DropCause c) {
    switch (c) {
        case DropCause::none: return "none";
        case DropCause::below_sensitivity: return "below_sensitivity";
        case DropCause::mac_collision: return "mac_collision";
    }
    return "?";
}

struct ReceptionEvent {
    int sender = -1;
    int receiver = -1;
    int msg_index = 0;
    double rx_power_dbm = 0.0;
    bool received = false;
    DropCause drop_cause = DropCause::none;
};

struct CbrMeasurement {
    double window_bytes = 0.0;
    double capacity_bytes = 0.0;
    double cbr = 0.0;  // min(1, window_bytes / capacity)
};

// Byte-counting channel load over one measurement window. Only messages
// sensed at or above the carrier-sense threshold count; callers include the
// receiver's own transmissions in the observation list.
CbrMeasurement measure_cbr(std::span<const NeighborObservation> observed, const SimConfig& cfg);

CbrMeasurement cbr_from_bytes(double window_bytes, double capacity_bytes);

// Piecewise collision-loss probability binned by channel load. Throws
// domain_error outside [0, 1].
double mac_drop_probability(double cbr);

// Per-message reception decision. The collision coin uses the receiver's
// previous-step CBR; `coin` is a uniform [0,1) draw from the per-message
// seeded stream.
ReceptionEvent decide_reception(const LinkBudget& budget, int sender, int receiver,
                                int msg_index, double receiver_prev_cbr,
                                bool collisions_enabled, double rx_sensitivity_dbm,
                                double coin);

// Fraction of unordered neighbor pairs that cannot hear each other.
// `audible(i, j)` is a row-major boolean matrix over the neighbor list; a
// pair counts as hidden unless both directions are audible. Fewer than two
// neighbors yields 0.
double hidden_node_ratio(std::span<const bool> audibility_matrix, int neighbor_count);
double hidden_node_ratio(std::span<const char> audibility_matrix, int neighbor_count);

}  // namespace ecpr
