#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ecpr {

// Units convention: powers in dBm, path loss in dB, distances in meters,
// rates in Hz, times in seconds, CBR dimensionless in [0, 1].

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct geometry_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LinkClass { los, nlos_building, nlos_vehicle };

inline const char* to_string(LinkClass c) {
    switch (c) {
        case LinkClass::los: return "LOS";
        case LinkClass::nlos_building: return "NLOSb";
        case LinkClass::nlos_vehicle: return "NLOSv";
    }
    return "?";
}

inline double clamp_cbr(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1.0) return 1.0;
    return v;
}

inline double clamp(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

// One received message's metadata as seen by a receiver; the raw material
// for PLE estimation and CBR measurement.
struct NeighborObservation {
    int sender_id = -1;
    int msg_index = 0;
    double tx_power_dbm = 0.0;
    double rx_power_dbm = 0.0;
    double distance_m = 0.0;
    double rx_time_s = 0.0;
    int msg_length_bytes = 0;

    // A physical link has nonnegative path loss and a positive separation.
    bool physically_valid() const {
        return distance_m > 0.0 && rx_power_dbm <= tx_power_dbm;
    }
};

struct PowerBounds {
    double min_dbm = 0.0;
    double max_dbm = 23.0;
};

struct RateBounds {
    double min_hz = 1.0;
    double max_hz = 10.0;
};

}  // namespace ecpr
