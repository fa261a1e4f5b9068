#pragma once

#include <cstdint>

#include "ecpr/config.hpp"
#include "ecpr/types.hpp"

namespace ecpr {

struct LinkBudget {
    LinkClass link_class = LinkClass::los;
    double pathloss_db = 0.0;
    double fading_db = 0.0;
    double rx_power_dbm = 0.0;
};

// Reference loss 10*log10(4*pi*d/lambda) in dB; the class path-loss exponent
// multiplies this. Throws domain_error for d <= 0.
double reference_loss_db(double distance_m, double wavelength_m);

// Link budget for one (pair, step): deterministic class loss plus one seeded
// fading draw. rx = tx - pathloss + fading, exactly.
LinkBudget compute_link(double tx_power_dbm, double distance_m, LinkClass cls,
                        const PropagationParams& params, double wavelength_m,
                        double fading_db);

// Fading for an unordered vehicle pair at one step. Keyed on
// (seed, min id, max id, step) so the draw is symmetric: the channel is
// exactly reciprocal in-simulator.
double pair_fading_db(std::uint64_t seed, int vehicle_a, int vehicle_b, std::int64_t step,
                      double sigma_db);

}  // namespace ecpr
