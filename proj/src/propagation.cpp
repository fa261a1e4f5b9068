#include "ecpr/propagation.hpp"

#include <algorithm>
#include <cmath>

#include "ecpr/rng.hpp"

namespace ecpr {

double reference_loss_db(double distance_m, double wavelength_m) {
    if (distance_m <= 0.0) throw domain_error("reference_loss: distance must be positive");
    if (wavelength_m <= 0.0) throw domain_error("reference_loss: wavelength must be positive");
    return 10.0 * std::log10(4.0 * M_PI * distance_m / wavelength_m);
}

LinkBudget compute_link(double tx_power_dbm, double distance_m, LinkClass cls,
                        const PropagationParams& params, double wavelength_m,
                        double fading_db) {
    LinkBudget b;
    b.link_class = cls;
    b.pathloss_db = params.ple(cls) * reference_loss_db(distance_m, wavelength_m);
    b.fading_db = fading_db;
    b.rx_power_dbm = tx_power_dbm - b.pathloss_db + b.fading_db;
    return b;
}

double pair_fading_db(std::uint64_t seed, int vehicle_a, int vehicle_b, std::int64_t step,
                      double sigma_db) {
    if (sigma_db == 0.0) return 0.0;
    auto lo = static_cast<std::uint64_t>(std::min(vehicle_a, vehicle_b));
    auto hi = static_cast<std::uint64_t>(std::max(vehicle_a, vehicle_b));
    RngStream rng(derive_seed(seed, StreamId::fading, lo, hi, static_cast<std::uint64_t>(step)));
    return rng.next_normal(sigma_db);
}

}  // namespace ecpr
