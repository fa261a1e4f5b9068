#include "ecpr/context.hpp"

#include "ecpr/rng.hpp"

namespace ecpr {

namespace {

constexpr double kRangeChoices[] = {30.0, 60.0, 90.0, 120.0, 150.0, 180.0};

double draw_rate(RngStream& rng, bool integer_rates) {
    if (integer_rates) {
        return 5.0 + static_cast<double>(rng.next_index(6));  // {5,...,10}
    }
    return rng.next_uniform(5.0, 10.0);
}

double draw_range(RngStream& rng) {
    return kRangeChoices[rng.next_index(6)];
}

}  // namespace

std::vector<ContextAssignment> assign_context_profile(TestProfile profile, int vehicle_count,
                                                      std::uint64_t seed, bool integer_rates,
                                                      double custom_range_m,
                                                      double custom_rate_hz) {
    if (vehicle_count <= 0) throw config_error("vehicle_count must be positive");

    std::vector<ContextAssignment> out;
    out.reserve(static_cast<std::size_t>(vehicle_count));
    for (int v = 0; v < vehicle_count; ++v) {
        RngStream rng(derive_seed(seed, StreamId::context, static_cast<std::uint64_t>(v)));
        ContextAssignment a{90.0, 10.0};
        switch (profile) {
            case TestProfile::test1:
                break;
            case TestProfile::test2:
                a.target_rate_hz = draw_rate(rng, integer_rates);
                break;
            case TestProfile::test3:
                a.target_range_m = draw_range(rng);
                break;
            case TestProfile::test4:
                a.target_range_m = draw_range(rng);
                a.target_rate_hz = draw_rate(rng, integer_rates);
                break;
            case TestProfile::custom:
                a.target_range_m = custom_range_m;
                a.target_rate_hz = custom_rate_hz;
                break;
        }
        out.push_back(a);
    }
    return out;
}

}  // namespace ecpr
