#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "ecpr/types.hpp"

namespace ecpr {

enum class TestProfile { test1, test2, test3, test4, custom };
enum class RateMode { paper_literal, classic_rg };
enum class Eq3Floor { mean_rx, sensitivity };
// Power-gate behavior of the combined controller when CBR is below the
// threshold while awareness is satisfied and the rate is below target:
// `table2` only lets the power decrease, `algorithm1` always applies the
// candidate. The two published descriptions of the controller disagree on
// this one state; both are supported.
enum class CombinerMode { table2, algorithm1 };

enum class Algorithm { ecpr, rate_only, power_only, none };
enum class MobilityKind { urban_grid, highway_strip, trace };

const char* to_string(TestProfile p);
const char* to_string(RateMode m);
const char* to_string(Eq3Floor f);
const char* to_string(CombinerMode m);
const char* to_string(Algorithm a);
const char* to_string(MobilityKind k);
Algorithm algorithm_from_string(const std::string& v);

struct PropagationParams {
    // Path-loss exponents and fading sigmas per link class. The defaults are
    // generic urban-canyon placeholders, not calibrated measurements; any
    // serious study should override them from the config file.
    double ple_los = 2.0;
    double ple_nlos_vehicle = 2.5;
    double ple_nlos_building = 2.9;
    double sigma_los_db = 2.0;
    double sigma_nlos_vehicle_db = 3.0;
    double sigma_nlos_building_db = 4.0;

    double ple(LinkClass c) const {
        switch (c) {
            case LinkClass::los: return ple_los;
            case LinkClass::nlos_vehicle: return ple_nlos_vehicle;
            case LinkClass::nlos_building: return ple_nlos_building;
        }
        return ple_los;
    }
    double sigma_db(LinkClass c) const {
        switch (c) {
            case LinkClass::los: return sigma_los_db;
            case LinkClass::nlos_vehicle: return sigma_nlos_vehicle_db;
            case LinkClass::nlos_building: return sigma_nlos_building_db;
        }
        return sigma_los_db;
    }
    void validate() const;
};

struct ScenarioConfig {
    MobilityKind mobility = MobilityKind::urban_grid;
    int vehicle_count = 100;
    double duration_s = 30.0;
    std::array<double, 2> area_m = {300.0, 300.0};
    double street_spacing_m = 75.0;
    double street_width_m = 12.0;
    int lanes = 4;  // highway_strip only
    std::string trace_path;
    std::string buildings_path;
    bool buildings_lonlat = false;
    std::array<double, 2> lonlat_origin = {0.0, 0.0};
    Algorithm algorithm = Algorithm::ecpr;
    void validate() const;
};

struct SimConfig {
    double control_step = 0.2;        // s
    double cbr_threshold = 0.6;
    double cbr_tolerance = 0.05;
    double default_tx_power = 23.0;   // dBm
    PowerBounds power_bounds;         // [0, 23] dBm
    RateBounds rate_bounds;           // [1, 10] Hz
    double carrier_sense_threshold = -90.0;  // dBm
    double rx_sensitivity = -90.0;           // dBm
    double data_rate = 6.0e6;         // bit/s
    int msg_length = 300;             // bytes
    double limeric_a = 0.1;
    double limeric_b = 1.0 / 150.0;
    double limeric_x = 0.5;           // Hz cap per step
    double limeric_gain = 1.0;
    RateMode limeric_mode = RateMode::paper_literal;
    double gamma = 1.0;
    double enar_error_bound = 0.10;
    double awareness_target = 0.85;
    std::uint64_t rng_seed = 1;
    TestProfile test_profile = TestProfile::test1;
    double custom_target_range = 90.0;  // m, used when test_profile = Custom
    double custom_target_rate = 10.0;   // Hz, used when test_profile = Custom
    bool integer_rates = false;         // Test2/Test4: draw integer rates
    double carrier_frequency = 5.9e9;   // Hz
    double vehicle_radius = 2.5;        // m, obstruction disc
    bool collisions_enabled = false;
    Eq3Floor eq3_floor = Eq3Floor::mean_rx;
    CombinerMode combiner_mode = CombinerMode::table2;
    int threads = 1;
    PropagationParams propagation;
    ScenarioConfig scenario;

    double wavelength_m() const { return 299792458.0 / carrier_frequency; }
    // Channel capacity per measurement window, in bytes.
    double capacity_bytes() const { return data_rate * control_step / 8.0; }
    int steps_per_second() const;

    void validate() const;
};

// JSON round trip. Keys mirror the field names; unknown keys are a hard
// error so typos cannot silently fall back to defaults.
SimConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const SimConfig& cfg);
SimConfig load_config_file(const std::string& path);

}  // namespace ecpr
