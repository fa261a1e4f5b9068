#include "ecpr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ecpr {

using nlohmann::json;

const char* to_string(TestProfile p) {
    switch (p) {
        case TestProfile::test1: return "Test1";
        case TestProfile::test2: return "Test2";
        case TestProfile::test3: return "Test3";
        case TestProfile::test4: return "Test4";
        case TestProfile::custom: return "Custom";
    }
    return "?";
}

const char* to_string(RateMode m) {
    return m == RateMode::paper_literal ? "paper_literal" : "classic_rg";
}

const char* to_string(Eq3Floor f) {
    return f == Eq3Floor::mean_rx ? "mean_rx" : "sensitivity";
}

const char* to_string(CombinerMode m) {
    return m == CombinerMode::table2 ? "table2" : "algorithm1";
}

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::ecpr: return "ecpr";
        case Algorithm::rate_only: return "rate_only";
        case Algorithm::power_only: return "power_only";
        case Algorithm::none: return "none";
    }
    return "?";
}

const char* to_string(MobilityKind k) {
    switch (k) {
        case MobilityKind::urban_grid: return "urban_grid";
        case MobilityKind::highway_strip: return "highway_strip";
        case MobilityKind::trace: return "trace";
    }
    return "?";
}

namespace {

template <typename T>
T parse_enum(const std::string& v, std::initializer_list<std::pair<const char*, T>> table,
             const char* what) {
    for (const auto& [name, val] : table) {
        if (v == name) return val;
    }
    throw config_error(std::string("invalid ") + what + ": '" + v + "'");
}

TestProfile profile_from_string(const std::string& v) {
    return parse_enum<TestProfile>(v,
                                   {{"Test1", TestProfile::test1},
                                    {"Test2", TestProfile::test2},
                                    {"Test3", TestProfile::test3},
                                    {"Test4", TestProfile::test4},
                                    {"Custom", TestProfile::custom}},
                                   "test_profile");
}

RateMode rate_mode_from_string(const std::string& v) {
    return parse_enum<RateMode>(v,
                                {{"paper_literal", RateMode::paper_literal},
                                 {"classic_rg", RateMode::classic_rg}},
                                "limeric_mode");
}

Eq3Floor eq3_floor_from_string(const std::string& v) {
    return parse_enum<Eq3Floor>(
        v, {{"mean_rx", Eq3Floor::mean_rx}, {"sensitivity", Eq3Floor::sensitivity}},
        "eq3_floor");
}

CombinerMode combiner_from_string(const std::string& v) {
    return parse_enum<CombinerMode>(
        v, {{"table2", CombinerMode::table2}, {"algorithm1", CombinerMode::algorithm1}},
        "combiner_mode");
}

MobilityKind mobility_from_string(const std::string& v) {
    return parse_enum<MobilityKind>(v,
                                    {{"urban_grid", MobilityKind::urban_grid},
                                     {"highway_strip", MobilityKind::highway_strip},
                                     {"trace", MobilityKind::trace}},
                                    "scenario.mobility");
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const char* scope) {
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) {
            throw config_error(std::string("unknown config key in ") + scope + ": '" +
                               item.key() + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw config_error(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

void read_pair(const json& j, const char* key, double& lo, double& hi) {
    if (auto it = j.find(key); it != j.end()) {
        if (!it->is_array() || it->size() != 2) {
            throw config_error(std::string("'") + key + "' must be a [min, max] array");
        }
        lo = (*it)[0].get<double>();
        hi = (*it)[1].get<double>();
    }
}

}  // namespace

Algorithm algorithm_from_string_impl(const std::string& v) {
    return parse_enum<Algorithm>(v,
                                 {{"ecpr", Algorithm::ecpr},
                                  {"rate_only", Algorithm::rate_only},
                                  {"power_only", Algorithm::power_only},
                                  {"none", Algorithm::none}},
                                 "algorithm");
}

void PropagationParams::validate() const {
    if (ple_los <= 1.0 || ple_nlos_vehicle <= 1.0 || ple_nlos_building <= 1.0) {
        throw config_error("propagation: all path-loss exponents must exceed 1");
    }
    if (sigma_los_db < 0.0 || sigma_nlos_vehicle_db < 0.0 || sigma_nlos_building_db < 0.0) {
        throw config_error("propagation: fading sigmas must be nonnegative");
    }
}

void ScenarioConfig::validate() const {
    if (vehicle_count <= 0) throw config_error("scenario.vehicle_count must be positive");
    if (duration_s <= 0.0) throw config_error("scenario.duration must be positive");
    if (area_m[0] <= 0.0 || area_m[1] <= 0.0) throw config_error("scenario.area must be positive");
    if (mobility == MobilityKind::urban_grid) {
        if (street_spacing_m <= 0.0 || street_width_m <= 0.0 ||
            street_width_m >= street_spacing_m) {
            throw config_error("scenario: need 0 < street_width < street_spacing");
        }
    }
    if (mobility == MobilityKind::highway_strip && lanes <= 0) {
        throw config_error("scenario.lanes must be positive");
    }
    if (mobility == MobilityKind::trace && trace_path.empty()) {
        throw config_error("scenario.trace_path required for trace mobility");
    }
}

int SimConfig::steps_per_second() const {
    double n = 1.0 / control_step;
    int r = static_cast<int>(std::lround(n));
    if (r < 1 || std::fabs(r * control_step - 1.0) > 1e-9) {
        throw config_error("control_step must evenly divide 1 second");
    }
    return r;
}

void SimConfig::validate() const {
    if (control_step <= 0.0) throw config_error("control_step must be positive");
    (void)steps_per_second();
    if (cbr_threshold <= 0.0 || cbr_threshold >= 1.0) {
        throw config_error("cbr_threshold must be in (0, 1)");
    }
    if (cbr_tolerance < 0.0) throw config_error("cbr_tolerance must be nonnegative");
    if (power_bounds.min_dbm > power_bounds.max_dbm) {
        throw config_error("power_bounds: min exceeds max");
    }
    if (default_tx_power < power_bounds.min_dbm || default_tx_power > power_bounds.max_dbm) {
        throw config_error("default_tx_power outside power_bounds");
    }
    if (rate_bounds.min_hz > rate_bounds.max_hz || rate_bounds.min_hz <= 0.0) {
        throw config_error("rate_bounds invalid");
    }
    if (msg_length <= 0) throw config_error("msg_length must be positive");
    if (data_rate <= 0.0) throw config_error("data_rate must be positive");
    if (carrier_frequency <= 0.0) throw config_error("carrier_frequency must be positive");
    if (vehicle_radius < 0.0) throw config_error("vehicle_radius must be nonnegative");
    if (awareness_target <= 0.0 || awareness_target > 1.0) {
        throw config_error("awareness_target must be in (0, 1]");
    }
    if (enar_error_bound < 0.0 || enar_error_bound >= 1.0) {
        throw config_error("enar_error_bound must be in [0, 1)");
    }
    if (limeric_a < 0.0 || limeric_a >= 1.0) throw config_error("limeric_a must be in [0, 1)");
    if (limeric_b <= 0.0) throw config_error("limeric_b must be positive");
    if (limeric_x <= 0.0) throw config_error("limeric_x must be positive");
    if (limeric_gain <= 0.0) throw config_error("limeric_gain must be positive");
    if (gamma <= 0.0) throw config_error("gamma must be positive");
    if (threads < 1) throw config_error("threads must be at least 1");
    if (custom_target_range <= 0.0) throw config_error("custom_target_range must be positive");
    if (custom_target_rate <= 0.0) throw config_error("custom_target_rate must be positive");
    propagation.validate();
    scenario.validate();
}

SimConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config root must be a JSON object");

    static const std::set<std::string> known = {
        "control_step", "cbr_threshold", "cbr_tolerance", "default_tx_power",
        "power_bounds", "rate_bounds", "carrier_sense_threshold", "rx_sensitivity",
        "data_rate", "msg_length", "limeric_a", "limeric_b", "limeric_x",
        "limeric_gain", "limeric_mode", "gamma", "enar_error_bound",
        "awareness_target", "rng_seed", "test_profile", "custom_target_range",
        "custom_target_rate", "integer_rates", "carrier_frequency", "vehicle_radius",
        "collisions_enabled", "eq3_floor", "combiner_mode", "threads",
        "propagation", "scenario"};
    reject_unknown_keys(j, known, "root");

    SimConfig cfg;
    read(j, "control_step", cfg.control_step);
    read(j, "cbr_threshold", cfg.cbr_threshold);
    read(j, "cbr_tolerance", cfg.cbr_tolerance);
    read(j, "default_tx_power", cfg.default_tx_power);
    read_pair(j, "power_bounds", cfg.power_bounds.min_dbm, cfg.power_bounds.max_dbm);
    read_pair(j, "rate_bounds", cfg.rate_bounds.min_hz, cfg.rate_bounds.max_hz);
    read(j, "carrier_sense_threshold", cfg.carrier_sense_threshold);
    read(j, "rx_sensitivity", cfg.rx_sensitivity);
    read(j, "data_rate", cfg.data_rate);
    read(j, "msg_length", cfg.msg_length);
    read(j, "limeric_a", cfg.limeric_a);
    read(j, "limeric_b", cfg.limeric_b);
    read(j, "limeric_x", cfg.limeric_x);
    read(j, "limeric_gain", cfg.limeric_gain);
    if (j.contains("limeric_mode")) {
        cfg.limeric_mode = rate_mode_from_string(j["limeric_mode"].get<std::string>());
    }
    read(j, "gamma", cfg.gamma);
    read(j, "enar_error_bound", cfg.enar_error_bound);
    read(j, "awareness_target", cfg.awareness_target);
    read(j, "rng_seed", cfg.rng_seed);
    if (j.contains("test_profile")) {
        cfg.test_profile = profile_from_string(j["test_profile"].get<std::string>());
    }
    read(j, "custom_target_range", cfg.custom_target_range);
    read(j, "custom_target_rate", cfg.custom_target_rate);
    read(j, "integer_rates", cfg.integer_rates);
    read(j, "carrier_frequency", cfg.carrier_frequency);
    read(j, "vehicle_radius", cfg.vehicle_radius);
    read(j, "collisions_enabled", cfg.collisions_enabled);
    if (j.contains("eq3_floor")) {
        cfg.eq3_floor = eq3_floor_from_string(j["eq3_floor"].get<std::string>());
    }
    if (j.contains("combiner_mode")) {
        cfg.combiner_mode = combiner_from_string(j["combiner_mode"].get<std::string>());
    }
    read(j, "threads", cfg.threads);

    if (j.contains("propagation")) {
        const json& p = j["propagation"];
        if (!p.is_object()) throw config_error("'propagation' must be an object");
        static const std::set<std::string> pk = {"ple_los", "ple_nlos_vehicle",
                                                 "ple_nlos_building", "sigma_los",
                                                 "sigma_nlos_vehicle", "sigma_nlos_building"};
        reject_unknown_keys(p, pk, "propagation");
        read(p, "ple_los", cfg.propagation.ple_los);
        read(p, "ple_nlos_vehicle", cfg.propagation.ple_nlos_vehicle);
        read(p, "ple_nlos_building", cfg.propagation.ple_nlos_building);
        read(p, "sigma_los", cfg.propagation.sigma_los_db);
        read(p, "sigma_nlos_vehicle", cfg.propagation.sigma_nlos_vehicle_db);
        read(p, "sigma_nlos_building", cfg.propagation.sigma_nlos_building_db);
    }

    if (j.contains("scenario")) {
        const json& s = j["scenario"];
        if (!s.is_object()) throw config_error("'scenario' must be an object");
        static const std::set<std::string> sk = {
            "mobility", "vehicle_count", "duration", "area", "street_spacing",
            "street_width", "lanes", "trace_path", "buildings_path",
            "buildings_lonlat", "lonlat_origin", "algorithm"};
        reject_unknown_keys(s, sk, "scenario");
        if (s.contains("mobility")) {
            cfg.scenario.mobility = mobility_from_string(s["mobility"].get<std::string>());
        }
        read(s, "vehicle_count", cfg.scenario.vehicle_count);
        read(s, "duration", cfg.scenario.duration_s);
        if (s.contains("area")) {
            read_pair(s, "area", cfg.scenario.area_m[0], cfg.scenario.area_m[1]);
        }
        read(s, "street_spacing", cfg.scenario.street_spacing_m);
        read(s, "street_width", cfg.scenario.street_width_m);
        read(s, "lanes", cfg.scenario.lanes);
        read(s, "trace_path", cfg.scenario.trace_path);
        read(s, "buildings_path", cfg.scenario.buildings_path);
        read(s, "buildings_lonlat", cfg.scenario.buildings_lonlat);
        if (s.contains("lonlat_origin")) {
            read_pair(s, "lonlat_origin", cfg.scenario.lonlat_origin[0],
                      cfg.scenario.lonlat_origin[1]);
        }
        if (s.contains("algorithm")) {
            cfg.scenario.algorithm =
                algorithm_from_string_impl(s["algorithm"].get<std::string>());
        }
    }

    cfg.validate();
    return cfg;
}

std::string config_to_json_text(const SimConfig& cfg) {
    json j;
    j["control_step"] = cfg.control_step;
    j["cbr_threshold"] = cfg.cbr_threshold;
    j["cbr_tolerance"] = cfg.cbr_tolerance;
    j["default_tx_power"] = cfg.default_tx_power;
    j["power_bounds"] = {cfg.power_bounds.min_dbm, cfg.power_bounds.max_dbm};
    j["rate_bounds"] = {cfg.rate_bounds.min_hz, cfg.rate_bounds.max_hz};
    j["carrier_sense_threshold"] = cfg.carrier_sense_threshold;
    j["rx_sensitivity"] = cfg.rx_sensitivity;
    j["data_rate"] = cfg.data_rate;
    j["msg_length"] = cfg.msg_length;
    j["limeric_a"] = cfg.limeric_a;
    j["limeric_b"] = cfg.limeric_b;
    j["limeric_x"] = cfg.limeric_x;
    j["limeric_gain"] = cfg.limeric_gain;
    j["limeric_mode"] = to_string(cfg.limeric_mode);
    j["gamma"] = cfg.gamma;
    j["enar_error_bound"] = cfg.enar_error_bound;
    j["awareness_target"] = cfg.awareness_target;
    j["rng_seed"] = cfg.rng_seed;
    j["test_profile"] = to_string(cfg.test_profile);
    j["custom_target_range"] = cfg.custom_target_range;
    j["custom_target_rate"] = cfg.custom_target_rate;
    j["integer_rates"] = cfg.integer_rates;
    j["carrier_frequency"] = cfg.carrier_frequency;
    j["vehicle_radius"] = cfg.vehicle_radius;
    j["collisions_enabled"] = cfg.collisions_enabled;
    j["eq3_floor"] = to_string(cfg.eq3_floor);
    j["combiner_mode"] = to_string(cfg.combiner_mode);
    j["threads"] = cfg.threads;
    j["propagation"] = {{"ple_los", cfg.propagation.ple_los},
                        {"ple_nlos_vehicle", cfg.propagation.ple_nlos_vehicle},
                        {"ple_nlos_building", cfg.propagation.ple_nlos_building},
                        {"sigma_los", cfg.propagation.sigma_los_db},
                        {"sigma_nlos_vehicle", cfg.propagation.sigma_nlos_vehicle_db},
                        {"sigma_nlos_building", cfg.propagation.sigma_nlos_building_db}};
    json s;
    s["mobility"] = to_string(cfg.scenario.mobility);
    s["vehicle_count"] = cfg.scenario.vehicle_count;
    s["duration"] = cfg.scenario.duration_s;
    s["area"] = {cfg.scenario.area_m[0], cfg.scenario.area_m[1]};
    s["street_spacing"] = cfg.scenario.street_spacing_m;
    s["street_width"] = cfg.scenario.street_width_m;
    s["lanes"] = cfg.scenario.lanes;
    s["trace_path"] = cfg.scenario.trace_path;
    s["buildings_path"] = cfg.scenario.buildings_path;
    s["buildings_lonlat"] = cfg.scenario.buildings_lonlat;
    s["lonlat_origin"] = {cfg.scenario.lonlat_origin[0], cfg.scenario.lonlat_origin[1]};
    s["algorithm"] = to_string(cfg.scenario.algorithm);
    j["scenario"] = s;
    return j.dump(2) + "\n";
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

Algorithm algorithm_from_string(const std::string& v) { return algorithm_from_string_impl(v); }

}  // namespace ecpr
