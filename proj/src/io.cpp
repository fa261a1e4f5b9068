#include "ecpr/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "ecpr/mobility.hpp"

namespace ecpr {

const char* const kVersion = "0.1.0";

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void append_number(std::string& out, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    out.append(buf, p);
}

std::string format_number(double v) {
    std::string s;
    append_number(s, v);
    return s;
}

std::string Manifest::header_line() const {
    std::string s = "# manifest config_hash=";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), config_hash, 16);
    s.append(buf, p);
    s += " seed=" + std::to_string(seed);
    s += " scenario=" + scenario_id;
    s += " algorithm=" + algorithm;
    s += " version=" + version;
    return s;
}

Manifest make_manifest(const SimConfig& cfg) {
    Manifest m;
    m.config_hash = fnv1a64(config_to_json_text(cfg));
    m.seed = cfg.rng_seed;
    m.scenario_id = std::string(to_string(cfg.scenario.mobility)) + "-n" +
                    std::to_string(cfg.scenario.vehicle_count);
    m.algorithm = to_string(cfg.scenario.algorithm);
    m.version = kVersion;
    return m;
}

Vec2 lonlat_to_local(double lon, double lat, double origin_lon, double origin_lat) {
    constexpr double kEarthRadius = 6371000.0;
    constexpr double kDegToRad = M_PI / 180.0;
    double x = kEarthRadius * std::cos(origin_lat * kDegToRad) * (lon - origin_lon) * kDegToRad;
    double y = kEarthRadius * (lat - origin_lat) * kDegToRad;
    return {x, y};
}

namespace {

bool polygon_is_simple(const Polygon& poly) {
    std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a1 = poly.vertices[i];
        Vec2 a2 = poly.vertices[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip adjacent edges (they share a vertex).
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            Vec2 b1 = poly.vertices[j];
            Vec2 b2 = poly.vertices[(j + 1) % n];
            if (segments_intersect(a1, a2, b1, b2)) return false;
        }
    }
    return true;
}

}  // namespace

BuildingSet parse_buildings(const std::string& text, int* skipped_out, bool lonlat,
                            double origin_lon, double origin_lat) {
    std::vector<Polygon> polys;
    int skipped = 0;
    bool any_content = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        any_content = true;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_array()) {
            ++skipped;
            continue;
        }
        Polygon poly;
        bool ok = true;
        for (const auto& v : j) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
                ok = false;
                break;
            }
            Vec2 p{v[0].get<double>(), v[1].get<double>()};
            if (lonlat) p = lonlat_to_local(p.x, p.y, origin_lon, origin_lat);
            poly.vertices.push_back(p);
        }
        // Explicitly closed rings repeat the first vertex; drop the
        // duplicate. Open rings close implicitly.
        if (ok && poly.vertices.size() >= 2 &&
            distance(poly.vertices.front(), poly.vertices.back()) < 1e-6) {
            poly.vertices.pop_back();
        }
        if (!ok || poly.vertices.size() < 3 || !polygon_is_simple(poly)) {
            ++skipped;
            continue;
        }
        polys.push_back(std::move(poly));
    }
    if (skipped_out) *skipped_out = skipped;
    if (any_content && polys.empty()) {
        throw config_error("building file contains no valid polygon");
    }
    return BuildingSet(std::move(polys));
}

BuildingSet ingest_buildings(const std::string& path, int* skipped_out, bool lonlat,
                             double origin_lon, double origin_lat) {
    return parse_buildings(read_text_file(path), skipped_out, lonlat, origin_lon, origin_lat);
}

std::unique_ptr<MobilityModel> build_mobility(const SimConfig& cfg) {
    const ScenarioConfig& s = cfg.scenario;
    if (s.mobility != MobilityKind::trace) {
        // Synthetic models generate their own geometry.
        return make_mobility(cfg);
    }
    BuildingSet buildings;
    if (!s.buildings_path.empty()) {
        buildings = ingest_buildings(s.buildings_path, nullptr, s.buildings_lonlat,
                                     s.lonlat_origin[0], s.lonlat_origin[1]);
    }
    std::vector<TraceRow> rows = load_trace_file(s.trace_path);
    return make_trace_playback(std::move(rows), std::move(buildings), cfg.control_step,
                               s.duration_s);
}

namespace {

const char* kMetricsHeader =
    "second,algorithm,mean_nar,mean_rnar,mean_rate_hz,mean_power_dbm,cbr_mean,cbr_std,"
    "hidden_node_ratio";

void append_metrics_row(std::string& out, const std::string& algorithm,
                        const StepMetrics& m) {
    out += std::to_string(m.second);
    out += ',';
    out += algorithm;
    for (double v : {m.mean_nar, m.mean_rnar, m.mean_rate_hz, m.mean_power_dbm, m.cbr_mean,
                     m.cbr_std, m.hidden_node_ratio}) {
        out += ',';
        append_number(out, v);
    }
    out += '\n';
}

int steady_skip_seconds(const SimConfig& cfg) {
    int total = static_cast<int>(cfg.scenario.duration_s);
    return total > 20 ? 10 : total / 2;
}

}  // namespace

std::string metrics_to_csv(const Manifest& manifest, const std::string& algorithm,
                           const std::vector<StepMetrics>& seconds) {
    std::string out = manifest.header_line() + "\n";
    out += kMetricsHeader;
    out += '\n';
    for (const StepMetrics& m : seconds) append_metrics_row(out, algorithm, m);
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot write file: " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot open file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunOutputs run_to_files(const SimConfig& cfg, const std::string& out_dir, bool events) {
    cfg.validate();
    fs::create_directories(out_dir);
    Manifest manifest = make_manifest(cfg);

    std::string events_csv;
    std::string decisions_csv;
    std::string positions_csv;
    if (events) {
        events_csv = manifest.header_line() + "\nstep,sender,receiver,rx_power_dbm,received,drop_cause\n";
        decisions_csv = manifest.header_line() +
                        "\nstep,vehicle,power_dbm,rate_hz,cbr,enar,delta_a,delta_r,table2_row\n";
        positions_csv = "time_s,vehicle_id,x_m,y_m,speed_mps,heading_rad\n";
    }

    RunObserver obs;
    if (events) {
        obs.on_event = [&](const ReceptionLogRow& r) {
            events_csv += std::to_string(r.step);
            events_csv += ',';
            events_csv += std::to_string(r.sender);
            events_csv += ',';
            events_csv += std::to_string(r.receiver);
            events_csv += ',';
            append_number(events_csv, r.rx_power_dbm);
            events_csv += ',';
            events_csv += r.received ? '1' : '0';
            events_csv += ',';
            events_csv += to_string(r.drop_cause);
            events_csv += '\n';
        };
        obs.on_decision = [&](const DecisionLogRow& r) {
            decisions_csv += std::to_string(r.step);
            decisions_csv += ',';
            decisions_csv += std::to_string(r.vehicle);
            for (double v : {r.power_dbm, r.rate_hz, r.cbr, r.enar, r.delta_a, r.delta_r}) {
                decisions_csv += ',';
                append_number(decisions_csv, v);
            }
            decisions_csv += ',';
            decisions_csv += std::to_string(r.table2_row);
            decisions_csv += '\n';
        };
        obs.on_positions = [&](std::int64_t step, std::span<const VehiclePose> poses) {
            double t = static_cast<double>(step) * cfg.control_step;
            for (const VehiclePose& p : poses) {
                append_number(positions_csv, t);
                positions_csv += ',';
                positions_csv += std::to_string(p.id);
                for (double v : {p.pos.x, p.pos.y, p.speed_mps, p.heading_rad}) {
                    positions_csv += ',';
                    append_number(positions_csv, v);
                }
                positions_csv += '\n';
            }
        };
    }

    auto mobility = build_mobility(cfg);
    RunSummary summary = run_scenario(cfg, *mobility, &obs);

    RunOutputs out;
    out.summary = std::move(summary);
    out.metrics_csv = (fs::path(out_dir) / "metrics.csv").string();
    write_text_file(out.metrics_csv,
                    metrics_to_csv(manifest, to_string(cfg.scenario.algorithm),
                                   out.summary.seconds));

    json mj;
    mj["config_hash"] = manifest.config_hash;
    mj["seed"] = manifest.seed;
    mj["scenario"] = manifest.scenario_id;
    mj["algorithm"] = manifest.algorithm;
    mj["version"] = manifest.version;
    mj["config"] = json::parse(config_to_json_text(cfg));
    mj["outputs"] = {{"metrics", "metrics.csv"}};
    out.manifest_json = (fs::path(out_dir) / "manifest.json").string();

    if (events) {
        out.events_csv = (fs::path(out_dir) / "events.csv").string();
        out.decisions_csv = (fs::path(out_dir) / "decisions.csv").string();
        out.positions_csv = (fs::path(out_dir) / "positions.csv").string();
        write_text_file(out.events_csv, events_csv);
        write_text_file(out.decisions_csv, decisions_csv);
        write_text_file(out.positions_csv, positions_csv);
        mj["outputs"]["events"] = "events.csv";
        mj["outputs"]["decisions"] = "decisions.csv";
        mj["outputs"]["positions"] = "positions.csv";
    }
    write_text_file(out.manifest_json, mj.dump(2) + "\n");
    return out;
}

std::vector<AlgorithmSummary> compare_algorithms(const SimConfig& cfg,
                                                 const std::vector<Algorithm>& algorithms,
                                                 bool parallel) {
    if (algorithms.size() < 2) {
        throw config_error("compare needs at least two algorithms");
    }
    std::vector<AlgorithmSummary> out(algorithms.size());
    int skip = steady_skip_seconds(cfg);
    auto run_one = [&](std::size_t i) {
        SimConfig c = cfg;
        c.scenario.algorithm = algorithms[i];
        AlgorithmSummary& s = out[i];
        s.algorithm = algorithms[i];
        s.run = run_scenario(c);
        s.mean_nar = s.run.steady_mean(&StepMetrics::mean_nar, skip);
        s.mean_rnar = s.run.steady_mean(&StepMetrics::mean_rnar, skip);
        s.mean_rate_hz = s.run.steady_mean(&StepMetrics::mean_rate_hz, skip);
        s.mean_power_dbm = s.run.steady_mean(&StepMetrics::mean_power_dbm, skip);
        s.mean_cbr = s.run.steady_mean(&StepMetrics::cbr_mean, skip);
        s.hidden_node_ratio = s.run.steady_mean(&StepMetrics::hidden_node_ratio, skip);
    };
    if (parallel) {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < algorithms.size(); ++i) pool.emplace_back(run_one, i);
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t i = 0; i < algorithms.size(); ++i) run_one(i);
    }
    return out;
}

void write_compare_files(const SimConfig& cfg,
                         const std::vector<AlgorithmSummary>& summaries,
                         const std::vector<std::vector<StepMetrics>>& per_algorithm_seconds,
                         const std::string& out_dir) {
    fs::create_directories(out_dir);
    Manifest manifest = make_manifest(cfg);
    std::string joined = manifest.header_line() + "\n";
    joined += kMetricsHeader;
    joined += '\n';
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        for (const StepMetrics& m : per_algorithm_seconds[i]) {
            append_metrics_row(joined, to_string(summaries[i].algorithm), m);
        }
    }
    write_text_file((fs::path(out_dir) / "compare.csv").string(), joined);

    std::string table = manifest.header_line() + "\n";
    table += "algorithm,mean_nar,mean_rnar,mean_rate_hz,mean_power_dbm,mean_cbr,hidden_node_ratio\n";
    for (const AlgorithmSummary& s : summaries) {
        table += to_string(s.algorithm);
        for (double v : {s.mean_nar, s.mean_rnar, s.mean_rate_hz, s.mean_power_dbm, s.mean_cbr,
                         s.hidden_node_ratio}) {
            table += ',';
            append_number(table, v);
        }
        table += '\n';
    }
    write_text_file((fs::path(out_dir) / "summary.csv").string(), table);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

std::vector<OfflineMetricsRow> recompute_metrics(const std::string& events_csv_path,
                                                 const std::string& positions_csv_path,
                                                 double range_m, double control_step) {
    std::string events_text = read_text_file(events_csv_path);
    std::string pos_text = read_text_file(positions_csv_path);

    int steps_per_second = static_cast<int>(std::lround(1.0 / control_step));
    if (steps_per_second < 1) throw config_error("recompute_metrics: bad control_step");

    // second -> receiver -> set of heard senders
    std::map<int, std::map<int, std::set<int>>> heard;
    {
        std::istringstream in(events_text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("step,", 0) == 0) continue;
            auto f = split_csv_line(line);
            if (f.size() != 6) throw config_error("events log: malformed row: " + line);
            if (f[4] != "1") continue;
            int second = static_cast<int>(std::stoll(f[0])) / steps_per_second;
            heard[second][std::stoi(f[2])].insert(std::stoi(f[1]));
        }
    }

    // second -> vehicle -> end-of-second position
    std::map<int, std::map<int, Vec2>> positions;
    {
        std::istringstream in(pos_text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("time_s", 0) == 0) continue;
            auto f = split_csv_line(line);
            if (f.size() != 6) throw config_error("positions log: malformed row: " + line);
            double t = std::stod(f[0]);
            int step = static_cast<int>(std::llround(t / control_step));
            int second = step / steps_per_second;
            // Later rows overwrite earlier ones within the second; the last
            // step's positions win, matching the in-run window convention.
            positions[second][std::stoi(f[1])] = {std::stod(f[2]), std::stod(f[3])};
        }
    }

    std::vector<OfflineMetricsRow> rows;
    for (const auto& [second, vehicles] : positions) {
        double nar_sum = 0.0, rnar_sum = 0.0;
        int n = 0;
        const auto heard_it = heard.find(second);
        for (const auto& [ego, pos] : vehicles) {
            int in_range = 0, detected = 0, heard_total = 0, above = 0;
            const std::set<int>* ego_heard = nullptr;
            if (heard_it != heard.end()) {
                auto it = heard_it->second.find(ego);
                if (it != heard_it->second.end()) ego_heard = &it->second;
            }
            for (const auto& [other, opos] : vehicles) {
                if (other == ego) continue;
                double d = distance(pos, opos);
                bool was_heard = ego_heard && ego_heard->count(other) > 0;
                if (d <= range_m) {
                    ++in_range;
                    if (was_heard) ++detected;
                }
                if (was_heard) {
                    ++heard_total;
                    if (d > range_m) ++above;
                }
            }
            nar_sum += in_range == 0 ? 1.0 : static_cast<double>(detected) / in_range;
            rnar_sum += heard_total == 0 ? 0.0 : static_cast<double>(above) / heard_total;
            ++n;
        }
        if (n > 0) rows.push_back({second, nar_sum / n, rnar_sum / n});
    }
    return rows;
}

}  // namespace ecpr
