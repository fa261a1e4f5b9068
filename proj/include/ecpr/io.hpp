#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecpr/config.hpp"
#include "ecpr/engine.hpp"
#include "ecpr/geometry.hpp"
#include "ecpr/metrics.hpp"

namespace ecpr {

extern const char* const kVersion;

// Reproducibility header embedded as the first line of every results file.
struct Manifest {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string scenario_id;
    std::string algorithm;
    std::string version;

    std::string header_line() const;
};

Manifest make_manifest(const SimConfig& cfg);
std::uint64_t fnv1a64(const std::string& data);

// Building outlines: one polygon per line, as a JSON array of [x, y] meter
// pairs. Malformed records are skipped and counted; a nonempty file with no
// valid polygon is an error. Optionally converts lon/lat vertices to local
// meters via an equirectangular projection about `origin`.
BuildingSet ingest_buildings(const std::string& path, int* skipped_out = nullptr,
                             bool lonlat = false, double origin_lon = 0.0,
                             double origin_lat = 0.0);
BuildingSet parse_buildings(const std::string& text, int* skipped_out = nullptr,
                            bool lonlat = false, double origin_lon = 0.0,
                            double origin_lat = 0.0);
Vec2 lonlat_to_local(double lon, double lat, double origin_lon, double origin_lat);

// Locale-independent shortest-round-trip float formatting used by all CSVs.
void append_number(std::string& out, double v);
std::string format_number(double v);

// Builds the mobility model for a config, loading trace and building files
// when the scenario asks for them.
std::unique_ptr<MobilityModel> build_mobility(const SimConfig& cfg);

struct RunOutputs {
    std::string metrics_csv;
    std::string manifest_json;
    std::string events_csv;     // empty unless events requested
    std::string positions_csv;  // empty unless events requested
    std::string decisions_csv;  // empty unless events requested
    RunSummary summary;
};

// Executes one scenario and writes metrics.csv, manifest.json and (with
// `events`) events.csv, positions.csv and decisions.csv under out_dir.
RunOutputs run_to_files(const SimConfig& cfg, const std::string& out_dir, bool events);

// In-memory variant used by tests and the Python module.
std::string metrics_to_csv(const Manifest& manifest, const std::string& algorithm,
                           const std::vector<StepMetrics>& seconds);

struct AlgorithmSummary {
    Algorithm algorithm = Algorithm::ecpr;
    double mean_nar = 0.0;
    double mean_rnar = 0.0;
    double mean_rate_hz = 0.0;
    double mean_power_dbm = 0.0;
    double mean_cbr = 0.0;
    double hidden_node_ratio = 0.0;
    RunSummary run;
};

// Runs every algorithm on the identical scenario and seed. Summaries are
// means over the steady-state window (after the first 10 simulated seconds,
// or the second half of shorter runs). With `parallel`, algorithms run on
// separate threads; outputs are identical either way.
std::vector<AlgorithmSummary> compare_algorithms(const SimConfig& cfg,
                                                 const std::vector<Algorithm>& algorithms,
                                                 bool parallel = false);

// Joined per-second CSV plus a summary table for a comparison run.
void write_compare_files(const SimConfig& cfg,
                         const std::vector<AlgorithmSummary>& summaries,
                         const std::vector<std::vector<StepMetrics>>& per_algorithm_seconds,
                         const std::string& out_dir);

struct OfflineMetricsRow {
    int second = 0;
    double mean_nar = 0.0;
    double mean_rnar = 0.0;
};

// Rebuilds NAR/RNAR from a saved event log and position dump; the in-run
// values are reproduced exactly when `range_m` matches the vehicles' target
// ranges.
std::vector<OfflineMetricsRow> recompute_metrics(const std::string& events_csv_path,
                                                 const std::string& positions_csv_path,
                                                 double range_m, double control_step);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ecpr
