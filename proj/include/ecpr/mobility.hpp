#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ecpr/config.hpp"
#include "ecpr/geometry.hpp"

namespace ecpr {

struct VehiclePose {
    int id = 0;
    Vec2 pos;
    double speed_mps = 0.0;
    double heading_rad = 0.0;
};

struct TraceRow {
    double time_s = 0.0;
    int vehicle_id = 0;
    double x_m = 0.0;
    double y_m = 0.0;
    double speed_mps = 0.0;
    double heading_rad = 0.0;
};

// Positions source for the engine. poses_at is called with consecutive step
// indices starting at 0; output is sorted by vehicle id.
class MobilityModel {
  public:
    virtual ~MobilityModel() = default;
    virtual void poses_at(std::int64_t step, std::vector<VehiclePose>& out) = 0;
    virtual const BuildingSet& buildings() const = 0;
    virtual BBox bounds() const = 0;
};

// Manhattan grid with building blocks between the streets; vehicles follow
// street lanes at 8-14 m/s and turn randomly at intersections. The area is
// coerced to a whole number of blocks.
std::unique_ptr<MobilityModel> make_urban_grid(int vehicle_count, std::uint64_t seed,
                                               double area_x_m, double area_y_m,
                                               double street_spacing_m, double street_width_m,
                                               double control_step_s);

// Straight multi-lane road with periodic wrap-around, 25-35 m/s, no
// buildings. Half the lanes run each way.
std::unique_ptr<MobilityModel> make_highway_strip(int vehicle_count, std::uint64_t seed,
                                                  double length_m, int lanes,
                                                  double control_step_s);

// Replays a recorded trace; `buildings` may be empty. Throws if the trace
// ends before `required_duration_s` or has times off the step raster.
std::unique_ptr<MobilityModel> make_trace_playback(std::vector<TraceRow> rows,
                                                   BuildingSet buildings,
                                                   double control_step_s,
                                                   double required_duration_s);

std::unique_ptr<MobilityModel> make_mobility(const SimConfig& cfg);

// CSV with header time_s,vehicle_id,x_m,y_m,speed_mps,heading_rad, rows
// sorted by time.
std::vector<TraceRow> parse_trace_csv(const std::string& text);
std::vector<TraceRow> load_trace_file(const std::string& path);
std::string trace_to_csv(const std::vector<TraceRow>& rows);

// Runs a synthetic model for `duration_s` and collects the trace.
std::vector<TraceRow> synth_mobility(MobilityKind kind, int vehicle_count, std::uint64_t seed,
                                     double duration_s, const SimConfig& cfg);

}  // namespace ecpr
