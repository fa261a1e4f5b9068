#include "ecpr/mobility.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ecpr/rng.hpp"

namespace ecpr {

namespace {

class UrbanGrid final : public MobilityModel {
  public:
    UrbanGrid(int vehicle_count, std::uint64_t seed, double area_x, double area_y,
              double spacing, double width, double dt)
        : seed_(seed), spacing_(spacing), width_(width), dt_(dt) {
        cells_x_ = std::max(1, static_cast<int>(std::lround(area_x / spacing)));
        cells_y_ = std::max(1, static_cast<int>(std::lround(area_y / spacing)));
        len_x_ = cells_x_ * spacing;
        len_y_ = cells_y_ * spacing;

        std::vector<Polygon> blocks;
        double inset = width / 2.0;
        for (int i = 0; i < cells_x_; ++i) {
            for (int j = 0; j < cells_y_; ++j) {
                double x0 = i * spacing + inset, x1 = (i + 1) * spacing - inset;
                double y0 = j * spacing + inset, y1 = (j + 1) * spacing - inset;
                blocks.push_back(Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}});
            }
        }
        buildings_ = BuildingSet(std::move(blocks));

        vehicles_.resize(static_cast<std::size_t>(vehicle_count));
        int lines_v = cells_x_ + 1;  // vertical streets x = i*spacing
        int lines_h = cells_y_ + 1;
        for (int v = 0; v < vehicle_count; ++v) {
            RngStream rng(derive_seed(seed, StreamId::placement, static_cast<std::uint64_t>(v)));
            Car& c = vehicles_[static_cast<std::size_t>(v)];
            int line = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(lines_v + lines_h)));
            if (line < lines_v) {
                c.axis = 1;  // travels along y on a vertical street
                c.line_coord = line * spacing;
                c.s = rng.next_uniform(0.0, len_y_);
            } else {
                c.axis = 0;
                c.line_coord = (line - lines_v) * spacing;
                c.s = rng.next_uniform(0.0, len_x_);
            }
            c.dir = rng.next_unit() < 0.5 ? -1 : 1;
            c.speed = rng.next_uniform(8.0, 14.0);
        }
    }

    void poses_at(std::int64_t step, std::vector<VehiclePose>& out) override {
        if (step > 0) advance();
        out.clear();
        out.reserve(vehicles_.size());
        for (std::size_t v = 0; v < vehicles_.size(); ++v) {
            const Car& c = vehicles_[v];
            VehiclePose p;
            p.id = static_cast<int>(v);
            // Right-hand lane offset so opposing flows do not overlap.
            double off = c.dir * width_ / 4.0;
            if (c.axis == 0) {
                p.pos = {c.s, c.line_coord - off};
                p.heading_rad = c.dir > 0 ? 0.0 : M_PI;
            } else {
                p.pos = {c.line_coord + off, c.s};
                p.heading_rad = c.dir > 0 ? M_PI / 2.0 : -M_PI / 2.0;
            }
            p.speed_mps = c.speed;
            out.push_back(p);
        }
    }

    const BuildingSet& buildings() const override { return buildings_; }

    BBox bounds() const override {
        return BBox{-width_, -width_, len_x_ + width_, len_y_ + width_};
    }

  private:
    struct Car {
        int axis = 0;  // 0: moves along x, 1: moves along y
        double line_coord = 0.0;
        double s = 0.0;
        int dir = 1;
        double speed = 0.0;
        std::int64_t turns = 0;
    };

    void advance() {
        for (std::size_t v = 0; v < vehicles_.size(); ++v) {
            Car& c = vehicles_[v];
            double remaining = c.speed * dt_;
            int guard = 0;
            while (remaining > 1e-12 && ++guard < 16) {
                double node = next_node(c.s, c.dir);
                double dist_to_node = std::fabs(node - c.s);
                if (dist_to_node > remaining) {
                    c.s += c.dir * remaining;
                    remaining = 0.0;
                } else {
                    c.s = node;
                    remaining -= dist_to_node;
                    turn_at_node(static_cast<int>(v), c);
                }
            }
        }
    }

    // Next intersection strictly ahead of s; nodes sit at multiples of the
    // street spacing.
    double next_node(double s, int dir) const {
        double idx = s / spacing_;
        double nearest = std::round(idx);
        bool on_node = std::fabs(s - nearest * spacing_) < 1e-9;
        double k;
        if (dir > 0) {
            k = on_node ? nearest + 1.0 : std::ceil(idx);
        } else {
            k = on_node ? nearest - 1.0 : std::floor(idx);
        }
        return k * spacing_;
    }

    void turn_at_node(int vehicle, Car& c) {
        // At the node, pick uniformly among continuations that stay on the
        // map; a U-turn is the fallback when nothing else is feasible.
        double len_here = c.axis == 0 ? len_x_ : len_y_;
        double len_perp = c.axis == 0 ? len_y_ : len_x_;
        double perp_pos = c.line_coord;   // position along the perpendicular street
        double new_line = c.s;            // this node's coordinate becomes the new line

        struct Option {
            int axis;
            double line_coord;
            double s;
            int dir;
        };
        std::vector<Option> options;
        if ((c.dir > 0 && c.s < len_here - 1e-9) || (c.dir < 0 && c.s > 1e-9)) {
            options.push_back({c.axis, c.line_coord, c.s, c.dir});  // straight
        }
        if (perp_pos < len_perp - 1e-9) {
            options.push_back({1 - c.axis, new_line, perp_pos, 1});
        }
        if (perp_pos > 1e-9) {
            options.push_back({1 - c.axis, new_line, perp_pos, -1});
        }
        RngStream rng(derive_seed(seed_, StreamId::turning, static_cast<std::uint64_t>(vehicle),
                                  static_cast<std::uint64_t>(c.turns)));
        ++c.turns;
        if (options.empty()) {
            c.dir = -c.dir;  // dead end: U-turn
            return;
        }
        const Option& o = options[rng.next_index(options.size())];
        c.axis = o.axis;
        c.line_coord = o.line_coord;
        c.s = o.s;
        c.dir = o.dir;
    }

    std::uint64_t seed_;
    double spacing_, width_, dt_;
    int cells_x_ = 1, cells_y_ = 1;
    double len_x_ = 0.0, len_y_ = 0.0;
    std::vector<Car> vehicles_;
    BuildingSet buildings_;
};

class HighwayStrip final : public MobilityModel {
  public:
    HighwayStrip(int vehicle_count, std::uint64_t seed, double length, int lanes, double dt)
        : length_(length), lanes_(lanes), dt_(dt) {
        vehicles_.resize(static_cast<std::size_t>(vehicle_count));
        for (int v = 0; v < vehicle_count; ++v) {
            RngStream rng(derive_seed(seed, StreamId::placement, static_cast<std::uint64_t>(v)));
            Car& c = vehicles_[static_cast<std::size_t>(v)];
            c.lane = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(lanes)));
            c.x = rng.next_uniform(0.0, length);
            c.speed = rng.next_uniform(25.0, 35.0);
        }
    }

    void poses_at(std::int64_t step, std::vector<VehiclePose>& out) override {
        if (step > 0) {
            for (Car& c : vehicles_) {
                int dir = c.lane < lanes_ / 2 || lanes_ == 1 ? 1 : -1;
                c.x = std::fmod(c.x + dir * c.speed * dt_ + length_, length_);
            }
        }
        out.clear();
        out.reserve(vehicles_.size());
        for (std::size_t v = 0; v < vehicles_.size(); ++v) {
            const Car& c = vehicles_[v];
            int dir = c.lane < lanes_ / 2 || lanes_ == 1 ? 1 : -1;
            VehiclePose p;
            p.id = static_cast<int>(v);
            p.pos = {c.x, (c.lane + 0.5) * kLaneWidth};
            p.speed_mps = c.speed;
            p.heading_rad = dir > 0 ? 0.0 : M_PI;
            out.push_back(p);
        }
    }

    const BuildingSet& buildings() const override { return buildings_; }

    BBox bounds() const override { return BBox{0.0, 0.0, length_, lanes_ * kLaneWidth}; }

  private:
    static constexpr double kLaneWidth = 3.5;
    struct Car {
        int lane = 0;
        double x = 0.0;
        double speed = 0.0;
    };
    double length_;
    int lanes_;
    double dt_;
    std::vector<Car> vehicles_;
    BuildingSet buildings_;  // empty
};

class TracePlayback final : public MobilityModel {
  public:
    TracePlayback(std::vector<TraceRow> rows, BuildingSet buildings, double dt,
                  double required_duration)
        : buildings_(std::move(buildings)) {
        if (rows.empty()) throw config_error("trace: no rows");
        double max_time = 0.0;
        BBox box{rows[0].x_m, rows[0].y_m, rows[0].x_m, rows[0].y_m};
        for (const TraceRow& r : rows) {
            double steps = r.time_s / dt;
            auto step = static_cast<std::int64_t>(std::llround(steps));
            if (std::fabs(step * dt - r.time_s) > 1e-6) {
                throw config_error("trace: times must be multiples of the control step");
            }
            by_step_[step].push_back(r);
            max_time = std::max(max_time, r.time_s);
            box.min_x = std::min(box.min_x, r.x_m);
            box.min_y = std::min(box.min_y, r.y_m);
            box.max_x = std::max(box.max_x, r.x_m);
            box.max_y = std::max(box.max_y, r.y_m);
        }
        bounds_ = box;
        if (max_time + dt < required_duration - 1e-9) {
            throw config_error("trace shorter than the requested duration");
        }
    }

    void poses_at(std::int64_t step, std::vector<VehiclePose>& out) override {
        out.clear();
        auto it = by_step_.find(step);
        if (it == by_step_.end()) return;
        for (const TraceRow& r : it->second) {
            out.push_back({r.vehicle_id, {r.x_m, r.y_m}, r.speed_mps, r.heading_rad});
        }
        std::sort(out.begin(), out.end(),
                  [](const VehiclePose& a, const VehiclePose& b) { return a.id < b.id; });
    }

    const BuildingSet& buildings() const override { return buildings_; }
    BBox bounds() const override { return bounds_; }

  private:
    std::map<std::int64_t, std::vector<TraceRow>> by_step_;
    BuildingSet buildings_;
    BBox bounds_;
};

}  // namespace

std::unique_ptr<MobilityModel> make_urban_grid(int vehicle_count, std::uint64_t seed,
                                               double area_x_m, double area_y_m,
                                               double street_spacing_m, double street_width_m,
                                               double control_step_s) {
    return std::make_unique<UrbanGrid>(vehicle_count, seed, area_x_m, area_y_m,
                                       street_spacing_m, street_width_m, control_step_s);
}

std::unique_ptr<MobilityModel> make_highway_strip(int vehicle_count, std::uint64_t seed,
                                                  double length_m, int lanes,
                                                  double control_step_s) {
    return std::make_unique<HighwayStrip>(vehicle_count, seed, length_m, lanes, control_step_s);
}

std::unique_ptr<MobilityModel> make_trace_playback(std::vector<TraceRow> rows,
                                                   BuildingSet buildings, double control_step_s,
                                                   double required_duration_s) {
    return std::make_unique<TracePlayback>(std::move(rows), std::move(buildings),
                                           control_step_s, required_duration_s);
}

std::vector<TraceRow> parse_trace_csv(const std::string& text) {
    std::vector<TraceRow> rows;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw config_error("trace: empty file");
    if (line.find("time_s") == std::string::npos) {
        throw config_error("trace: missing header (time_s,vehicle_id,x_m,y_m,speed_mps,heading_rad)");
    }
    double last_time = -1.0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        TraceRow r;
        std::istringstream ls(line);
        std::string field;
        double* slots[] = {&r.time_s, nullptr, &r.x_m, &r.y_m, &r.speed_mps, &r.heading_rad};
        for (int i = 0; i < 6; ++i) {
            if (!std::getline(ls, field, ',')) {
                throw config_error("trace: line " + std::to_string(line_no) + ": expected 6 fields");
            }
            try {
                if (i == 1) {
                    r.vehicle_id = std::stoi(field);
                } else {
                    *slots[i] = std::stod(field);
                }
            } catch (const std::exception&) {
                throw config_error("trace: line " + std::to_string(line_no) + ": bad number '" +
                                   field + "'");
            }
        }
        if (r.time_s < last_time) {
            throw config_error("trace: rows must be sorted by time (line " +
                               std::to_string(line_no) + ")");
        }
        last_time = r.time_s;
        rows.push_back(r);
    }
    return rows;
}

std::vector<TraceRow> load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open trace file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_trace_csv(ss.str());
}

namespace {
void append_double(std::string& out, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 10);
    out.append(buf, p);
}
}  // namespace

std::string trace_to_csv(const std::vector<TraceRow>& rows) {
    std::string out = "time_s,vehicle_id,x_m,y_m,speed_mps,heading_rad\n";
    for (const TraceRow& r : rows) {
        append_double(out, r.time_s);
        out += ',';
        out += std::to_string(r.vehicle_id);
        for (double v : {r.x_m, r.y_m, r.speed_mps, r.heading_rad}) {
            out += ',';
            append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

std::vector<TraceRow> synth_mobility(MobilityKind kind, int vehicle_count, std::uint64_t seed,
                                     double duration_s, const SimConfig& cfg) {
    if (vehicle_count <= 0) throw config_error("synth_mobility: vehicle_count must be positive");
    std::unique_ptr<MobilityModel> model;
    if (kind == MobilityKind::urban_grid) {
        model = make_urban_grid(vehicle_count, seed, cfg.scenario.area_m[0],
                                cfg.scenario.area_m[1], cfg.scenario.street_spacing_m,
                                cfg.scenario.street_width_m, cfg.control_step);
    } else if (kind == MobilityKind::highway_strip) {
        model = make_highway_strip(vehicle_count, seed, cfg.scenario.area_m[0],
                                   cfg.scenario.lanes, cfg.control_step);
    } else {
        throw config_error("synth_mobility: kind must be synthetic");
    }
    std::vector<TraceRow> rows;
    std::vector<VehiclePose> poses;
    auto steps = static_cast<std::int64_t>(std::llround(duration_s / cfg.control_step));
    for (std::int64_t s = 0; s < steps; ++s) {
        model->poses_at(s, poses);
        for (const VehiclePose& p : poses) {
            rows.push_back({s * cfg.control_step, p.id, p.pos.x, p.pos.y, p.speed_mps,
                            p.heading_rad});
        }
    }
    return rows;
}

std::unique_ptr<MobilityModel> make_mobility(const SimConfig& cfg) {
    const ScenarioConfig& s = cfg.scenario;
    switch (s.mobility) {
        case MobilityKind::urban_grid:
            return make_urban_grid(s.vehicle_count, cfg.rng_seed, s.area_m[0], s.area_m[1],
                                   s.street_spacing_m, s.street_width_m, cfg.control_step);
        case MobilityKind::highway_strip:
            return make_highway_strip(s.vehicle_count, cfg.rng_seed, s.area_m[0], s.lanes,
                                      cfg.control_step);
        case MobilityKind::trace:
            break;
    }
    throw config_error("trace mobility requires io::load_scenario (buildings + trace)");
}

}  // namespace ecpr
