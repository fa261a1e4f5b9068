#include "ecpr/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace ecpr {

double distance(Vec2 a, Vec2 b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    double t = clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

BBox segment_bbox(Vec2 a, Vec2 b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
}

BBox Polygon::bbox() const {
    BBox box{vertices[0].x, vertices[0].y, vertices[0].x, vertices[0].y};
    for (const Vec2& v : vertices) {
        box.min_x = std::min(box.min_x, v.x);
        box.min_y = std::min(box.min_y, v.y);
        box.max_x = std::max(box.max_x, v.x);
        box.max_y = std::max(box.max_y, v.y);
    }
    return box;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    double v = cross(b - a, c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool on_segment(Vec2 p, Vec2 a, Vec2 b) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    int o1 = orientation(p1, p2, q1);
    int o2 = orientation(p1, p2, q2);
    int o3 = orientation(q1, q2, p1);
    int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(q1, p1, p2)) return true;
    if (o2 == 0 && on_segment(q2, p1, p2)) return true;
    if (o3 == 0 && on_segment(p1, q1, q2)) return true;
    if (o4 == 0 && on_segment(p2, q1, q2)) return true;
    return false;
}

bool point_in_polygon(Vec2 p, const Polygon& poly) {
    // Even-odd ray cast along +x.
    bool inside = false;
    std::size_t n = poly.vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        Vec2 a = poly.vertices[j];
        Vec2 b = poly.vertices[i];
        bool straddles = (b.y > p.y) != (a.y > p.y);
        if (straddles) {
            double x_at = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

bool segment_intersects_polygon(Vec2 a, Vec2 b, const Polygon& poly) {
    if (poly.vertices.size() < 3) {
        throw geometry_error("polygon needs at least 3 vertices");
    }
    if (!segment_bbox(a, b).overlaps(poly.bbox())) return false;
    std::size_t n = poly.vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if (segments_intersect(a, b, poly.vertices[j], poly.vertices[i])) return true;
    }
    // No boundary crossing: the segment is either fully outside or fully
    // inside, so one endpoint decides.
    return point_in_polygon(a, poly);
}

BuildingSet::BuildingSet(std::vector<Polygon> polygons) : polygons_(std::move(polygons)) {
    for (const Polygon& p : polygons_) {
        if (p.vertices.size() < 3) throw geometry_error("degenerate building polygon");
        bboxes_.push_back(p.bbox());
    }
    build_index();
}

void BuildingSet::build_index() {
    if (polygons_.empty()) return;
    BBox extent = bboxes_[0];
    double mean_w = 0.0, mean_h = 0.0;
    for (const BBox& b : bboxes_) {
        extent.min_x = std::min(extent.min_x, b.min_x);
        extent.min_y = std::min(extent.min_y, b.min_y);
        extent.max_x = std::max(extent.max_x, b.max_x);
        extent.max_y = std::max(extent.max_y, b.max_y);
        mean_w += b.max_x - b.min_x;
        mean_h += b.max_y - b.min_y;
    }
    mean_w /= static_cast<double>(bboxes_.size());
    mean_h /= static_cast<double>(bboxes_.size());
    cell_ = std::max(1.0, std::max(mean_w, mean_h));
    origin_x_ = extent.min_x;
    origin_y_ = extent.min_y;
    nx_ = std::max(1, static_cast<int>((extent.max_x - extent.min_x) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((extent.max_y - extent.min_y) / cell_) + 1);
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::size_t i = 0; i < bboxes_.size(); ++i) {
        const BBox& b = bboxes_[i];
        int cx0 = std::clamp(static_cast<int>((b.min_x - origin_x_) / cell_), 0, nx_ - 1);
        int cx1 = std::clamp(static_cast<int>((b.max_x - origin_x_) / cell_), 0, nx_ - 1);
        int cy0 = std::clamp(static_cast<int>((b.min_y - origin_y_) / cell_), 0, ny_ - 1);
        int cy1 = std::clamp(static_cast<int>((b.max_y - origin_y_) / cell_), 0, ny_ - 1);
        for (int cx = cx0; cx <= cx1; ++cx) {
            for (int cy = cy0; cy <= cy1; ++cy) {
                cells_[static_cast<std::size_t>(cx) * ny_ + cy].push_back(
                    static_cast<std::int32_t>(i));
            }
        }
    }
}

template <typename Fn>
void BuildingSet::for_candidates(const BBox& query, Fn&& fn) const {
    if (cells_.empty()) return;
    int cx0 = static_cast<int>((query.min_x - origin_x_) / cell_);
    int cx1 = static_cast<int>((query.max_x - origin_x_) / cell_);
    int cy0 = static_cast<int>((query.min_y - origin_y_) / cell_);
    int cy1 = static_cast<int>((query.max_y - origin_y_) / cell_);
    if (cx1 < 0 || cy1 < 0 || cx0 >= nx_ || cy0 >= ny_) return;
    cx0 = std::clamp(cx0, 0, nx_ - 1);
    cx1 = std::clamp(cx1, 0, nx_ - 1);
    cy0 = std::clamp(cy0, 0, ny_ - 1);
    cy1 = std::clamp(cy1, 0, ny_ - 1);
    // A polygon can span several cells; visit each id once per query by
    // checking whether this is the first cell (in scan order) that both
    // holds the id and intersects the query box.
    for (int cx = cx0; cx <= cx1; ++cx) {
        for (int cy = cy0; cy <= cy1; ++cy) {
            for (std::int32_t id : cells_[static_cast<std::size_t>(cx) * ny_ + cy]) {
                const BBox& b = bboxes_[static_cast<std::size_t>(id)];
                if (!b.overlaps(query)) continue;
                int fx = std::clamp(static_cast<int>((std::max(b.min_x, query.min_x) - origin_x_) / cell_),
                                    0, nx_ - 1);
                int fy = std::clamp(static_cast<int>((std::max(b.min_y, query.min_y) - origin_y_) / cell_),
                                    0, ny_ - 1);
                if (fx == cx && fy == cy) fn(static_cast<std::size_t>(id));
            }
        }
    }
}

int BuildingSet::count_blockers(Vec2 a, Vec2 b) const {
    if (polygons_.empty()) return 0;
    int count = 0;
    for_candidates(segment_bbox(a, b), [&](std::size_t i) {
        if (segment_intersects_polygon(a, b, polygons_[i])) ++count;
    });
    return count;
}

int BuildingSet::count_blockers_exhaustive(Vec2 a, Vec2 b) const {
    int count = 0;
    for (const Polygon& p : polygons_) {
        if (segment_intersects_polygon(a, b, p)) ++count;
    }
    return count;
}

ObstructionResult classify_link(Vec2 tx, Vec2 rx, const BuildingSet& buildings,
                                std::span<const Vec2> others, double vehicle_radius_m) {
    int nb = buildings.count_blockers(tx, rx);
    if (nb > 0) return {LinkClass::nlos_building, nb};
    BBox box = segment_bbox(tx, rx).inflated(vehicle_radius_m);
    int nv = 0;
    for (const Vec2& p : others) {
        if (!box.contains(p)) continue;
        if (point_segment_distance(p, tx, rx) <= vehicle_radius_m) ++nv;
    }
    if (nv > 0) return {LinkClass::nlos_vehicle, nv};
    return {LinkClass::los, 0};
}

VehicleGrid::VehicleGrid(std::span<const Vec2> positions, double cell_size)
    : positions_(positions), cell_(std::max(1.0, cell_size)) {
    if (positions.empty()) return;
    double min_x = positions[0].x, min_y = positions[0].y;
    double max_x = min_x, max_y = min_y;
    for (const Vec2& p : positions) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    origin_x_ = min_x;
    origin_y_ = min_y;
    nx_ = std::max(1, static_cast<int>((max_x - min_x) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((max_y - min_y) / cell_) + 1);
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::size_t i = 0; i < positions.size(); ++i) {
        int cx = std::clamp(static_cast<int>((positions[i].x - origin_x_) / cell_), 0, nx_ - 1);
        int cy = std::clamp(static_cast<int>((positions[i].y - origin_y_) / cell_), 0, ny_ - 1);
        cells_[static_cast<std::size_t>(cx) * ny_ + cy].push_back(static_cast<std::int32_t>(i));
    }
}

void VehicleGrid::candidates_near_segment(Vec2 a, Vec2 b, double radius, int skip_a,
                                          int skip_b, std::vector<int>& out) const {
    if (cells_.empty()) return;
    BBox box = segment_bbox(a, b).inflated(radius);
    int cx0 = static_cast<int>((box.min_x - origin_x_) / cell_);
    int cx1 = static_cast<int>((box.max_x - origin_x_) / cell_);
    int cy0 = static_cast<int>((box.min_y - origin_y_) / cell_);
    int cy1 = static_cast<int>((box.max_y - origin_y_) / cell_);
    if (cx1 < 0 || cy1 < 0 || cx0 >= nx_ || cy0 >= ny_) return;
    cx0 = std::clamp(cx0, 0, nx_ - 1);
    cx1 = std::clamp(cx1, 0, nx_ - 1);
    cy0 = std::clamp(cy0, 0, ny_ - 1);
    cy1 = std::clamp(cy1, 0, ny_ - 1);
    for (int cx = cx0; cx <= cx1; ++cx) {
        for (int cy = cy0; cy <= cy1; ++cy) {
            for (std::int32_t id : cells_[static_cast<std::size_t>(cx) * ny_ + cy]) {
                if (id == skip_a || id == skip_b) continue;
                if (box.contains(positions_[static_cast<std::size_t>(id)])) out.push_back(id);
            }
        }
    }
}

ObstructionResult classify_link_grid(Vec2 tx, Vec2 rx, const BuildingSet& buildings,
                                     const VehicleGrid& grid,
                                     std::span<const Vec2> positions, int tx_id, int rx_id,
                                     double vehicle_radius_m, std::vector<int>& scratch) {
    int nb = buildings.count_blockers(tx, rx);
    if (nb > 0) return {LinkClass::nlos_building, nb};
    scratch.clear();
    grid.candidates_near_segment(tx, rx, vehicle_radius_m, tx_id, rx_id, scratch);
    int nv = 0;
    for (int id : scratch) {
        if (point_segment_distance(positions[static_cast<std::size_t>(id)], tx, rx) <=
            vehicle_radius_m) {
            ++nv;
        }
    }
    if (nv > 0) return {LinkClass::nlos_vehicle, nv};
    return {LinkClass::los, 0};
}

}  // namespace ecpr
