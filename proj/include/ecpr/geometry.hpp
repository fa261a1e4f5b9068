#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecpr/types.hpp"

namespace ecpr {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double distance(Vec2 a, Vec2 b);
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

struct BBox {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    bool overlaps(const BBox& o) const {
        return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
    }
    bool contains(Vec2 p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
    BBox inflated(double r) const { return {min_x - r, min_y - r, max_x + r, max_y + r}; }
};

BBox segment_bbox(Vec2 a, Vec2 b);

// Simple polygon stored as an open ring (first vertex not repeated).
struct Polygon {
    std::vector<Vec2> vertices;
    BBox bbox() const;
};

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);
bool point_in_polygon(Vec2 p, const Polygon& poly);

// True iff the open segment (a, b) crosses the polygon boundary or lies
// inside it. Throws geometry_error for degenerate polygons (<3 vertices).
bool segment_intersects_polygon(Vec2 a, Vec2 b, const Polygon& poly);

struct ObstructionResult {
    LinkClass link_class = LinkClass::los;
    int blocker_count = 0;
};

// Immutable polygon set with a uniform-grid index over polygon bounding
// boxes. Queries are read-only and safe to run concurrently.
class BuildingSet {
  public:
    BuildingSet() = default;
    explicit BuildingSet(std::vector<Polygon> polygons);

    std::size_t size() const { return polygons_.size(); }
    bool empty() const { return polygons_.empty(); }
    const Polygon& at(std::size_t i) const { return polygons_[i]; }

    // Number of polygons the segment passes through, via the grid index.
    int count_blockers(Vec2 a, Vec2 b) const;
    // Same, scanning every polygon; used to validate the index.
    int count_blockers_exhaustive(Vec2 a, Vec2 b) const;

  private:
    std::vector<Polygon> polygons_;
    std::vector<BBox> bboxes_;
    // grid index
    double cell_ = 1.0;
    double origin_x_ = 0.0, origin_y_ = 0.0;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<std::int32_t>> cells_;

    void build_index();
    template <typename Fn>
    void for_candidates(const BBox& query, Fn&& fn) const;
};

// Classifies the tx-rx link: building blockage wins over vehicle blockage;
// other vehicles obstruct as discs of the given radius. Candidates whose
// disc center is outside the segment bbox inflated by the radius are not
// tested. `others` must not contain the endpoints themselves.
ObstructionResult classify_link(Vec2 tx, Vec2 rx, const BuildingSet& buildings,
                                std::span<const Vec2> others, double vehicle_radius_m);

// Per-step spatial hash over vehicle positions used to collect obstruction
// candidates near a segment.
class VehicleGrid {
  public:
    VehicleGrid(std::span<const Vec2> positions, double cell_size);
    // Appends indices of vehicles whose position falls in the inflated
    // segment bbox, excluding `skip_a` and `skip_b`.
    void candidates_near_segment(Vec2 a, Vec2 b, double radius, int skip_a, int skip_b,
                                 std::vector<int>& out) const;

  private:
    std::span<const Vec2> positions_;
    double cell_;
    double origin_x_, origin_y_;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<std::int32_t>> cells_;
};

ObstructionResult classify_link_grid(Vec2 tx, Vec2 rx, const BuildingSet& buildings,
                                     const VehicleGrid& grid,
                                     std::span<const Vec2> positions, int tx_id, int rx_id,
                                     double vehicle_radius_m, std::vector<int>& scratch);

}  // namespace ecpr
