#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "clutterpush/geometry.hpp"
#include "clutterpush/perception.hpp"

namespace cpush {

struct Path {
    std::vector<Vec2> waypoints;  // world frame
    double length{0};

    [[nodiscard]] bool empty() const noexcept { return waypoints.empty(); }
    friend bool operator==(const Path&, const Path&) = default;
};

// Sum of segment lengths; 0 for a single waypoint.
double path_length(std::span<const Vec2> waypoints);
inline double path_length(const Path& path) { return path_length(path.waypoints); }

// Point at arc length `s` (clamped to [0, length]). Throws Error(empty_path).
Vec2 point_at_arc_length(const Path& path, double s);

// Per-cell traversal cost for weighted planning; infinity marks lethal cells.
struct CostGrid {
    GridGeometry geom;
    std::vector<double> cost;

    [[nodiscard]] double at(int r, int c) const { return cost[geom.index(r, c)]; }
    [[nodiscard]] bool lethal(int r, int c) const { return !geom.in_bounds(r, c) || !std::isfinite(at(r, c)); }
};

struct PlanOptions {
    // When start/goal fall on blocked cells, move them to the nearest free
    // cell center within this many cells; 0 disables snapping.
    int snap_radius_cells{0};
    // Optional cost-weighted edges (segment length times mean cell cost).
    const CostGrid* costs{nullptr};
};

// Segment visibility in continuous grid coordinates (cell (r, c) spans
// [c, c+1] x [r, r+1]). The segment may touch blocked cells but must not
// enter their interiors, run along an edge shared by two blocked cells, or
// touch a corner shared by two diagonally opposite blocked cells.
// Cells outside the grid count as blocked.
bool line_of_sight(const OccupancyGrid& grid, Vec2 a_grid, Vec2 b_grid);

// Lazy Theta* with Euclidean heuristic. Nodes are the cell corners, 8-connected,
// plus the exact start and goal points, each linked to the corners of its
// own cell. Open-list ties go to lower g, then lower row-major corner index.
// Throws Error(start_occupied / goal_occupied / no_path).
Path plan_path(const OccupancyGrid& grid, Vec2 start, Vec2 goal, const PlanOptions& options = {});

struct SubgoalPair {
    Vec2 sg_now;     // pushee frame
    Vec2 sg_lagged;  // pushee frame
    int lag{0};
};

// The 20%-arc-length point of `path_now` plus the one produced `lag` steps
// earlier (`history` holds earlier world-frame subgoals, oldest first; the
// oldest is used while fewer than `lag` exist). Both are expressed in
// `frame`. Throws Error(empty_path).
inline constexpr double kSubgoalFraction = 0.20;
Vec2 subgoal_point(const Path& path_now);
SubgoalPair sample_subgoals(const Path& path_now, std::span<const Vec2> history, int lag, const Pose2D& frame);

// Keeps the ring of world-frame subgoals between steps.
class SubgoalTracker {
public:
    explicit SubgoalTracker(int lag = 5) : lag_(lag) {}

    // Computes the pair for this step, then records this step's subgoal.
    SubgoalPair update(const Path& path_now, const Pose2D& frame);
    void reset() { history_.clear(); }
    [[nodiscard]] int lag() const noexcept { return lag_; }
    [[nodiscard]] const std::deque<Vec2>& history() const noexcept { return history_; }

private:
    int lag_;
    std::deque<Vec2> history_;
};

} // namespace cpush
