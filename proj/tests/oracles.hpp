#pragma once

// Slow reference implementations used as test oracles. Nothing here calls
// into the library's own search, distance or line-of-sight code.

#include <cstdint>
#include <vector>

#include "clutterpush/perception.hpp"

namespace oracle {

// O(n^2): occupied iff some originally occupied cell center lies within
// `radius` meters.
cpush::OccupancyGrid brute_inflate(const cpush::OccupancyGrid& grid, double radius);

// O(n^2) squared distance (cells^2) to the nearest marked cell.
std::vector<std::int64_t> brute_edt(const std::vector<std::uint8_t>& marked, int width, int height);

// Segment (grid coordinates) against every cell in its bounding box. Clear
// iff it stays out of blocked interiors, never runs along an edge between two
// blocked cells and never touches a corner pinched between two diagonal
// blocked cells. Out-of-grid cells are blocked.
bool segment_clear(const cpush::OccupancyGrid& grid, cpush::Vec2 a, cpush::Vec2 b);

// Euclidean shortest path under segment_clear: Dijkstra over the complete
// visibility graph of blocked-cell corners plus the two endpoints (grid
// coordinates). Infinity when unreachable.
double visibility_graph_length(const cpush::OccupancyGrid& grid, cpush::Vec2 start, cpush::Vec2 goal);

// 8-connected grid Dijkstra between cell centers, diagonal moves forbidden
// when either side cell is blocked. Infinity when unreachable.
double astar8_length(const cpush::OccupancyGrid& grid, int sr, int sc, int gr, int gc);

} // namespace oracle
