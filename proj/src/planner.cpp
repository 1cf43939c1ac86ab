#include "clutterpush/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "clutterpush/error.hpp"

namespace cpush {

double path_length(std::span<const Vec2> waypoints) {
    double len = 0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) len += distance(waypoints[i - 1], waypoints[i]);
    return len;
}

Vec2 point_at_arc_length(const Path& path, double s) {
    if (path.waypoints.empty()) throw Error(ErrorCode::empty_path, "path has no waypoints");
    const auto& w = path.waypoints;
    if (s <= 0) return w.front();
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double seg = distance(w[i - 1], w[i]);
        if (s <= seg && seg > 0) return w[i - 1] + (w[i] - w[i - 1]) * (s / seg);
        s -= seg;
    }
    return w.back();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

// Every cell whose closed square comes within kEps of the segment.
template <typename Visit>
bool for_each_touched_cell(Vec2 a, Vec2 b, Visit&& visit) {
    if (b.x < a.x) std::swap(a, b);
    const int c_lo = static_cast<int>(std::ceil(a.x - kEps)) - 1;
    const int c_hi = static_cast<int>(std::floor(b.x + kEps));
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    for (int c = c_lo; c <= c_hi; ++c) {
        double y0, y1;
        if (dx <= 0) {
            y0 = a.y;
            y1 = b.y;
        } else {
            const double x0 = std::max(a.x, static_cast<double>(c));
            const double x1 = std::min(b.x, static_cast<double>(c + 1));
            y0 = a.y + (x0 - a.x) * dy / dx;
            y1 = a.y + (x1 - a.x) * dy / dx;
        }
        if (y0 > y1) std::swap(y0, y1);
        const int r_lo = static_cast<int>(std::ceil(y0 - kEps)) - 1;
        const int r_hi = static_cast<int>(std::floor(y1 + kEps));
        for (int r = r_lo; r <= r_hi; ++r) {
            if (!visit(r, c)) return false;
        }
    }
    return true;
}

// Parametric overlap of the segment with the open cell interior.
bool enters_interior(Vec2 a, Vec2 b, int r, int c) {
    double t0 = 0, t1 = 1;
    const double d[2] = {b.x - a.x, b.y - a.y};
    const double o[2] = {a.x, a.y};
    const double lo[2] = {c + kEps, r + kEps};
    const double hi[2] = {c + 1 - kEps, r + 1 - kEps};
    for (int k = 0; k < 2; ++k) {
        if (d[k] == 0) {
            if (o[k] <= lo[k] || o[k] >= hi[k]) return false;
            continue;
        }
        double ta = (lo[k] - o[k]) / d[k], tb = (hi[k] - o[k]) / d[k];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    return t1 - t0 > kEps;
}

template <typename Blocked>
bool segment_visible(Vec2 a, Vec2 b, const Blocked& blocked) {
    const bool vertical = std::abs(b.x - a.x) < kEps;
    const bool horizontal = std::abs(b.y - a.y) < kEps;
    return for_each_touched_cell(a, b, [&](int r, int c) {
        if (!blocked(r, c)) return true;
        if (enters_interior(a, b, r, c)) return false;
        // A corner shared with a diagonally opposite blocked cell is a
        // zero-width pinch; touching it at all counts as squeezing through.
        for (int k = 0; k < 4; ++k) {
            const int X = c + (k & 1), Y = r + (k >> 1);
            if (point_segment_distance({static_cast<double>(X), static_cast<double>(Y)}, a, b) > kEps) continue;
            if (blocked(2 * Y - 1 - r, 2 * X - 1 - c)) return false;
        }
        if (vertical || horizontal) {
            // Running along one of the cell's edges.
            const double along_lo = vertical ? std::min(a.y, b.y) : std::min(a.x, b.x);
            const double along_hi = vertical ? std::max(a.y, b.y) : std::max(a.x, b.x);
            const int base = vertical ? r : c;
            if (std::min<double>(base + 1, along_hi) - std::max<double>(base, along_lo) <= kEps) return true;
            const double line = vertical ? a.x : a.y;
            const int edge = vertical ? c : r;
            int other;
            if (std::abs(line - edge) < kEps) other = edge - 1;
            else if (std::abs(line - (edge + 1)) < kEps) other = edge + 1;
            else return true;
            return vertical ? !blocked(r, other) : !blocked(other, c);
        }
        return true;
    });
}

} // namespace

bool line_of_sight(const OccupancyGrid& grid, Vec2 a_grid, Vec2 b_grid) {
    return segment_visible(a_grid, b_grid, [&](int r, int c) { return grid.blocked(r, c); });
}

namespace {

struct OpenEntry {
    double f;
    double g;
    int id;
    bool operator>(const OpenEntry& o) const {
        if (f != o.f) return f > o.f;
        if (g != o.g) return g > o.g;
        return id > o.id;
    }
};

struct Endpoint {
    int r{0}, c{0};  // free cell holding the point
    Vec2 pos;        // grid coordinates
};

class LazyThetaStar {
public:
    LazyThetaStar(const OccupancyGrid& grid, const CostGrid* costs)
        : grid_(grid), costs_(costs), geom_(grid.geom), vw_(grid.geom.width + 1),
          n_vertices_(static_cast<int>((grid.geom.width + 1) * (grid.geom.height + 1))) {}

    bool blocked(int r, int c) const {
        if (grid_.blocked(r, c)) return true;
        return costs_ != nullptr && costs_->lethal(r, c);
    }

    bool visible(Vec2 a, Vec2 b) const {
        return segment_visible(a, b, [&](int r, int c) { return blocked(r, c); });
    }

    // Cheapest non-lethal cell whose closed square holds p.
    double cell_cost(Vec2 p) const {
        double best = kInf;
        for (int k = 0; k < 4; ++k) {
            const int r = static_cast<int>(std::floor(p.y + ((k >> 1) ? kEps : -kEps)));
            const int c = static_cast<int>(std::floor(p.x + ((k & 1) ? kEps : -kEps)));
            if (!costs_->lethal(r, c) && !grid_.blocked(r, c)) best = std::min(best, costs_->at(r, c));
        }
        return best;
    }

    // Segment cost in grid units.
    double cost(Vec2 a, Vec2 b) const {
        const double len = distance(a, b);
        if (costs_ == nullptr || len == 0) return len;
        const int n = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
        double sum = 0;
        for (int i = 0; i < n; ++i) sum += cell_cost(a + (b - a) * ((i + 0.5) / n));
        return len * sum / n;
    }

    // Cell the query lands on, snapped to the nearest free cell center if
    // allowed; nullopt when blocked.
    std::optional<Endpoint> anchor(Vec2 q, int snap) const {
        const int r = static_cast<int>(std::floor(q.y));
        const int c = static_cast<int>(std::floor(q.x));
        if (!blocked(r, c)) return Endpoint{r, c, q};
        if (snap <= 0) return std::nullopt;
        double best = kInf;
        std::optional<Endpoint> out;
        for (int rr = r - snap; rr <= r + snap; ++rr) {
            for (int cc = c - snap; cc <= c + snap; ++cc) {
                if (blocked(rr, cc)) continue;
                const Vec2 center{cc + 0.5, rr + 0.5};
                const double d = distance(center, q);
                if (d > snap) continue;
                // Scan order is row-major, so strict < keeps the lowest index on ties.
                if (d < best) {
                    best = d;
                    out = Endpoint{rr, cc, center};
                }
            }
        }
        return out;
    }

    std::vector<Vec2> solve(const Endpoint& s, const Endpoint& g) {
        s_ = s;
        g_end_ = g;
        s_id_ = n_vertices_;
        g_id_ = n_vertices_ + 1;
        const auto n = static_cast<std::size_t>(n_vertices_ + 2);
        g_.assign(n, kInf);
        parent_.assign(n, -1);
        closed_.assign(n, 0);

        std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
        g_[static_cast<std::size_t>(s_id_)] = 0;
        parent_[static_cast<std::size_t>(s_id_)] = s_id_;
        open.push({heuristic(s_id_), 0.0, s_id_});

        std::vector<int> nbrs;
        while (!open.empty()) {
            const OpenEntry top = open.top();
            open.pop();
            const auto u = static_cast<std::size_t>(top.id);
            if (closed_[u] || top.g != g_[u]) continue;
            switch (set_vertex(top.id)) {
            case Repair::verified:
                break;
            case Repair::repaired:
                // The corrected cost goes back into the queue so cheaper
                // candidates from later expansions can still win.
                open.push({g_[u] + heuristic(top.id), g_[u], top.id});
                continue;
            case Repair::failed:
                // No closed neighbor sees this node yet; forget the lazy
                // parent so a later expansion can reopen it.
                g_[u] = kInf;
                parent_[u] = -1;
                continue;
            }
            closed_[u] = 1;
            if (top.id == g_id_) return extract();

            neighbors(top.id, nbrs);
            for (const int v : nbrs) {
                const auto vi = static_cast<std::size_t>(v);
                if (closed_[vi]) continue;
                // Lazy: assume the parent of u sees v. Under weights the
                // direct segment can cost more than going through u.
                int p = parent_[u];
                double cand = g_[static_cast<std::size_t>(p)] + cost(pos(p), pos(v));
                const double local = g_[u] + cost(pos(u), pos(v));
                if (!(cand <= local)) {
                    p = top.id;
                    cand = local;
                }
                if (cand < g_[vi]) {
                    g_[vi] = cand;
                    parent_[vi] = p;
                    open.push({cand + heuristic(v), cand, v});
                }
            }
        }
        return {};
    }

private:
    Vec2 pos(int id) const {
        if (id == s_id_) return s_.pos;
        if (id == g_id_) return g_end_.pos;
        return {static_cast<double>(id % vw_), static_cast<double>(id / vw_)};
    }

    double heuristic(int id) const { return distance(pos(id), g_end_.pos); }

    int corner_id(int X, int Y) const { return Y * vw_ + X; }

    static bool is_corner_of(const Endpoint& e, int X, int Y) {
        return (X == e.c || X == e.c + 1) && (Y == e.r || Y == e.r + 1);
    }

    // Graph neighbors whose connecting edge is visible.
    void neighbors(int id, std::vector<int>& out) const {
        out.clear();
        if (id >= n_vertices_) {
            const Endpoint& e = id == s_id_ ? s_ : g_end_;
            for (int k = 0; k < 4; ++k) {
                const int v = corner_id(e.c + (k & 1), e.r + (k >> 1));
                if (visible(e.pos, pos(v))) out.push_back(v);
            }
            return;
        }
        const int X = id % vw_, Y = id / vw_;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = X + dx, ny = Y + dy;
                if (nx < 0 || ny < 0 || nx > geom_.width || ny > geom_.height) continue;
                const int v = corner_id(nx, ny);
                if (visible(pos(id), pos(v))) out.push_back(v);
            }
        }
        if (is_corner_of(s_, X, Y) && visible(pos(id), s_.pos)) out.push_back(s_id_);
        if (is_corner_of(g_end_, X, Y) && visible(pos(id), g_end_.pos)) out.push_back(g_id_);
    }

    enum class Repair { verified, repaired, failed };

    Repair set_vertex(int s) {
        const auto si = static_cast<std::size_t>(s);
        const int p = parent_[si];
        if (p == s || visible(pos(p), pos(s))) return Repair::verified;
        double best = kInf;
        int best_parent = -1;
        std::vector<int> nbrs;
        neighbors(s, nbrs);
        for (const int v : nbrs) {
            if (!closed_[static_cast<std::size_t>(v)]) continue;
            const double cand = g_[static_cast<std::size_t>(v)] + cost(pos(v), pos(s));
            if (cand < best || (cand == best && v < best_parent)) {
                best = cand;
                best_parent = v;
            }
        }
        if (best_parent < 0 || !std::isfinite(best)) return Repair::failed;
        parent_[si] = best_parent;
        g_[si] = best;
        return Repair::repaired;
    }

    std::vector<Vec2> extract() const {
        std::vector<Vec2> pts;
        int id = g_id_;
        while (true) {
            pts.push_back(pos(id));
            if (id == s_id_) break;
            id = parent_[static_cast<std::size_t>(id)];
        }
        std::reverse(pts.begin(), pts.end());
        return pts;
    }

    const OccupancyGrid& grid_;
    const CostGrid* costs_;
    GridGeometry geom_;
    int vw_;
    int n_vertices_;
    int s_id_{0}, g_id_{0};
    Endpoint s_, g_end_;
    std::vector<double> g_;
    std::vector<int> parent_;
    std::vector<std::uint8_t> closed_;
};

} // namespace

Path plan_path(const OccupancyGrid& grid, Vec2 start, Vec2 goal, const PlanOptions& options) {
    if (options.costs != nullptr && !(options.costs->geom == grid.geom))
        throw Error(ErrorCode::invalid_argument, "cost grid geometry differs from occupancy grid");
    LazyThetaStar search(grid, options.costs);
    const GridGeometry& geom = grid.geom;

    const auto s = search.anchor(geom.to_grid(start), options.snap_radius_cells);
    if (!s) throw Error(ErrorCode::start_occupied, "start lies on an occupied cell");
    const auto g = search.anchor(geom.to_grid(goal), options.snap_radius_cells);
    if (!g) throw Error(ErrorCode::goal_occupied, "goal lies on an occupied cell");

    std::vector<Vec2> pts;
    if (s->r == g->r && s->c == g->c) {
        pts = {s->pos, g->pos};
    } else if (options.costs == nullptr && search.visible(s->pos, g->pos)) {
        // Direct visibility: the any-angle optimum is the straight segment.
        pts = {s->pos, g->pos};
    } else {
        pts = search.solve(*s, *g);
        if (pts.empty()) throw Error(ErrorCode::no_path, "goal unreachable from start");
    }
    if (pts.size() == 2 && pts[0] == pts[1]) pts.pop_back();

    Path path;
    path.waypoints.reserve(pts.size());
    for (const Vec2& p : pts) path.waypoints.push_back(geom.to_world(p));
    // Unsnapped endpoints are the caller's exact points, not a grid round trip.
    const bool s_exact = s->pos == geom.to_grid(start);
    const bool g_exact = g->pos == geom.to_grid(goal);
    if (s_exact) path.waypoints.front() = start;
    if (g_exact && (path.waypoints.size() > 1 || s->pos == g->pos)) path.waypoints.back() = goal;
    path.length = path_length(path.waypoints);
    return path;
}

Vec2 subgoal_point(const Path& path_now) {
    if (path_now.waypoints.empty()) throw Error(ErrorCode::empty_path, "path has no waypoints");
    const double len = path_length(path_now.waypoints);
    if (len <= 0) return path_now.waypoints.back();
    return point_at_arc_length(path_now, kSubgoalFraction * len);
}

SubgoalPair sample_subgoals(const Path& path_now, std::span<const Vec2> history, int lag, const Pose2D& frame) {
    const Vec2 now = subgoal_point(path_now);
    Vec2 lagged = now;
    if (lag > 0 && !history.empty()) {
        const auto need = static_cast<std::size_t>(lag);
        lagged = history.size() >= need ? history[history.size() - need] : history.front();
    }
    return {frame.to_local(now), frame.to_local(lagged), lag};
}

SubgoalPair SubgoalTracker::update(const Path& path_now, const Pose2D& frame) {
    const std::vector<Vec2> hist(history_.begin(), history_.end());
    const SubgoalPair pair = sample_subgoals(path_now, hist, lag_, frame);
    history_.push_back(subgoal_point(path_now));
    while (static_cast<int>(history_.size()) > std::max(lag_, 1)) history_.pop_front();
    return pair;
}

} // namespace cpush
