#include "clutterpush/geometry.hpp"

#include <algorithm>
#include <limits>

#include "clutterpush/error.hpp"

namespace cpush {

namespace {

constexpr double kTieEps = 1e-12;

double polar_angle(Vec2 v) {
    double a = std::atan2(v.y, v.x);
    if (a < 0) a += 2.0 * std::numbers::pi;
    return a;
}

std::vector<Vec2> body_vertices(const ShapeSpec& shape) {
    if (shape.kind == ShapeKind::box) {
        const Vec2 h = shape.half_extents;
        return {{-h.x, -h.y}, {h.x, -h.y}, {h.x, h.y}, {-h.x, h.y}};
    }
    return shape.vertices;
}

bool polygon_contains(const std::vector<Vec2>& poly, Vec2 p) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        if (cross(b - a, p - a) < 0) return false;
    }
    return true;
}

// Projection interval of a polygon onto an axis.
std::pair<double, double> project(const std::vector<Vec2>& poly, Vec2 axis) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Vec2& v : poly) {
        const double d = dot(v, axis);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return {lo, hi};
}

double polygon_separation(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    // SAT over both edge sets: the largest gap decides disjointness, the
    // smallest overlap is the penetration depth.
    double min_overlap = std::numeric_limits<double>::infinity();
    bool disjoint = false;
    for (const auto* poly : {&a, &b}) {
        const std::size_t n = poly->size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 e = (*poly)[(i + 1) % n] - (*poly)[i];
            const double len = norm(e);
            if (len <= 0) continue;
            const Vec2 axis{e.y / len, -e.x / len};
            const auto [alo, ahi] = project(a, axis);
            const auto [blo, bhi] = project(b, axis);
            const double overlap = std::min(ahi, bhi) - std::max(alo, blo);
            if (overlap < 0) disjoint = true;
            min_overlap = std::min(min_overlap, overlap);
        }
    }
    if (!disjoint) return -min_overlap;

    double best = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 2; ++pass) {
        const auto& p = pass == 0 ? a : b;
        const auto& q = pass == 0 ? b : a;
        for (const Vec2& v : p) {
            for (std::size_t i = 0; i < q.size(); ++i) {
                best = std::min(best, point_segment_distance(v, q[i], q[(i + 1) % q.size()]));
            }
        }
    }
    return best;
}

} // namespace

ShapeSpec ShapeSpec::disk(double r) {
    ShapeSpec s;
    s.kind = ShapeKind::disk;
    s.radius = r;
    s.validate();
    return s;
}

ShapeSpec ShapeSpec::box(double half_x, double half_y) {
    ShapeSpec s;
    s.kind = ShapeKind::box;
    s.half_extents = {half_x, half_y};
    s.validate();
    return s;
}

ShapeSpec ShapeSpec::polygon(std::vector<Vec2> verts) {
    ShapeSpec s;
    s.kind = ShapeKind::polygon;
    s.vertices = std::move(verts);
    s.validate();
    return s;
}

void ShapeSpec::validate() const {
    switch (kind) {
    case ShapeKind::disk:
        if (!(radius > 0) || !std::isfinite(radius))
            throw Error(ErrorCode::invalid_argument, "disk radius must be positive");
        break;
    case ShapeKind::box:
        if (!(half_extents.x > 0) || !(half_extents.y > 0) || !std::isfinite(half_extents.x) ||
            !std::isfinite(half_extents.y))
            throw Error(ErrorCode::invalid_argument, "box half extents must be positive");
        break;
    case ShapeKind::polygon: {
        const std::size_t n = vertices.size();
        if (n < 3) throw Error(ErrorCode::invalid_argument, "polygon needs at least 3 vertices");
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = vertices[i];
            const Vec2 b = vertices[(i + 1) % n];
            const Vec2 c = vertices[(i + 2) % n];
            if (!std::isfinite(a.x) || !std::isfinite(a.y))
                throw Error(ErrorCode::invalid_argument, "polygon vertex not finite");
            if (cross(b - a, c - b) <= 0)
                throw Error(ErrorCode::invalid_argument, "polygon must be convex and counter-clockwise");
        }
        // Convex turns at every vertex still admit self-intersecting stars;
        // total turning of exactly 2*pi rules those out.
        double turning = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 e0 = vertices[(i + 1) % n] - vertices[i];
            const Vec2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            turning += std::atan2(cross(e0, e1), dot(e0, e1));
        }
        if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6)
            throw Error(ErrorCode::invalid_argument, "polygon must be simple");
        break;
    }
    }
}

double ShapeSpec::circumscribed_radius() const {
    switch (kind) {
    case ShapeKind::disk:
        return radius;
    case ShapeKind::box:
        return norm(half_extents);
    case ShapeKind::polygon: {
        double r = 0;
        for (const Vec2& v : vertices) r = std::max(r, norm(v));
        return r;
    }
    }
    return 0;
}

std::vector<Vec2> world_vertices(const ShapeSpec& shape, const Pose2D& pose) {
    if (shape.kind == ShapeKind::disk) return {};
    std::vector<Vec2> out = body_vertices(shape);
    for (Vec2& v : out) v = pose.to_world(v);
    return out;
}

Aabb bounding_box(const ShapeSpec& shape, const Pose2D& pose) {
    if (shape.kind == ShapeKind::disk) {
        const Vec2 r{shape.radius, shape.radius};
        return {pose.position() - r, pose.position() + r};
    }
    const auto verts = world_vertices(shape, pose);
    Aabb box{verts.front(), verts.front()};
    for (const Vec2& v : verts) {
        box.min = {std::min(box.min.x, v.x), std::min(box.min.y, v.y)};
        box.max = {std::max(box.max.x, v.x), std::max(box.max.y, v.y)};
    }
    return box;
}

bool contains(const ShapeSpec& shape, const Pose2D& pose, Vec2 p) {
    if (shape.kind == ShapeKind::disk) {
        const Vec2 d = p - pose.position();
        return dot(d, d) <= shape.radius * shape.radius;
    }
    return polygon_contains(body_vertices(shape), pose.to_local(p));
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) noexcept {
    return distance(p, closest_point_on_segment(p, a, b));
}

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) noexcept {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0) return a;
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + ab * t;
}

BoundaryPoint closest_boundary_point(const ShapeSpec& shape, const Pose2D& pose, Vec2 p) {
    if (shape.kind == ShapeKind::disk) {
        const Vec2 d = p - pose.position();
        const double len = norm(d);
        const Vec2 dir = len > 0 ? d / len : rotate({1, 0}, pose.theta);
        return {pose.position() + dir * shape.radius, dir, len - shape.radius};
    }

    // Work in the body frame so ties resolve identically for any pose.
    const std::vector<Vec2> poly = body_vertices(shape);
    const Vec2 local = pose.to_local(p);
    const bool inside = polygon_contains(poly, local);
    const std::size_t n = poly.size();

    double best_dist = std::numeric_limits<double>::infinity();
    double best_angle = 0;
    Vec2 best_point{};
    std::size_t best_edge = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 q = closest_point_on_segment(local, poly[i], poly[(i + 1) % n]);
        const double d = distance(local, q);
        const double ang = polar_angle(q);
        if (d < best_dist - kTieEps || (std::abs(d - best_dist) <= kTieEps && ang < best_angle)) {
            best_dist = d;
            best_angle = ang;
            best_point = q;
            best_edge = i;
        }
    }

    Vec2 normal_local;
    if (!inside && best_dist > 0) {
        normal_local = (local - best_point) / best_dist;
    } else {
        const Vec2 e = poly[(best_edge + 1) % n] - poly[best_edge];
        normal_local = Vec2{e.y, -e.x} / norm(e);
    }
    return {pose.to_world(best_point), rotate(normal_local, pose.theta), inside ? -best_dist : best_dist};
}

double signed_distance(const ShapeSpec& shape, const Pose2D& pose, Vec2 p) {
    if (shape.kind == ShapeKind::disk) return distance(p, pose.position()) - shape.radius;
    return closest_boundary_point(shape, pose, p).signed_distance;
}

double separation(const ShapeSpec& a, const Pose2D& pa, const ShapeSpec& b, const Pose2D& pb) {
    const bool a_disk = a.kind == ShapeKind::disk;
    const bool b_disk = b.kind == ShapeKind::disk;
    if (a_disk && b_disk) return distance(pa.position(), pb.position()) - a.radius - b.radius;
    if (a_disk) return signed_distance(b, pb, pa.position()) - a.radius;
    if (b_disk) return signed_distance(a, pa, pb.position()) - b.radius;
    return polygon_separation(world_vertices(a, pa), world_vertices(b, pb));
}

ShapeSpec mirror_y(const ShapeSpec& shape) {
    if (shape.kind != ShapeKind::polygon) return shape;
    ShapeSpec out = shape;
    out.vertices.clear();
    for (auto it = shape.vertices.rbegin(); it != shape.vertices.rend(); ++it) out.vertices.push_back({it->x, -it->y});
    return out;
}

} // namespace cpush
