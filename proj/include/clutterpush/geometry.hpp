#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace cpush {

struct Vec2 {
    double x{0};
    double y{0};

    constexpr Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) noexcept { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
constexpr Vec2 perp(Vec2 a) noexcept { return {-a.y, a.x}; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(b - a); }

inline Vec2 rotate(Vec2 v, double angle) noexcept {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Maps any finite angle into (-pi, pi].
inline double normalize_angle(double a) noexcept {
    constexpr double pi = std::numbers::pi;
    a = std::remainder(a, 2.0 * pi);
    if (a <= -pi) a += 2.0 * pi;
    return a;
}

struct Pose2D {
    double x{0};
    double y{0};
    double theta{0};

    [[nodiscard]] Vec2 position() const noexcept { return {x, y}; }
    [[nodiscard]] Vec2 to_world(Vec2 local) const noexcept { return position() + rotate(local, theta); }
    [[nodiscard]] Vec2 to_local(Vec2 world) const noexcept { return rotate(world - position(), -theta); }

    friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

enum class ShapeKind { disk, box, polygon };

// Body-frame footprint. Boxes are centered; polygons are convex and CCW.
struct ShapeSpec {
    ShapeKind kind{ShapeKind::disk};
    double radius{0};
    Vec2 half_extents{};
    std::vector<Vec2> vertices;

    static ShapeSpec disk(double r);
    static ShapeSpec box(double half_x, double half_y);
    static ShapeSpec polygon(std::vector<Vec2> verts);

    // Throws Error(invalid_argument) when the invariants do not hold.
    void validate() const;
    [[nodiscard]] double circumscribed_radius() const;
    [[nodiscard]] double circumscribed_diameter() const { return 2.0 * circumscribed_radius(); }

    friend bool operator==(const ShapeSpec&, const ShapeSpec&) = default;
};

struct Aabb {
    Vec2 min;
    Vec2 max;

    [[nodiscard]] bool contains(Vec2 p) const noexcept {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    [[nodiscard]] Vec2 extent() const noexcept { return max - min; }
    [[nodiscard]] Vec2 center() const noexcept { return (min + max) * 0.5; }
    friend bool operator==(const Aabb&, const Aabb&) = default;
};

// World-frame CCW vertices for box/polygon shapes; empty for disks.
std::vector<Vec2> world_vertices(const ShapeSpec& shape, const Pose2D& pose);
Aabb bounding_box(const ShapeSpec& shape, const Pose2D& pose);

// Closed footprint membership.
bool contains(const ShapeSpec& shape, const Pose2D& pose, Vec2 p);

// Negative inside the footprint.
double signed_distance(const ShapeSpec& shape, const Pose2D& pose, Vec2 p);

struct BoundaryPoint {
    Vec2 point;
    Vec2 outward_normal;
    double signed_distance{0};
};

// Nearest boundary point to p. Ties between polygon edges go to the point
// with the smallest polar angle in the body frame.
BoundaryPoint closest_boundary_point(const ShapeSpec& shape, const Pose2D& pose, Vec2 p);

// Signed separation between two footprints: gap when disjoint, minus the
// minimum translational penetration depth when overlapping.
double separation(const ShapeSpec& a, const Pose2D& pa, const ShapeSpec& b, const Pose2D& pb);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) noexcept;
Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) noexcept;

// Mirror about the world x-axis (y -> -y). Polygons keep CCW order.
ShapeSpec mirror_y(const ShapeSpec& shape);

} // namespace cpush
