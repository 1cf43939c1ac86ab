#include "clutterpush/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "clutterpush/error.hpp"
#include "clutterpush/perception.hpp"
#include "clutterpush/planner.hpp"
#include "clutterpush/push_sim.hpp"
#include "clutterpush/rng.hpp"

namespace cpush {

namespace sd = scenario_defaults;

namespace {

constexpr double kPi = std::numbers::pi;

template <typename Body, typename World>
Body& find_role(World& w, BodyRole role, const char* name) {
    for (auto& b : w.bodies) {
        if (b.role == role) return b;
    }
    throw Error(ErrorCode::invalid_argument, std::string("world has no ") + name);
}

constexpr std::array<std::pair<SuiteId, std::string_view>, 9> kSuiteNames{{
    {SuiteId::free_space, "free_space"},
    {SuiteId::env_a, "env_a"},
    {SuiteId::env_b, "env_b"},
    {SuiteId::env_c, "env_c"},
    {SuiteId::env_d, "env_d"},
    {SuiteId::env_e, "env_e"},
    {SuiteId::complex_1, "complex_1"},
    {SuiteId::complex_2, "complex_2"},
    {SuiteId::custom, "custom"},
}};

double default_gap(SuiteId id) {
    switch (id) {
    case SuiteId::env_c: return 0.20;
    case SuiteId::env_d: return 0.15;
    case SuiteId::env_e: return 0.10;
    default: return 0.0;
    }
}

bool is_gap_suite(SuiteId id) { return id == SuiteId::env_c || id == SuiteId::env_d || id == SuiteId::env_e; }
bool is_complex_suite(SuiteId id) { return id == SuiteId::complex_1 || id == SuiteId::complex_2; }

Aabb shrink(const Aabb& b, double m) { return {b.min + Vec2{m, m}, b.max - Vec2{m, m}}; }

BodyState obstacle(ShapeSpec shape, Pose2D pose) { return {pose, std::move(shape), BodyRole::obstacle}; }

bool inside_bounds(const BodyState& b, const Aabb& bounds) {
    const Aabb box = bounding_box(b.shape, b.pose);
    return bounds.contains(box.min) && bounds.contains(box.max);
}

std::vector<BodyState> single_rotated(const ScenarioSpec& spec, Rng& rng, Vec2 nominal_half) {
    const Vec2 c = spec.workspace.center();
    const double yaw = spec.obstacle_params.yaw.value_or(rng.uniform(-kPi / 2, kPi / 2));
    const double scale = spec.obstacle_params.scale.value_or(rng.uniform(sd::kScaleMin, sd::kScaleMax));
    const Vec2 offset{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
    return {obstacle(ShapeSpec::box(nominal_half.x * scale, nominal_half.y * scale),
                     {c.x + offset.x, c.y + offset.y, normalize_angle(yaw)})};
}

std::vector<BodyState> gap_pair(const ScenarioSpec& spec, Rng& rng) {
    const Vec2 c = spec.workspace.center();
    const double gap = spec.obstacle_params.gap.value_or(default_gap(spec.suite_id));
    const double yaw = normalize_angle(spec.obstacle_params.yaw.value_or(rng.uniform(-kPi / 4, kPi / 4)));
    const double scale = spec.obstacle_params.scale.value_or(1.0);
    const Vec2 half{0.12 * scale, 0.04 * scale};
    const Vec2 offset{rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03)};
    const Vec2 axis = rotate({gap / 2 + half.x, 0}, yaw);
    const Vec2 mid = c + offset;
    return {obstacle(ShapeSpec::box(half.x, half.y), {mid.x - axis.x, mid.y - axis.y, yaw}),
            obstacle(ShapeSpec::box(half.x, half.y), {mid.x + axis.x, mid.y + axis.y, yaw})};
}

std::vector<BodyState> cluttered(const ScenarioSpec& spec, Rng& rng) {
    const int count = spec.obstacle_params.count.value_or(spec.suite_id == SuiteId::complex_1 ? 6 : 9);
    const double corridor = sd::kCorridorFactor * spec.pushee_shape.circumscribed_diameter();
    const Aabb region = shrink(spec.workspace, 0.15);
    std::vector<BodyState> out;
    // Greedy placement can wedge itself; start the layout over when a pass
    // stalls.
    for (int layout = 0; layout < sd::kMaxObstacleLayouts && static_cast<int>(out.size()) < count; ++layout) {
        out.clear();
        for (int attempt = 0; attempt < sd::kMaxObstacleAttempts && static_cast<int>(out.size()) < count; ++attempt) {
            ShapeSpec shape;
            if (rng.uniform() < 0.5) {
                const double hx = rng.uniform(0.03, 0.07);
                const double hy = rng.uniform(0.02, 0.05);
                shape = ShapeSpec::box(hx, hy);
            } else {
                shape = ShapeSpec::disk(rng.uniform(0.03, 0.05));
            }
            const Pose2D pose{rng.uniform(region.min.x, region.max.x), rng.uniform(region.min.y, region.max.y),
                              rng.uniform(-kPi, kPi)};
            BodyState cand = obstacle(std::move(shape), pose);
            if (!inside_bounds(cand, spec.workspace)) continue;
            const bool ok = std::all_of(out.begin(), out.end(), [&](const BodyState& o) {
                return separation(cand.shape, cand.pose, o.shape, o.pose) >= corridor;
            });
            if (ok) out.push_back(std::move(cand));
        }
    }
    if (static_cast<int>(out.size()) < count)
        throw Error(ErrorCode::invalid_scenario, "could not place " + std::to_string(count) + " obstacles with corridor " +
                                                     std::to_string(corridor) + " m within the attempt budget");
    return out;
}

std::vector<BodyState> build_obstacles(const ScenarioSpec& spec, Rng& rng) {
    switch (spec.suite_id) {
    case SuiteId::free_space: return {};
    case SuiteId::env_a: return single_rotated(spec, rng, {0.10, 0.03});
    case SuiteId::env_b: return single_rotated(spec, rng, {0.16, 0.02});
    case SuiteId::env_c:
    case SuiteId::env_d:
    case SuiteId::env_e: return gap_pair(spec, rng);
    case SuiteId::complex_1:
    case SuiteId::complex_2: return cluttered(spec, rng);
    case SuiteId::custom: {
        std::vector<BodyState> out;
        for (const ObstacleDef& d : spec.obstacle_params.obstacles) out.push_back(obstacle(d.shape, d.pose));
        return out;
    }
    }
    throw Error(ErrorCode::unknown_suite, "unknown suite");
}

bool clear_of_obstacles(const WorldState& w, const ShapeSpec& shape, const Pose2D& pose, double margin) {
    for (const BodyState& b : w.bodies) {
        if (b.role != BodyRole::obstacle) continue;
        if (separation(shape, pose, b.shape, b.pose) <= margin) return false;
    }
    return true;
}

bool grid_free(const OccupancyGrid& grid, Vec2 p) {
    const Vec2 g = grid.geom.to_grid(p);
    return !grid.blocked(static_cast<int>(std::floor(g.y)), static_cast<int>(std::floor(g.x)));
}

} // namespace

const BodyState& WorldState::pushee() const { return find_role<const BodyState>(*this, BodyRole::pushee, "pushee"); }
BodyState& WorldState::pushee() { return find_role<BodyState>(*this, BodyRole::pushee, "pushee"); }
const BodyState& WorldState::end_effector() const {
    return find_role<const BodyState>(*this, BodyRole::end_effector, "end effector");
}
BodyState& WorldState::end_effector() { return find_role<BodyState>(*this, BodyRole::end_effector, "end effector"); }

std::vector<const BodyState*> WorldState::obstacles() const {
    std::vector<const BodyState*> out;
    for (const BodyState& b : bodies) {
        if (b.role == BodyRole::obstacle) out.push_back(&b);
    }
    return out;
}

std::string_view to_string(SuiteId id) noexcept {
    for (const auto& [k, name] : kSuiteNames) {
        if (k == id) return name;
    }
    return "unknown";
}

SuiteId parse_suite(std::string_view name) {
    for (const auto& [k, n] : kSuiteNames) {
        if (n == name) return k;
    }
    throw Error(ErrorCode::unknown_suite, "unknown suite '" + std::string(name) + "'");
}

const std::vector<NamedShape>& pushee_catalogue() {
    static const std::vector<NamedShape> catalogue = [] {
        // Fragment: six irregularly spaced vertices on a 0.035 m circle.
        constexpr std::array<double, 6> deg{0, 55, 118, 175, 240, 300};
        std::vector<Vec2> frag;
        for (double d : deg) frag.push_back(rotate({0.035, 0}, d * kPi / 180.0));
        return std::vector<NamedShape>{
            {"small_cube", ShapeSpec::box(0.025, 0.025)},
            {"large_cube", ShapeSpec::box(0.04, 0.04)},
            {"small_cylinder", ShapeSpec::disk(0.025)},
            {"fragment", ShapeSpec::polygon(std::move(frag))},
        };
    }();
    return catalogue;
}

ShapeSpec pushee_shape(std::string_view name) {
    for (const NamedShape& s : pushee_catalogue()) {
        if (s.name == name) return s.shape;
    }
    throw Error(ErrorCode::invalid_argument, "unknown pushee '" + std::string(name) + "'");
}

std::string pushee_name(const ShapeSpec& shape) {
    for (const NamedShape& s : pushee_catalogue()) {
        if (s.shape == shape) return s.name;
    }
    return "custom";
}

void validate_spec(const ScenarioSpec& spec) {
    try {
        spec.pushee_shape.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_scenario, std::string("pushee shape: ") + e.what());
    }
    const Vec2 ext = spec.workspace.extent();
    if (!(ext.x > 0) || !(ext.y > 0)) throw Error(ErrorCode::invalid_scenario, "workspace must have positive extent");
    const ObstacleParams& p = spec.obstacle_params;
    if (p.scale && !(*p.scale > 0)) throw Error(ErrorCode::invalid_scenario, "obstacle scale must be positive");
    if (is_gap_suite(spec.suite_id)) {
        const double gap = p.gap.value_or(default_gap(spec.suite_id));
        if (gap < sd::kGapMin - 1e-12 || gap > sd::kGapMax + 1e-12)
            throw Error(ErrorCode::invalid_scenario, "inter-obstacle gap must lie in [0.10, 0.20] m");
    }
    if (is_complex_suite(spec.suite_id) && p.count && *p.count < 4)
        throw Error(ErrorCode::invalid_scenario, "complex suites need at least 4 obstacles");
    if (spec.suite_id == SuiteId::custom) {
        for (const ObstacleDef& d : p.obstacles) {
            try {
                d.shape.validate();
            } catch (const Error& e) {
                throw Error(ErrorCode::invalid_scenario, std::string("obstacle shape: ") + e.what());
            }
        }
    }
}

std::optional<std::string> check_world(const WorldState& world) {
    int n_pushee = 0, n_ee = 0;
    for (const BodyState& b : world.bodies) {
        n_pushee += b.role == BodyRole::pushee;
        n_ee += b.role == BodyRole::end_effector;
        if (!std::isfinite(b.pose.x) || !std::isfinite(b.pose.y) || !std::isfinite(b.pose.theta))
            return "non-finite pose";
    }
    if (n_pushee != 1) return "world needs exactly one pushee";
    if (n_ee != 1) return "world needs exactly one end effector";
    const BodyState& pushee = world.pushee();
    const double r = pushee.shape.circumscribed_radius();
    if (!shrink(world.bounds, r).contains(pushee.pose.position())) return "pushee lacks clearance from the bounds";
    const auto obs = world.obstacles();
    for (std::size_t i = 0; i < obs.size(); ++i) {
        for (std::size_t j = i + 1; j < obs.size(); ++j) {
            if (separation(obs[i]->shape, obs[i]->pose, obs[j]->shape, obs[j]->pose) < 0) return "obstacles overlap";
        }
        if (separation(obs[i]->shape, obs[i]->pose, pushee.shape, pushee.pose) < 0) return "pushee overlaps an obstacle";
    }
    return std::nullopt;
}

BodyState make_end_effector(Pose2D pose, double radius) {
    return {pose, ShapeSpec::disk(radius), BodyRole::end_effector};
}

WorldState make_scenario(const ScenarioSpec& spec) {
    validate_spec(spec);
    Rng rng(mix_seed(spec.rng_seed, 1));

    WorldState w;
    w.bounds = spec.workspace;
    w.bodies = build_obstacles(spec, rng);
    {
        const auto obs = w.obstacles();
        for (std::size_t i = 0; i < obs.size(); ++i)
            for (std::size_t j = i + 1; j < obs.size(); ++j)
                if (separation(obs[i]->shape, obs[i]->pose, obs[j]->shape, obs[j]->pose) < 0)
                    throw Error(ErrorCode::invalid_scenario, "obstacles overlap");
    }

    const double r = spec.pushee_shape.circumscribed_radius();
    const Aabb inner = shrink(w.bounds, r);
    std::optional<Pose2D> pushee_pose;
    for (int attempt = 0; attempt < sd::kMaxObstacleAttempts && !pushee_pose; ++attempt) {
        const Pose2D p{rng.uniform(inner.min.x, inner.max.x), rng.uniform(inner.min.y, inner.max.y), rng.uniform(-kPi, kPi)};
        if (clear_of_obstacles(w, spec.pushee_shape, p, 0.0)) pushee_pose = p;
    }
    if (!pushee_pose) throw Error(ErrorCode::invalid_scenario, "no obstacle-free pose for the pushee");
    w.bodies.push_back({*pushee_pose, spec.pushee_shape, BodyRole::pushee});
    w.goal = *pushee_pose;

    w.bodies.push_back(make_end_effector({inner.min.x, inner.min.y, 0}));
    try {
        w.end_effector().pose = sample_ee_pose(w, sd::kEeRingMin, sd::kEeRingMax, mix_seed(spec.rng_seed, 2));
    } catch (const Error&) {
        throw Error(ErrorCode::invalid_scenario, "no collision-free EE pose near the pushee");
    }
    return w;
}

std::vector<ScenarioSpec> scenario_suite(SuiteId suite) {
    if (to_string(suite) == "unknown") throw Error(ErrorCode::unknown_suite, "unknown suite id");
    std::vector<ScenarioSpec> out;
    for (const NamedShape& s : pushee_catalogue()) {
        ScenarioSpec spec;
        spec.suite_id = suite;
        spec.pushee_shape = s.shape;
        if (is_gap_suite(suite)) spec.obstacle_params.gap = default_gap(suite);
        out.push_back(std::move(spec));
    }
    return out;
}

StartGoal sample_start_goal(const WorldState& world, double d_min, double d_max, std::uint64_t rng_seed) {
    if (!(d_min >= 0) || !(d_min <= d_max)) throw Error(ErrorCode::invalid_argument, "need 0 <= d_min <= d_max");
    const BodyState& pushee = world.pushee();
    const double r = pushee.shape.circumscribed_radius();
    const Aabb inner = shrink(world.bounds, r);
    const OccupancyGrid grid = planning_grid(world);
    Rng rng(rng_seed);

    for (int attempt = 0; attempt < sd::kMaxStartGoalAttempts; ++attempt) {
        const Vec2 s{rng.uniform(inner.min.x, inner.max.x), rng.uniform(inner.min.y, inner.max.y)};
        const double d = d_min == d_max ? d_min : rng.uniform(d_min, d_max);
        const double phi = rng.uniform(-kPi, kPi);
        const Vec2 g = s + Vec2{std::cos(phi), std::sin(phi)} * d;
        const Pose2D start{s.x, s.y, rng.uniform(-kPi, kPi)};
        const Pose2D goal{g.x, g.y, rng.uniform(-kPi, kPi)};
        if (!inner.contains(g)) continue;
        if (!clear_of_obstacles(world, pushee.shape, start, 0.0) || !clear_of_obstacles(world, pushee.shape, goal, 0.0))
            continue;
        if (!grid_free(grid, s) || !grid_free(grid, g)) continue;
        try {
            (void)plan_path(grid, s, g);
        } catch (const Error&) {
            continue;
        }
        return {start, goal};
    }
    throw Error(ErrorCode::no_valid_placement, "no valid start/goal pair within the sampling budget");
}

Pose2D sample_ee_pose(const WorldState& world, double ring_min, double ring_max, std::uint64_t rng_seed) {
    const BodyState& pushee = world.pushee();
    const BodyState& ee = world.end_effector();
    const double ee_r = ee.shape.radius;
    const Aabb inner = shrink(world.bounds, ee_r);
    Rng rng(rng_seed);
    for (int attempt = 0; attempt < sd::kMaxStartGoalAttempts; ++attempt) {
        const double rad = rng.uniform(ring_min, ring_max);
        const double ang = rng.uniform(-kPi, kPi);
        const Vec2 p = pushee.pose.position() + Vec2{std::cos(ang), std::sin(ang)} * rad;
        const Pose2D pose{p.x, p.y, normalize_angle(ang + kPi)};
        if (!inner.contains(p)) continue;
        if (separation(ee.shape, pose, pushee.shape, pushee.pose) <= kContactEpsilon) continue;
        if (!clear_of_obstacles(world, ee.shape, pose, kContactEpsilon)) continue;
        return pose;
    }
    throw Error(ErrorCode::no_valid_placement, "no collision-free EE pose on the ring");
}

WorldState translate_world(const WorldState& world, Vec2 offset) {
    WorldState out = world;
    for (BodyState& b : out.bodies) {
        b.pose.x += offset.x;
        b.pose.y += offset.y;
    }
    out.bounds = {world.bounds.min + offset, world.bounds.max + offset};
    out.goal.x += offset.x;
    out.goal.y += offset.y;
    return out;
}

WorldState mirror_world(const WorldState& world) {
    WorldState out = world;
    for (BodyState& b : out.bodies) {
        b.pose.y = -b.pose.y;
        b.pose.theta = normalize_angle(-b.pose.theta);
        b.shape = mirror_y(b.shape);
    }
    out.bounds = {{world.bounds.min.x, -world.bounds.max.y}, {world.bounds.max.x, -world.bounds.min.y}};
    out.goal = {world.goal.x, -world.goal.y, normalize_angle(-world.goal.theta)};
    return out;
}

} // namespace cpush
