#include "clutterpush/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clutterpush/error.hpp"

namespace cpush {

namespace {

struct Projection {
    double arc{0};
    double dist{std::numeric_limits<double>::infinity()};
};

Projection project_onto(const Path& path, Vec2 p) {
    const auto& w = path.waypoints;
    Projection best;
    if (w.size() == 1) return {0, distance(w[0], p)};
    double acc = 0;
    for (std::size_t i = 1; i < w.size(); ++i) {
        const Vec2 q = closest_point_on_segment(p, w[i - 1], w[i]);
        const double d = distance(q, p);
        if (d < best.dist) best = {acc + distance(w[i - 1], q), d};
        acc += distance(w[i - 1], w[i]);
    }
    return best;
}

// Scales v so its norm does not exceed cap.
Vec2 limit_norm(Vec2 v, double cap) {
    const double n = norm(v);
    return n > cap ? v * (cap / n) : v;
}

} // namespace

ControllerParams ControllerParams::for_pushee(const ShapeSpec& pushee, double ee_radius) {
    ControllerParams p;
    const double rc = pushee.circumscribed_radius();
    p.relocate_radius = rc + 2 * ee_radius + 0.01;
    p.approach_distance = rc + ee_radius;
    p.costmap_inflation = rc;
    return p;
}

void ControllerParams::validate() const {
    if (!(psi_relocate_threshold >= 0 && psi_relocate_threshold <= 1))
        throw Error(ErrorCode::invalid_argument, "psi_relocate_threshold must lie in [0, 1]");
    if (!(gain_push > 0) || !(gain_relocate > 0)) throw Error(ErrorCode::invalid_argument, "gains must be positive");
    if (!(relocate_radius > 0) || !(approach_distance >= 0) || !(costmap_inflation >= 0) || !(costmap_falloff > 0) ||
        !(costmap_weight >= 0) || !(push_speed >= 0) || !(replan_deviation > 0))
        throw Error(ErrorCode::invalid_argument, "controller distances out of range");
}

CostGrid build_costmap(const OccupancyGrid& grid, const ControllerParams& params) {
    CostGrid out{grid.geom, std::vector<double>(grid.geom.size(), 1.0)};
    const std::vector<std::int64_t> d2 = squared_distance_field(grid);
    const double res = grid.geom.resolution;
    const double lethal2 = (params.costmap_inflation / res) * (params.costmap_inflation / res) * (1 + 1e-12);
    for (std::size_t i = 0; i < d2.size(); ++i) {
        if (d2[i] == kernels::kNoObstacle) continue;
        const auto dc = static_cast<double>(d2[i]);
        if (dc <= lethal2) {
            out.cost[i] = std::numeric_limits<double>::infinity();
        } else {
            out.cost[i] = 1.0 + params.costmap_weight * std::exp(-std::sqrt(dc) * res / params.costmap_falloff);
        }
    }
    return out;
}

double relocation_activation(Vec2 ee_pos, Vec2 pushee_pos, Vec2 push_dir) {
    const Vec2 q = pushee_pos - ee_pos;
    const double n = norm(q);
    if (!(n > 0)) throw Error(ErrorCode::degenerate_geometry, "EE and pushee coincide");
    const double dn = norm(push_dir);
    if (!(dn > 0)) throw Error(ErrorCode::degenerate_geometry, "push direction has zero length");
    const double c = std::clamp(dot(q, push_dir) / (n * dn), -1.0, 1.0);
    return 0.5 * (1.0 - c);
}

Vec2 push_direction(const Path& path, Vec2 pushee_pos) {
    if (path.waypoints.empty()) throw Error(ErrorCode::empty_path, "path has no waypoints");
    const double total = path_length(path);
    const Projection pr = project_onto(path, pushee_pos);
    const double remaining = std::max(0.0, total - pr.arc);
    Path tmp{path.waypoints, total};
    for (const Vec2 look : {point_at_arc_length(tmp, pr.arc + kSubgoalFraction * remaining), path.waypoints.back()}) {
        const Vec2 d = look - pushee_pos;
        const double n = norm(d);
        if (n > 1e-9) return d / n;
    }
    return {1, 0};
}

ControlTerms control_step_terms(const WorldState& world, const Path& cost_path, const ControllerParams& params,
                                const ActionCaps& caps) {
    const BodyState& ee = world.end_effector();
    const Vec2 p = world.pushee().pose.position();
    const Vec2 e = ee.pose.position();

    ControlTerms out;
    out.push_dir = push_direction(cost_path, p);
    const Vec2 d = out.push_dir;
    out.psi = relocation_activation(e, p, d);

    const Vec2 q = e - p;
    const double rho = norm(q);
    const Vec2 er = q / rho;
    // Circle toward the side behind the pushee, the short way round.
    const double side = cross(er, -d) >= 0 ? 1.0 : -1.0;
    const Vec2 tangent = perp(er) * side;
    // Arc length along the relocation circle to the point behind the pushee.
    const double arc = params.relocate_radius * std::acos(std::clamp(dot(er, -d), -1.0, 1.0));

    Vec2 v;
    if (out.psi >= params.psi_relocate_threshold) {
        out.relocating = true;
        v = (tangent * std::max(arc, caps.dxy_max) + er * std::max(0.0, params.relocate_radius - rho)) * params.gain_relocate;
    } else {
        // Track the contact point laterally; along the push axis close any
        // lag behind it and keep pressing forward at push_speed.
        const Vec2 to_target = p - d * params.approach_distance - e;
        const double along = dot(to_target, d);
        const Vec2 lateral = to_target - d * along;
        const Vec2 push = (lateral + d * (std::max(0.0, along) + params.push_speed)) * params.gain_push;
        const Vec2 reloc = (tangent * arc + er * (params.relocate_radius - rho)) * params.gain_relocate;
        v = push * (1.0 - out.psi) + reloc * out.psi;
    }
    v = limit_norm(v, caps.dxy_max);

    const double heading = std::atan2(d.y, d.x);
    out.action = clamp_action({v.x, v.y, normalize_angle(heading - ee.pose.theta)}, caps);
    if (out.relocating) {
        // The tangent is only orthogonal up to round-off; bias any leftover
        // inward component outward so the branch never closes in.
        double bias = 1e-12 * caps.dxy_max;
        for (int i = 0; i < 64 && dot(Vec2{out.action.dx, out.action.dy}, p - e) > 0; ++i, bias *= 2) {
            out.action = clamp_action({out.action.dx + er.x * bias, out.action.dy + er.y * bias, out.action.dtheta}, caps);
        }
    }
    return out;
}

ActionDelta control_step(const WorldState& world, const Path& cost_path, const ControllerParams& params,
                         const ActionCaps& caps) {
    return control_step_terms(world, cost_path, params, caps).action;
}

void BaselineController::begin(const PushEnv& env) {
    params_ = fixed_ ? *fixed_ : ControllerParams::for_pushee(env.world().pushee().shape,
                                                                env.world().end_effector().shape.radius);
    params_.validate();
    grid_ = env.obstacle_grid();
    costs_ = build_costmap(grid_, params_);
    path_ = {};
    replan(env);
    if (path_.empty()) throw Error(ErrorCode::no_path, "baseline: no weighted path to the goal");
}

void BaselineController::replan(const PushEnv& env) {
    PlanOptions opt;
    opt.snap_radius_cells = env.config().snap_radius_cells;
    opt.costs = &costs_;
    try {
        path_ = plan_path(grid_, env.world().pushee().pose.position(), env.world().goal.position(), opt);
    } catch (const Error&) {
        // keep the latched path
    }
}

ControlTerms BaselineController::act(const PushEnv& env) {
    const Vec2 p = env.world().pushee().pose.position();
    if (project_onto(path_, p).dist > params_.replan_deviation) replan(env);
    return control_step_terms(env.world(), path_, params_, env.config().dynamics.caps);
}

} // namespace cpush
