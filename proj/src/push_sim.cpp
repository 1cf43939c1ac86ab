#include "clutterpush/push_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clutterpush/error.hpp"

namespace cpush {

namespace {

constexpr double kResolveTolerance = 1e-9;
constexpr int kMaxResolveIterations = 100;
constexpr int kBisectionIterations = 40;
constexpr double kBlockTolerance = 1e-6;
constexpr double kTouchGap = 1e-6;
constexpr double kContactStepTolerance = 1e-7;
constexpr int kMaxContactSplits = 12;

double clamp_component(double v, double cap) {
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, -cap, cap);
}

void apply_increment(Pose2D& pose, const Pose2D& inc) {
    pose.x += inc.x;
    pose.y += inc.y;
    pose.theta = normalize_angle(pose.theta + inc.theta);
}

// Pushes the pushee out of the EE disk until the overlap is below tolerance.
void resolve_ee_overlap(WorldState& w, const LimitSurfaceParams& params) {
    BodyState& pushee = w.pushee();
    const Vec2 ee = w.end_effector().pose.position();
    const double ee_r = w.end_effector().shape.radius;
    for (int it = 0; it < kMaxResolveIterations; ++it) {
        const BoundaryPoint bp = closest_boundary_point(pushee.shape, pushee.pose, ee);
        const double pen = ee_r - bp.signed_distance;
        if (pen <= kResolveTolerance) return;
        const Vec2 n = -bp.outward_normal;
        apply_increment(pushee.pose, resolve_push_contact(pushee, bp.point, n, n * pen, params));
    }
}

// Heun step for a pushee already touching the EE as the EE moves from e0 by
// d. Halves the step while the Euler/Heun difference is large, which
// happens when the contact rolls around a vertex. The overlap projection
// run afterwards only removes the small residue.
void advance_in_contact(WorldState& w, Vec2 e0, Vec2 d, const LimitSurfaceParams& params, int depth = 0) {
    BodyState& pushee = w.pushee();
    const double ee_r = w.end_effector().shape.radius;
    auto twist = [&](const Pose2D& q, Vec2 e, Pose2D& out) {
        const BoundaryPoint bp = closest_boundary_point(pushee.shape, q, e);
        if (bp.signed_distance - ee_r > kTouchGap || bp.signed_distance <= 0) return false;
        BodyState b = pushee;
        b.pose = q;
        out = resolve_push_contact(b, bp.point, -bp.outward_normal, d, params);
        return out.x != 0 || out.y != 0 || out.theta != 0;
    };
    Pose2D k1, k2;
    if (!twist(pushee.pose, e0, k1)) return;
    Pose2D mid = pushee.pose;
    apply_increment(mid, k1);
    // Losing contact inside the step also forces a split.
    const bool touching = twist(mid, e0 + d, k2);
    const double err = touching ? std::hypot(k2.x - k1.x, k2.y - k1.y) + params.c * std::abs(k2.theta - k1.theta)
                                : std::numeric_limits<double>::infinity();
    if (!touching && depth >= kMaxContactSplits) return;
    if (err > kContactStepTolerance && depth < kMaxContactSplits) {
        advance_in_contact(w, e0, d * 0.5, params, depth + 1);
        advance_in_contact(w, e0 + d * 0.5, d * 0.5, params, depth + 1);
        return;
    }
    apply_increment(pushee.pose, {0.5 * (k1.x + k2.x), 0.5 * (k1.y + k2.y), 0.5 * (k1.theta + k2.theta)});
}

// Fraction of the EE sweep e0 -> e0 + d at which it first touches the
// pushee; 1 when the end point is still clear.
double touch_fraction(const WorldState& w, Vec2 e0, Vec2 d) {
    const BodyState& pushee = w.pushee();
    const double ee_r = w.end_effector().shape.radius;
    auto gap = [&](double s) { return closest_boundary_point(pushee.shape, pushee.pose, e0 + d * s).signed_distance - ee_r; };
    if (gap(0) <= kTouchGap || gap(1) > 0) return gap(0) <= kTouchGap ? 0.0 : 1.0;
    double lo = 0, hi = 1;
    for (int k = 0; k < kBisectionIterations; ++k) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0 ? lo : hi) = mid;
    }
    return hi;
}

double min_obstacle_separation(const WorldState& w, const BodyState& body) {
    double best = std::numeric_limits<double>::infinity();
    for (const BodyState& b : w.bodies) {
        if (b.role != BodyRole::obstacle) continue;
        best = std::min(best, separation(body.shape, body.pose, b.shape, b.pose));
    }
    return best;
}

} // namespace

ActionDelta clamp_action(const ActionDelta& a, const ActionCaps& caps) {
    return {clamp_component(a.dx, caps.dxy_max), clamp_component(a.dy, caps.dxy_max),
            clamp_component(a.dtheta, caps.dtheta_max)};
}

Pose2D resolve_push_contact(const BodyState& pushee, Vec2 contact_point, Vec2 contact_normal, Vec2 ee_displacement,
                            const LimitSurfaceParams& params) {
    const double len = norm(contact_normal);
    if (!(len > 0) || !std::isfinite(len)) throw Error(ErrorCode::degenerate_contact, "contact normal has zero length");
    const Vec2 n = contact_normal / len;
    const double dn = dot(ee_displacement, n);
    // Frictionless point contact: only the normal component pushes, and a
    // receding EE exerts no force.
    if (dn <= 0) return {0, 0, 0};
    const Vec2 r = contact_point - pushee.pose.position();
    const double c2 = params.c * params.c;
    const double moment = cross(r, n);
    const double lambda = dn / (1.0 + moment * moment / c2);
    return {lambda * n.x, lambda * n.y, lambda * moment / c2};
}

ContactReport detect_contacts(const WorldState& world) {
    const BodyState& pushee = world.pushee();
    const BodyState& ee = world.end_effector();
    const double ee_obj = separation(ee.shape, ee.pose, pushee.shape, pushee.pose);
    const double obj_obs = min_obstacle_separation(world, pushee);
    const double ee_obs = min_obstacle_separation(world, ee);
    ContactReport rep;
    rep.ee_object = ee_obj <= kContactEpsilon;
    rep.object_obstacle = obj_obs <= kContactEpsilon;
    rep.ee_obstacle = ee_obs <= kContactEpsilon;
    // Unflagged pairs are all farther than any flagged one, so the overall
    // minimum equals the minimum over flagged categories whenever one exists.
    rep.min_separation = std::min({ee_obj, obj_obs, ee_obs});
    return rep;
}

bool check_out_of_bounds(const WorldState& world) {
    return !world.bounds.contains(world.pushee().pose.position());
}

StepOutcome step_ee(const WorldState& world, const ActionDelta& action, const LimitSurfaceParams& params) {
    const ActionDelta a = clamp_action(action, params.caps);
    StepOutcome out;
    out.world = world;
    WorldState& w = out.world;

    const double ee_r = w.end_effector().shape.radius;
    const double max_sub = std::min(params.max_substep, 0.5 * ee_r);
    const double travel = std::hypot(a.dx, a.dy);
    const int n_sub = std::max(1, static_cast<int>(std::ceil(travel / max_sub)));
    const Vec2 delta{a.dx / n_sub, a.dy / n_sub};

    auto attempt = [&](const WorldState& from, double fraction) {
        WorldState trial = from;
        const Vec2 e0 = trial.end_effector().pose.position();
        const Vec2 d = delta * fraction;
        const double s = touch_fraction(trial, e0, d);
        if (s < 1) advance_in_contact(trial, e0 + d * s, d * (1 - s), params);
        BodyState& ee = trial.end_effector();
        ee.pose.x += delta.x * fraction;
        ee.pose.y += delta.y * fraction;
        resolve_ee_overlap(trial, params);
        return trial;
    };
    // A trial is admissible if no obstacle overlap grew beyond tolerance.
    auto admissible = [&](const WorldState& from, const WorldState& trial) {
        for (std::size_t i = 0; i < trial.bodies.size(); ++i) {
            const BodyState& ob = trial.bodies[i];
            if (ob.role != BodyRole::obstacle) continue;
            const double before = separation(from.pushee().shape, from.pushee().pose, ob.shape, ob.pose);
            const double after = separation(trial.pushee().shape, trial.pushee().pose, ob.shape, ob.pose);
            if (after < std::min(-kBlockTolerance, before)) return false;
        }
        return true;
    };

    for (int i = 0; i < n_sub; ++i) {
        WorldState trial = attempt(w, 1.0);
        if (admissible(w, trial)) {
            w = std::move(trial);
            continue;
        }
        // Pushee jammed against an obstacle: advance the EE only as far as
        // the pushee can follow, then hold it for the rest of the step.
        double lo = 0.0, hi = 1.0;
        WorldState best = w;
        for (int k = 0; k < kBisectionIterations; ++k) {
            const double mid = 0.5 * (lo + hi);
            WorldState t = attempt(w, mid);
            if (admissible(w, t)) {
                lo = mid;
                best = std::move(t);
            } else {
                hi = mid;
            }
        }
        w = std::move(best);
        break;
    }

    BodyState& ee = w.end_effector();
    ee.pose.theta = normalize_angle(ee.pose.theta + a.dtheta);
    ++w.time_step_index;

    const ContactReport rep = detect_contacts(w);
    out.ee_object_contact = rep.ee_object;
    out.object_obstacle_collision = rep.object_obstacle;
    out.ee_obstacle_collision = rep.ee_obstacle;
    out.out_of_bounds = check_out_of_bounds(w);
    return out;
}

} // namespace cpush
