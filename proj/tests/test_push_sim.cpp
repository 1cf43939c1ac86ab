#include <doctest.h>

#include <cmath>
#include <limits>

#include "clutterpush/error.hpp"
#include "clutterpush/push_sim.hpp"
#include "clutterpush/rng.hpp"

using namespace cpush;
using doctest::Approx;

namespace {

WorldState two_body(ShapeSpec pushee, Pose2D pushee_pose, Pose2D ee_pose) {
    WorldState w;
    w.bounds = {{0, 0}, {1, 1}};
    w.bodies.push_back({pushee_pose, std::move(pushee), BodyRole::pushee});
    w.bodies.push_back(make_end_effector(ee_pose));
    w.goal = {0.9, 0.9, 0};
    return w;
}

double min_penetration(const WorldState& w) {
    const BodyState& p = w.pushee();
    const BodyState& e = w.end_effector();
    double worst = separation(e.shape, e.pose, p.shape, p.pose);
    for (const BodyState* o : w.obstacles()) worst = std::min(worst, separation(p.shape, p.pose, o->shape, o->pose));
    return worst;
}

} // namespace

TEST_SUITE("push_sim") {

TEST_CASE("actions are clamped componentwise") {
    const ActionDelta a = clamp_action({0.5, -0.5, 1.0});
    CHECK(a.dx == 0.01);
    CHECK(a.dy == -0.01);
    CHECK(a.dtheta == Approx(5.0 * std::numbers::pi / 180.0));
    const ActionDelta n = clamp_action({std::nan(""), 0.003, -std::numeric_limits<double>::infinity()});
    CHECK(n.dx == 0);
    CHECK(n.dy == 0.003);
    CHECK(n.dtheta == Approx(-5.0 * std::numbers::pi / 180.0));
}

TEST_CASE("contact resolution") {
    const BodyState disk{{0, 0, 0}, ShapeSpec::disk(0.05), BodyRole::pushee};
    LimitSurfaceParams params;
    CHECK_THROWS_AS(resolve_push_contact(disk, {-0.05, 0}, {0, 0}, {0.01, 0}, params), Error);
    // Receding EE does nothing.
    CHECK(resolve_push_contact(disk, {-0.05, 0}, {1, 0}, {-0.01, 0}, params) == Pose2D{0, 0, 0});
    // Central push: pure translation by the normal displacement.
    const Pose2D t = resolve_push_contact(disk, {-0.05, 0}, {1, 0}, {0.01, 0.004}, params);
    CHECK(t.x == Approx(0.01));
    CHECK(t.y == 0);
    CHECK(t.theta == 0);
    // Offset contact on a box turns it away from the contact.
    const BodyState box{{0, 0, 0}, ShapeSpec::box(0.05, 0.05), BodyRole::pushee};
    const Pose2D r = resolve_push_contact(box, {-0.05, 0.03}, {1, 0}, {0.01, 0}, params);
    CHECK(r.x > 0);
    CHECK(r.x < 0.01);
    CHECK(r.theta < 0);
    // Contact-point normal velocity matches the EE normal displacement.
    const double vn = r.x + (-r.theta * 0.03);
    CHECK(vn == Approx(0.01));
}

TEST_CASE("free EE motion leaves the pushee alone") {
    const WorldState w = two_body(ShapeSpec::box(0.025, 0.025), {0.5, 0.5, 0}, {0.2, 0.2, 0});
    const StepOutcome out = step_ee(w, {0.01, 0.0, 0.05});
    CHECK(out.world.pushee().pose == w.pushee().pose);
    CHECK(out.world.end_effector().pose.x == Approx(0.21));
    CHECK(out.world.end_effector().pose.theta == Approx(0.05));
    CHECK(out.world.time_step_index == 1);
    CHECK_FALSE(out.ee_object_contact);
}

TEST_CASE("center-line push of a disk does not rotate it") {
    WorldState w = two_body(ShapeSpec::disk(0.025), {0.5, 0.5, 0.3}, {0.5 - 0.035, 0.5, 0});
    for (int i = 0; i < 50; ++i) w = step_ee(w, {0.01, 0, 0}).world;
    CHECK(w.pushee().pose.theta == 0.3);
    CHECK(w.pushee().pose.y == 0.5);
    CHECK(w.pushee().pose.x > 0.8);
}

TEST_CASE("pushing is blocked by obstacles without penetration") {
    WorldState w = two_body(ShapeSpec::box(0.025, 0.025), {0.5, 0.5, 0}, {0.5 - 0.036, 0.5, 0});
    w.bodies.push_back({{0.65, 0.5, 0}, ShapeSpec::box(0.05, 0.2), BodyRole::obstacle});
    const BodyState obstacle = w.bodies.back();
    bool collided = false;
    for (int i = 0; i < 30; ++i) {
        const StepOutcome out = step_ee(w, {0.01, 0, 0});
        w = out.world;
        collided = collided || out.object_obstacle_collision;
        CHECK(min_penetration(w) >= -kPenetrationTolerance);
        CHECK(w.bodies.back() == obstacle);
    }
    CHECK(collided);
    CHECK(w.pushee().pose.x <= 0.6 - 0.025 + kPenetrationTolerance);
}

TEST_CASE("out of bounds") {
    WorldState w = two_body(ShapeSpec::disk(0.025), {0.99, 0.5, 0}, {0.99 - 0.036, 0.5, 0});
    CHECK_FALSE(check_out_of_bounds(w));
    bool oob = false;
    for (int i = 0; i < 5 && !oob; ++i) {
        const StepOutcome out = step_ee(w, {0.01, 0, 0});
        w = out.world;
        oob = out.out_of_bounds;
    }
    CHECK(oob);
}

TEST_CASE("sub-step refinement converges") {
    LimitSurfaceParams coarse, fine;
    fine.max_substep = coarse.max_substep / 100.0;
    for (const ShapeSpec& shape : {ShapeSpec::box(0.025, 0.025), ShapeSpec::disk(0.025), ShapeSpec::box(0.04, 0.02)}) {
        WorldState a = two_body(shape, {0.3, 0.5, 0.2}, {0.25, 0.515, 0});
        WorldState b = a;
        Rng rng(17);
        for (int i = 0; i < 100; ++i) {
            const ActionDelta act{0.01, rng.uniform(-0.002, 0.002), 0};
            a = step_ee(a, act, coarse).world;
            b = step_ee(b, act, fine).world;
        }
        CHECK(distance(a.pushee().pose.position(), b.pushee().pose.position()) <= 1e-3);
        CHECK(std::abs(normalize_angle(a.pushee().pose.theta - b.pushee().pose.theta)) <= 1e-2);
    }
}

TEST_CASE("detect_contacts flags and minimum separation") {
    WorldState w = two_body(ShapeSpec::disk(0.025), {0.5, 0.5, 0}, {0.5 - 0.0355, 0.5, 0});
    w.bodies.push_back({{0.5, 0.6, 0}, ShapeSpec::disk(0.074), BodyRole::obstacle});
    const ContactReport rep = detect_contacts(w);
    CHECK(rep.ee_object);
    CHECK(rep.object_obstacle);
    CHECK_FALSE(rep.ee_obstacle);
    CHECK(rep.min_separation == Approx(0.0005));
}

}
