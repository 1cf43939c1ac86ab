#include <doctest.h>

#include <cmath>
#include <limits>

#include "clutterpush/baseline.hpp"
#include "clutterpush/bench.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cpush;
using doctest::Approx;
using testutil::code_of;

namespace {

WorldState simple_world(Pose2D pushee, Vec2 ee, Vec2 goal) {
    WorldState w;
    w.bodies.push_back({pushee, ShapeSpec::box(0.025, 0.025), BodyRole::pushee});
    w.bodies.push_back(make_end_effector({ee.x, ee.y, 0}));
    w.goal = {goal.x, goal.y, 0};
    return w;
}

} // namespace

TEST_SUITE("baseline") {

TEST_CASE("relocation activation") {
    const Vec2 p{0.5, 0.5};
    const Vec2 d{1, 0};
    CHECK(relocation_activation({0.4, 0.5}, p, d) == 0.0);
    CHECK(relocation_activation({0.6, 0.5}, p, d) == 1.0);
    CHECK(relocation_activation({0.5, 0.6}, p, d) == Approx(0.5).epsilon(1e-15));
    CHECK(relocation_activation({0.5, 0.4}, p, {3, 0}) == Approx(0.5).epsilon(1e-15));
    CHECK(relocation_activation({0.4, 0.4}, p, d) == Approx(0.5 * (1 - std::sqrt(0.5))));
    CHECK(code_of([&] { relocation_activation(p, p, d); }) == ErrorCode::degenerate_geometry);
    CHECK(code_of([&] { relocation_activation({0.4, 0.5}, p, {0, 0}); }) == ErrorCode::degenerate_geometry);
}

TEST_CASE("push direction follows the path") {
    const Path straight{{{0, 0}, {1, 0}}, 1};
    CHECK(push_direction(straight, {0, 0}) == Vec2{1, 0});
    const Path bend{{{0, 0}, {0.1, 0}, {0.1, 1}}, 1.1};
    const Vec2 d = push_direction(bend, {0.1, 0});
    CHECK(d.x == Approx(0));
    CHECK(d.y == Approx(1));
    // Lookahead from the projection of an off-path pushee.
    const Vec2 off = push_direction(straight, {0.5, 0.1});
    CHECK(off.x == Approx(0.1 / std::hypot(0.1, 0.1)));
    CHECK(off.y == Approx(-0.1 / std::hypot(0.1, 0.1)));
    CHECK(push_direction(straight, {1, 0}) == Vec2{1, 0});
    CHECK(push_direction(Path{{{2, 2}}, 0}, {2, 2}) == Vec2{1, 0});
    CHECK(code_of([] { push_direction(Path{}, {0, 0}); }) == ErrorCode::empty_path);
}

TEST_CASE("cost map matches a brute-force distance check") {
    Rng rng(19);
    ControllerParams params;
    params.costmap_inflation = 0.035;
    for (int trial = 0; trial < 10; ++trial) {
        const OccupancyGrid g = testutil::random_grid(rng, 24, 24, 0.04, 0.01);
        const CostGrid cm = build_costmap(g, params);
        const OccupancyGrid lethal = oracle::brute_inflate(g, params.costmap_inflation);
        for (int r = 0; r < 24; ++r) {
            for (int c = 0; c < 24; ++c) {
                CHECK(std::isinf(cm.at(r, c)) == lethal.occupied(r, c));
                if (lethal.occupied(r, c)) continue;
                double best = std::numeric_limits<double>::infinity();
                for (int rr = 0; rr < 24; ++rr)
                    for (int cc = 0; cc < 24; ++cc)
                        if (g.occupied(rr, cc)) best = std::min(best, std::hypot(rr - r, cc - c) * 0.01);
                const double expected = std::isinf(best) ? 1.0 : 1.0 + std::exp(-best / params.costmap_falloff);
                CHECK(cm.at(r, c) == Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("geometry-derived parameters") {
    const ControllerParams p = ControllerParams::for_pushee(ShapeSpec::box(0.025, 0.025));
    const double rc = 0.025 * std::sqrt(2.0);
    CHECK(p.relocate_radius == Approx(rc + 0.03));
    CHECK(p.approach_distance == Approx(rc + 0.01));
    CHECK(p.costmap_inflation == Approx(rc));
    CHECK(p.psi_relocate_threshold == 0.6);
    const ControllerParams d;
    CHECK(d.relocate_radius == Approx(p.relocate_radius).epsilon(1e-3));
    CHECK(d.approach_distance == Approx(p.approach_distance).epsilon(1e-3));
    auto invalid = [](auto&& edit) {
        ControllerParams c;
        edit(c);
        return code_of([&] { c.validate(); }) == ErrorCode::invalid_argument;
    };
    CHECK(invalid([](ControllerParams& c) { c.psi_relocate_threshold = 1.5; }));
    CHECK(invalid([](ControllerParams& c) { c.gain_push = 0; }));
    CHECK(invalid([](ControllerParams& c) { c.costmap_falloff = 0; }));
    CHECK(invalid([](ControllerParams& c) { c.replan_deviation = 0; }));
    CHECK_NOTHROW(ControllerParams{}.validate());
}

TEST_CASE("relocation never pushes toward the pushee") {
    Rng rng(44);
    const ControllerParams params = ControllerParams::for_pushee(ShapeSpec::box(0.025, 0.025));
    int relocating = 0;
    for (int i = 0; i < 5000; ++i) {
        const Vec2 p{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
        const double a = rng.uniform(-3.14, 3.14), rho = rng.uniform(0.04, 0.12);
        const Vec2 e = p + Vec2{std::cos(a), std::sin(a)} * rho;
        const WorldState w = simple_world({p.x, p.y, 0}, e, {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)});
        const Path path{{p, w.goal.position()}, distance(p, w.goal.position())};
        if (path.length < 1e-6) continue;
        const ControlTerms t = control_step_terms(w, path, params);
        CHECK(t.relocating == (t.psi >= 0.6));
        CHECK(std::hypot(t.action.dx, t.action.dy) <= 0.01 + 1e-15);
        if (t.relocating) {
            ++relocating;
            CHECK(dot(Vec2{t.action.dx, t.action.dy}, p - e) <= 0.0);
        }
    }
    CHECK(relocating > 500);
}

TEST_CASE("pushing from behind moves along the push direction") {
    const WorldState w = simple_world({0.5, 0.5, 0}, {0.5 - 0.0454, 0.5}, {0.8, 0.5});
    const Path path{{{0.5, 0.5}, {0.8, 0.5}}, 0.3};
    const ControlTerms t = control_step_terms(w, path, ControllerParams::for_pushee(w.pushee().shape));
    CHECK(t.psi == 0.0);
    CHECK_FALSE(t.relocating);
    CHECK(t.action.dx == Approx(0.01));
    CHECK(t.action.dy == Approx(0).scale(1));
    CHECK(t.action.dtheta == 0.0);
}

TEST_CASE("controller reaches a free-space goal") {
    PushEnv env;
    EpisodeConfig cfg;
    env.reset(simple_world({0.3, 0.5, 0.4}, {0.4, 0.56}, {0.65, 0.35}), cfg);
    BaselinePolicy policy;
    policy.begin(env);
    StepResult r;
    while (!env.done()) r = env.step(policy.act(env, env.observation()));
    CHECK(r.info.goal_reached);
    CHECK(policy.branch_violations() == 0);
}

}
