#include <doctest.h>

#include <filesystem>

#include "clutterpush/error.hpp"
#include "clutterpush/io.hpp"
#include "clutterpush/perception.hpp"
#include "clutterpush/world.hpp"
#include "test_util.hpp"

using namespace cpush;
using doctest::Approx;

namespace {

using testutil::code_of;

const SuiteId kSuites[] = {SuiteId::free_space, SuiteId::env_a,     SuiteId::env_b,    SuiteId::env_c,
                           SuiteId::env_d,      SuiteId::env_e,     SuiteId::complex_1, SuiteId::complex_2};

} // namespace

TEST_SUITE("world") {

TEST_CASE("suite names round trip") {
    for (SuiteId s : kSuites) CHECK(parse_suite(to_string(s)) == s);
    CHECK(parse_suite("custom") == SuiteId::custom);
    CHECK(code_of([] { parse_suite("env_z"); }) == ErrorCode::unknown_suite);
}

TEST_CASE("pushee catalogue") {
    const auto& cat = pushee_catalogue();
    REQUIRE(cat.size() == 4);
    CHECK(cat[0].name == "small_cube");
    CHECK(pushee_shape("large_cube") == ShapeSpec::box(0.04, 0.04));
    CHECK(pushee_shape("small_cylinder") == ShapeSpec::disk(0.025));
    CHECK(pushee_shape("fragment").vertices.size() == 6);
    CHECK(pushee_shape("fragment").circumscribed_radius() == Approx(0.035));
    for (const auto& n : cat) CHECK(pushee_name(n.shape) == n.name);
    CHECK(code_of([] { pushee_shape("teapot"); }) == ErrorCode::invalid_argument);
}

TEST_CASE("scenarios are pure functions of the spec") {
    for (SuiteId s : kSuites) {
        for (ScenarioSpec spec : scenario_suite(s)) {
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                spec.rng_seed = seed;
                const WorldState a = make_scenario(spec);
                const WorldState b = make_scenario(spec);
                CHECK(a == b);
                CHECK_FALSE(check_world(a).has_value());
            }
        }
    }
}

TEST_CASE("obstacle counts per suite") {
    auto count = [](SuiteId s, std::uint64_t seed) {
        ScenarioSpec spec = scenario_suite(s).front();
        spec.rng_seed = seed;
        return make_scenario(spec).obstacles().size();
    };
    CHECK(count(SuiteId::free_space, 1) == 0);
    CHECK(count(SuiteId::env_a, 1) == 1);
    CHECK(count(SuiteId::env_b, 1) == 1);
    CHECK(count(SuiteId::env_c, 1) == 2);
    CHECK(count(SuiteId::complex_1, 1) == 6);
    CHECK(count(SuiteId::complex_2, 1) == 9);
}

TEST_CASE("gap suites keep the declared gap") {
    const std::pair<SuiteId, double> cases[] = {{SuiteId::env_c, 0.20}, {SuiteId::env_d, 0.15}, {SuiteId::env_e, 0.10}};
    for (const auto& [suite, gap] : cases) {
        ScenarioSpec spec = scenario_suite(suite).front();
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            spec.rng_seed = seed;
            const WorldState w = make_scenario(spec);
            const auto obs = w.obstacles();
            REQUIRE(obs.size() == 2);
            CHECK(separation(obs[0]->shape, obs[0]->pose, obs[1]->shape, obs[1]->pose) == Approx(gap).epsilon(1e-9));
        }
    }
}

TEST_CASE("complex obstacles leave corridors") {
    ScenarioSpec spec = scenario_suite(SuiteId::complex_2).front();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        spec.rng_seed = seed;
        const WorldState w = make_scenario(spec);
        const double corridor = 1.2 * w.pushee().shape.circumscribed_diameter();
        const auto obs = w.obstacles();
        for (std::size_t i = 0; i < obs.size(); ++i)
            for (std::size_t j = i + 1; j < obs.size(); ++j)
                CHECK(separation(obs[i]->shape, obs[i]->pose, obs[j]->shape, obs[j]->pose) >= corridor - 1e-12);
    }
}

TEST_CASE("invalid specs are rejected") {
    ScenarioSpec spec = scenario_suite(SuiteId::env_c).front();
    spec.obstacle_params.gap = 0.5;
    CHECK(code_of([&] { make_scenario(spec); }) == ErrorCode::invalid_scenario);
    ScenarioSpec tiny = scenario_suite(SuiteId::complex_2).front();
    tiny.workspace = {{0, 0}, {0.2, 0.2}};
    CHECK(code_of([&] { make_scenario(tiny); }) == ErrorCode::invalid_scenario);
}

TEST_CASE("start and goal sampling") {
    ScenarioSpec spec = scenario_suite(SuiteId::env_a).front();
    spec.rng_seed = 4;
    const WorldState w = make_scenario(spec);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const StartGoal sg = sample_start_goal(w, 0.2, 0.4, seed);
        const double d = distance(sg.start.position(), sg.goal.position());
        CHECK(d >= 0.2);
        CHECK(d <= 0.4);
        const StartGoal again = sample_start_goal(w, 0.2, 0.4, seed);
        CHECK(again.start == sg.start);
        CHECK(again.goal == sg.goal);
    }
    CHECK(code_of([&] { sample_start_goal(w, 5.0, 6.0, 1); }) == ErrorCode::no_valid_placement);
}

TEST_CASE("end effector sampled on a clear ring") {
    ScenarioSpec spec = scenario_suite(SuiteId::complex_1).front();
    spec.rng_seed = 2;
    const WorldState w = make_scenario(spec);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Pose2D ee = sample_ee_pose(w, 0.05, 0.10, seed);
        const double r = distance(ee.position(), w.pushee().pose.position());
        CHECK(r >= 0.05 - 1e-12);
        CHECK(r <= 0.10 + 1e-12);
        const BodyState e = make_end_effector(ee);
        for (const BodyState* o : w.obstacles()) CHECK(separation(e.shape, e.pose, o->shape, o->pose) > 0);
    }
}

TEST_CASE("translation moves every pose and the bounds") {
    ScenarioSpec spec = scenario_suite(SuiteId::env_c).front();
    const WorldState w = make_scenario(spec);
    const WorldState t = translate_world(w, {0.5, -0.25});
    CHECK(t.bounds.min.x == Approx(0.5));
    CHECK(t.pushee().pose.y == Approx(w.pushee().pose.y - 0.25));
    CHECK(t.obstacles().size() == w.obstacles().size());
}

TEST_CASE("scenario JSON round trip") {
    for (SuiteId s : kSuites) {
        for (ScenarioSpec spec : scenario_suite(s)) {
            spec.rng_seed = 0xfedcba9876543210ULL;
            CHECK(scenario_from_json(to_json(spec)) == spec);
        }
    }
    ScenarioSpec custom;
    custom.suite_id = SuiteId::custom;
    custom.pushee_shape = pushee_shape("fragment");
    custom.obstacle_params.obstacles = {{ShapeSpec::box(0.05, 0.02), {0.3, 0.3, 0.1 + 1.0 / 3.0}},
                                        {ShapeSpec::disk(0.04), {0.7, 0.6, 0}}};
    CHECK(scenario_from_json(to_json(custom)) == custom);

    const auto path = std::filesystem::temp_directory_path() / "cpush_scenario_rt.json";
    save_scenario(custom, path);
    CHECK(load_scenario(path) == custom);
    std::filesystem::remove(path);
}

TEST_CASE("malformed scenario documents") {
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"format":"nope"})")), Error);
    nlohmann::json j = to_json(scenario_suite(SuiteId::env_a).front());
    j["suite_id"] = "env_q";
    CHECK_THROWS_AS(scenario_from_json(j), Error);
    CHECK(code_of([] { load_scenario("/nonexistent/s.json"); }) == ErrorCode::io_failure);
}

TEST_CASE("doubles print in shortest round-trip form") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(std::stod(format_double(6.02214076e23)) == 6.02214076e23);
}

}
