#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clutterpush/geometry.hpp"

namespace cpush {

enum class BodyRole { pushee, obstacle, end_effector };

struct BodyState {
    Pose2D pose;
    ShapeSpec shape;
    BodyRole role{BodyRole::obstacle};

    friend bool operator==(const BodyState&, const BodyState&) = default;
};

struct WorldState {
    std::vector<BodyState> bodies;
    Aabb bounds{{0, 0}, {1, 1}};
    Pose2D goal;
    std::int64_t time_step_index{0};

    [[nodiscard]] const BodyState& pushee() const;
    [[nodiscard]] BodyState& pushee();
    [[nodiscard]] const BodyState& end_effector() const;
    [[nodiscard]] BodyState& end_effector();
    [[nodiscard]] std::vector<const BodyState*> obstacles() const;

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

enum class SuiteId { free_space, env_a, env_b, env_c, env_d, env_e, complex_1, complex_2, custom };

std::string_view to_string(SuiteId id) noexcept;
// Throws Error(unknown_suite).
SuiteId parse_suite(std::string_view name);

struct ObstacleDef {
    ShapeSpec shape;
    Pose2D pose;
    friend bool operator==(const ObstacleDef&, const ObstacleDef&) = default;
};

// Unset fields are drawn from the scenario seed.
struct ObstacleParams {
    std::optional<double> yaw;
    std::optional<double> scale;
    std::optional<double> gap;
    std::optional<int> count;
    std::vector<ObstacleDef> obstacles;  // custom suite only
    friend bool operator==(const ObstacleParams&, const ObstacleParams&) = default;
};

struct ScenarioSpec {
    SuiteId suite_id{SuiteId::free_space};
    ObstacleParams obstacle_params;
    ShapeSpec pushee_shape;
    std::uint64_t rng_seed{0};
    Aabb workspace{{0, 0}, {1, 1}};
    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

// Workspace and object constants. None of these are reported values; they
// are the declared defaults every scenario file carries explicitly.
namespace scenario_defaults {
inline constexpr double kWorkspaceExtent = 1.0;
inline constexpr double kEeRadius = 0.01;
inline constexpr double kEeRingMin = 0.05;
inline constexpr double kEeRingMax = 0.10;
inline constexpr double kScaleMin = 0.8;
inline constexpr double kScaleMax = 1.2;
inline constexpr double kGapMin = 0.10;
inline constexpr double kGapMax = 0.20;
inline constexpr double kCorridorFactor = 1.2;
inline constexpr int kMaxObstacleAttempts = 1000;  // per layout
inline constexpr int kMaxObstacleLayouts = 50;
inline constexpr int kMaxStartGoalAttempts = 10000;
} // namespace scenario_defaults

struct NamedShape {
    std::string name;
    ShapeSpec shape;
};

// small_cube, large_cube, small_cylinder, fragment.
const std::vector<NamedShape>& pushee_catalogue();
// Throws Error(invalid_argument) for unknown names.
ShapeSpec pushee_shape(std::string_view name);
// Name of a catalogue shape, or "custom".
std::string pushee_name(const ShapeSpec& shape);

// Throws Error(invalid_scenario) if the spec's own invariants fail.
void validate_spec(const ScenarioSpec& spec);

// Pure function of the spec. Throws Error(invalid_scenario) when obstacle
// placement fails within the rejection budget.
WorldState make_scenario(const ScenarioSpec& spec);

// Throws Error(unknown_suite) for SuiteId values outside the enum.
std::vector<ScenarioSpec> scenario_suite(SuiteId suite);

// Returns an explanation for the first violated invariant, or nullopt.
std::optional<std::string> check_world(const WorldState& world);

struct StartGoal {
    Pose2D start;
    Pose2D goal;
};

// Rejection-samples a start/goal pair at Euclidean distance in
// [d_min, d_max], both clear of obstacles after half-diameter inflation and
// connected on the planning grid. Throws Error(no_valid_placement).
StartGoal sample_start_goal(const WorldState& world, double d_min, double d_max, std::uint64_t rng_seed);

// Samples a collision-free EE pose on the ring [ring_min, ring_max] around
// the pushee. Throws Error(no_valid_placement).
Pose2D sample_ee_pose(const WorldState& world, double ring_min, double ring_max, std::uint64_t rng_seed);

WorldState translate_world(const WorldState& world, Vec2 offset);
// Mirror about the world x-axis through the workspace center line.
WorldState mirror_world(const WorldState& world);

BodyState make_end_effector(Pose2D pose, double radius = scenario_defaults::kEeRadius);

} // namespace cpush
