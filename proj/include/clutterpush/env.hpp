#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>

#include "clutterpush/perception.hpp"
#include "clutterpush/planner.hpp"
#include "clutterpush/push_sim.hpp"
#include "clutterpush/world.hpp"

namespace cpush {

// Fixed observation layout (version 1).
namespace obs_layout {
inline constexpr int kVersion = 1;
inline constexpr int kLatent = 0;        // 32
inline constexpr int kEePose = 32;       // x, y, yaw, pitch, roll in the pushee frame
inline constexpr int kJoints = 37;       // 6
inline constexpr int kSgNow = 43;        // 2
inline constexpr int kSgLagged = 45;     // 2
inline constexpr int kContact = 47;      // 1
inline constexpr int kGoalDistance = 48; // 1
inline constexpr int kSize = 49;
} // namespace obs_layout

using Observation = std::array<double, obs_layout::kSize>;

struct RewardBreakdown {
    double r_dist{0};
    double r_collision{0};
    double r_touch{0};
    double r_total{0};
    friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

struct RewardFlags {
    bool goal_reached{false};
    bool out_of_bounds{false};
    bool obstacle_collision{false};
    bool ee_object_contact{false};
};

// Per-episode normalizers latched at reset.
struct Normalization {
    double initial_path_length{1};
    double initial_ee_distance{1};
    double initial_goal_distance{1};
};

inline constexpr double kGoalReward = 50.0;
inline constexpr double kOutOfBoundsPenalty = -10.0;
inline constexpr double kCollisionPenalty = -5.0;

// `path_length` is the current global path length, `ee_distance` the
// EE-to-pushee-center distance.
RewardBreakdown compute_reward(double path_length, double ee_distance, const Normalization& norm,
                               const RewardFlags& flags);

// Planar 3-link arm standing in for the joint slots when enabled.
struct ArmModel {
    Vec2 base_offset{0.0, -0.15};  // from the bottom-center of the workspace
    std::array<double, 3> links{0.45, 0.45, 0.10};
};
std::array<double, 3> arm_joint_angles(const ArmModel& arm, const Aabb& bounds, const Pose2D& ee);

struct ObservationInputs {
    const WorldState* world{nullptr};
    const DepthImage* depth{nullptr};
    const EncoderSpec* encoder{nullptr};
    SubgoalPair subgoals;
    bool contact{false};
    double initial_goal_distance{1};
    const ArmModel* arm{nullptr};  // null: joint slots stay zero
};

Observation build_observation(const ObservationInputs& in);

// Curriculum over the maximum start-goal distance.
inline constexpr std::array<double, 6> kCurriculumLadder{0.06, 0.12, 0.2, 0.3, 0.45, 0.6};
inline constexpr int kCurriculumMinEpisodes = 50;
inline constexpr double kCurriculumThreshold = 0.8;

// Next stage given the rolling success rate over `n_episodes`. Never
// regresses and saturates at the last stage.
int curriculum_advance(int stage, double success_rate, int n_episodes);

class Curriculum {
public:
    explicit Curriculum(int stage = 0) : stage_(stage) {}
    // Records an episode outcome; returns the (possibly advanced) stage.
    int record(bool success);
    [[nodiscard]] int stage() const noexcept { return stage_; }
    [[nodiscard]] double d_max() const noexcept { return kCurriculumLadder[static_cast<std::size_t>(stage_)]; }

private:
    int stage_;
    std::deque<bool> window_;
};

struct EpisodeConfig {
    ScenarioSpec scenario;
    int max_steps{500};
    double goal_tolerance{0.03};
    // Orientation matching is off by default.
    std::optional<double> yaw_tolerance;
    int curriculum_stage{static_cast<int>(kCurriculumLadder.size()) - 1};
    double d_min{0.06};
    double d_max{0.6};
    std::uint64_t seed{0};
    int subgoal_lag{5};
    int snap_radius_cells{3};
    bool arm_joints{false};
    LimitSurfaceParams dynamics{};

    // Throws Error(invalid_argument).
    void validate() const;
    // [d_min, d_max] after capping d_max by the curriculum stage.
    [[nodiscard]] std::pair<double, double> distance_range() const;
};

struct StepInfo {
    bool contact{false};
    bool collision{false};           // pushee or EE against an obstacle
    bool object_collision{false};
    bool ee_collision{false};
    bool out_of_bounds{false};
    bool goal_reached{false};
    bool replan_failed{false};
    bool timeout{false};
    double path_length{0};
    double goal_distance{0};
    std::int64_t step{0};
};

struct StepResult {
    Observation obs{};
    RewardBreakdown reward;
    bool done{false};
    StepInfo info;
};

class PushEnv {
public:
    explicit PushEnv(EncoderSpec encoder = EncoderSpec::builtin());

    // Builds the scenario, samples start/goal and the EE, plans and latches
    // the normalizers. Throws Error(reset_failed) when placement or planning
    // fails, Error(invalid_argument) for a bad config.
    Observation reset(const EpisodeConfig& config);
    // Starts from an explicit world (pushee at its start, goal set, EE placed).
    Observation reset(const WorldState& world, const EpisodeConfig& config);

    // Throws Error(episode_finished) once done.
    StepResult step(const ActionDelta& action);

    [[nodiscard]] const WorldState& world() const noexcept { return world_; }
    [[nodiscard]] const EpisodeConfig& config() const noexcept { return config_; }
    [[nodiscard]] const OccupancyGrid& obstacle_grid() const noexcept { return obstacle_grid_; }
    [[nodiscard]] const OccupancyGrid& planning_grid() const noexcept { return planning_grid_; }
    [[nodiscard]] const Path& path() const noexcept { return path_; }
    [[nodiscard]] const Path& initial_path() const noexcept { return initial_path_; }
    [[nodiscard]] const Normalization& normalization() const noexcept { return norm_; }
    [[nodiscard]] const Observation& observation() const noexcept { return obs_; }
    [[nodiscard]] bool done() const noexcept { return done_; }
    [[nodiscard]] bool active() const noexcept { return active_; }
    [[nodiscard]] std::int64_t steps() const noexcept { return steps_; }
    [[nodiscard]] const EncoderSpec& encoder() const noexcept { return encoder_; }

private:
    Observation observe(bool contact);
    bool goal_reached() const;

    EncoderSpec encoder_;
    ArmModel arm_;
    EpisodeConfig config_;
    WorldState world_;
    OccupancyGrid obstacle_grid_;
    OccupancyGrid planning_grid_;
    Path path_;
    Path initial_path_;
    SubgoalTracker tracker_;
    Normalization norm_;
    Observation obs_{};
    double last_path_length_{0};
    std::int64_t steps_{0};
    bool done_{false};
    bool active_{false};
};

} // namespace cpush
