#include "clutterpush/env.hpp"

#include <algorithm>
#include <cmath>

#include "clutterpush/error.hpp"
#include "clutterpush/rng.hpp"

namespace cpush {

RewardBreakdown compute_reward(double path_length, double ee_distance, const Normalization& norm,
                               const RewardFlags& flags) {
    const double r_g = std::clamp(path_length / norm.initial_path_length, 0.0, 1.0);
    const double r_o = std::clamp(ee_distance / norm.initial_ee_distance, 0.0, 1.0);
    RewardBreakdown r;
    r.r_dist = flags.goal_reached ? kGoalReward : -r_g - r_o;
    if (flags.out_of_bounds)
        r.r_collision = kOutOfBoundsPenalty;
    else if (flags.obstacle_collision)
        r.r_collision = kCollisionPenalty;
    r.r_touch = flags.ee_object_contact ? r_o : 0.0;
    r.r_total = r.r_dist + r.r_collision + r.r_touch;
    return r;
}

std::array<double, 3> arm_joint_angles(const ArmModel& arm, const Aabb& bounds, const Pose2D& ee) {
    const Vec2 base{bounds.center().x + arm.base_offset.x, bounds.min.y + arm.base_offset.y};
    const auto [l1, l2, l3] = arm.links;
    const Vec2 w = ee.position() - Vec2{std::cos(ee.theta), std::sin(ee.theta)} * l3 - base;
    const double d = std::clamp(norm(w), std::abs(l1 - l2), l1 + l2);
    const double c2 = std::clamp((d * d - l1 * l1 - l2 * l2) / (2 * l1 * l2), -1.0, 1.0);
    const double q2 = std::acos(c2);
    const double q1 = normalize_angle(std::atan2(w.y, w.x) - std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2)));
    const double q3 = normalize_angle(ee.theta - q1 - q2);
    return {q1, q2, q3};
}

Observation build_observation(const ObservationInputs& in) {
    using namespace obs_layout;
    Observation obs{};
    const BodyState& pushee = in.world->pushee();
    const BodyState& ee = in.world->end_effector();

    const Latent latent = encode_window(egocentric_window(*in.depth, pushee, ee), *in.encoder);
    std::copy(latent.begin(), latent.end(), obs.begin() + kLatent);

    const Vec2 ee_rel = pushee.pose.to_local(ee.pose.position());
    obs[kEePose + 0] = ee_rel.x;
    obs[kEePose + 1] = ee_rel.y;
    obs[kEePose + 2] = normalize_angle(ee.pose.theta - pushee.pose.theta);
    // pitch and roll stay 0 in the plane

    if (in.arm != nullptr) {
        const auto q = arm_joint_angles(*in.arm, in.world->bounds, ee.pose);
        std::copy(q.begin(), q.end(), obs.begin() + kJoints);
    }

    obs[kSgNow + 0] = in.subgoals.sg_now.x;
    obs[kSgNow + 1] = in.subgoals.sg_now.y;
    obs[kSgLagged + 0] = in.subgoals.sg_lagged.x;
    obs[kSgLagged + 1] = in.subgoals.sg_lagged.y;
    obs[kContact] = in.contact ? 1.0 : 0.0;
    const double gd = distance(pushee.pose.position(), in.world->goal.position());
    obs[kGoalDistance] = in.initial_goal_distance > 0 ? gd / in.initial_goal_distance : 0.0;
    return obs;
}

int curriculum_advance(int stage, double success_rate, int n_episodes) {
    const int last = static_cast<int>(kCurriculumLadder.size()) - 1;
    stage = std::clamp(stage, 0, last);
    if (n_episodes >= kCurriculumMinEpisodes && success_rate >= kCurriculumThreshold) return std::min(stage + 1, last);
    return stage;
}

int Curriculum::record(bool success) {
    window_.push_back(success);
    if (static_cast<int>(window_.size()) > kCurriculumMinEpisodes) window_.pop_front();
    const auto n = static_cast<int>(window_.size());
    const double rate = static_cast<double>(std::count(window_.begin(), window_.end(), true)) / n;
    const int next = curriculum_advance(stage_, rate, n);
    if (next != stage_) {
        stage_ = next;
        window_.clear();  // a new stage starts a fresh window
    }
    return stage_;
}

void EpisodeConfig::validate() const {
    if (!(d_min > 0) || !(d_min <= d_max) || !(d_max <= kCurriculumLadder.back() + 1e-12))
        throw Error(ErrorCode::invalid_argument, "need 0 < d_min <= d_max <= 0.6");
    if (max_steps <= 0) throw Error(ErrorCode::invalid_argument, "max_steps must be positive");
    if (!(goal_tolerance > 0)) throw Error(ErrorCode::invalid_argument, "goal_tolerance must be positive");
    if (curriculum_stage < 0 || curriculum_stage >= static_cast<int>(kCurriculumLadder.size()))
        throw Error(ErrorCode::invalid_argument, "curriculum stage out of range");
    if (subgoal_lag < 0) throw Error(ErrorCode::invalid_argument, "subgoal lag must be >= 0");
    if (snap_radius_cells < 0) throw Error(ErrorCode::invalid_argument, "snap radius must be >= 0");
}

std::pair<double, double> EpisodeConfig::distance_range() const {
    const double hi = std::min(d_max, kCurriculumLadder[static_cast<std::size_t>(curriculum_stage)]);
    return {std::min(d_min, hi), hi};
}

PushEnv::PushEnv(EncoderSpec encoder) : encoder_(std::move(encoder)) { validate_encoder(encoder_); }

Observation PushEnv::reset(const EpisodeConfig& config) {
    config.validate();
    WorldState w;
    try {
        w = make_scenario(config.scenario);
        const auto [lo, hi] = config.distance_range();
        const StartGoal sg = sample_start_goal(w, lo, hi, mix_seed(config.seed, 11));
        w.pushee().pose = sg.start;
        w.goal = sg.goal;
        w.end_effector().pose = sample_ee_pose(w, scenario_defaults::kEeRingMin, scenario_defaults::kEeRingMax,
                                               mix_seed(config.seed, 12));
    } catch (const Error& e) {
        throw Error(ErrorCode::reset_failed, std::string("reset: ") + e.what());
    }
    return reset(w, config);
}

Observation PushEnv::reset(const WorldState& world, const EpisodeConfig& config) {
    config.validate();
    if (auto why = check_world(world)) throw Error(ErrorCode::reset_failed, "reset: " + *why);
    config_ = config;
    world_ = world;
    world_.time_step_index = 0;
    tracker_ = SubgoalTracker(config.subgoal_lag);

    const DepthImage depth = render_depth(world_);
    obstacle_grid_ = occupancy_from_depth(depth, world_.pushee(), world_.end_effector());
    planning_grid_ = inflate(obstacle_grid_, world_.pushee().shape.circumscribed_radius());
    try {
        path_ = plan_path(planning_grid_, world_.pushee().pose.position(), world_.goal.position(),
                          {config.snap_radius_cells, nullptr});
    } catch (const Error& e) {
        throw Error(ErrorCode::reset_failed, std::string("reset: ") + e.what());
    }
    initial_path_ = path_;
    const Vec2 p = world_.pushee().pose.position();
    norm_.initial_path_length = path_.length;
    norm_.initial_ee_distance = distance(world_.end_effector().pose.position(), p);
    norm_.initial_goal_distance = distance(world_.goal.position(), p);
    if (!(norm_.initial_path_length > 0) || !(norm_.initial_ee_distance > 0) || !(norm_.initial_goal_distance > 0))
        throw Error(ErrorCode::reset_failed, "reset: degenerate start configuration");
    last_path_length_ = path_.length;
    steps_ = 0;
    done_ = false;
    active_ = true;
    obs_ = observe(detect_contacts(world_).ee_object);
    return obs_;
}

Observation PushEnv::observe(bool contact) {
    const DepthImage depth = render_depth(world_);
    ObservationInputs in;
    in.world = &world_;
    in.depth = &depth;
    in.encoder = &encoder_;
    in.subgoals = tracker_.update(path_, world_.pushee().pose);
    in.contact = contact;
    in.initial_goal_distance = norm_.initial_goal_distance;
    in.arm = config_.arm_joints ? &arm_ : nullptr;
    return build_observation(in);
}

bool PushEnv::goal_reached() const {
    const BodyState& pushee = world_.pushee();
    if (distance(pushee.pose.position(), world_.goal.position()) > config_.goal_tolerance) return false;
    if (config_.yaw_tolerance)
        return std::abs(normalize_angle(pushee.pose.theta - world_.goal.theta)) <= *config_.yaw_tolerance;
    return true;
}

StepResult PushEnv::step(const ActionDelta& action) {
    if (!active_) throw Error(ErrorCode::episode_finished, "step before reset");
    if (done_) throw Error(ErrorCode::episode_finished, "episode finished; call reset");

    StepOutcome out = step_ee(world_, action, config_.dynamics);
    world_ = std::move(out.world);
    ++steps_;

    StepResult res;
    StepInfo& info = res.info;
    try {
        path_ = plan_path(planning_grid_, world_.pushee().pose.position(), world_.goal.position(),
                          {config_.snap_radius_cells, nullptr});
        last_path_length_ = path_.length;
    } catch (const Error&) {
        // Wedged in the inflation: keep the last path and its length.
        info.replan_failed = true;
    }

    info.contact = out.ee_object_contact;
    info.object_collision = out.object_obstacle_collision;
    info.ee_collision = out.ee_obstacle_collision;
    info.collision = info.object_collision || info.ee_collision;
    info.out_of_bounds = out.out_of_bounds;
    info.goal_reached = goal_reached();
    info.path_length = last_path_length_;
    info.goal_distance = distance(world_.pushee().pose.position(), world_.goal.position());
    info.step = steps_;

    RewardFlags flags;
    flags.goal_reached = info.goal_reached;
    flags.out_of_bounds = info.out_of_bounds;
    flags.obstacle_collision = info.collision;
    flags.ee_object_contact = info.contact;
    const double ee_dist = distance(world_.end_effector().pose.position(), world_.pushee().pose.position());
    res.reward = compute_reward(last_path_length_, ee_dist, norm_, flags);

    info.timeout = steps_ >= config_.max_steps;
    done_ = info.goal_reached || info.out_of_bounds || info.timeout;
    res.done = done_;
    obs_ = observe(info.contact);
    res.obs = obs_;
    return res;
}

} // namespace cpush
