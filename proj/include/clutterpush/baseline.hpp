#pragma once

#include <optional>

#include "clutterpush/env.hpp"
#include "clutterpush/perception.hpp"
#include "clutterpush/planner.hpp"
#include "clutterpush/push_sim.hpp"

namespace cpush {

struct ControllerParams {
    double psi_relocate_threshold{0.6};
    double relocate_radius{0.0654};    // small cube: r_c + 2 * ee_radius + 0.01
    double approach_distance{0.0454};  // small cube: r_c + ee_radius
    double gain_push{1.0};
    double gain_relocate{1.0};
    double costmap_inflation{0.0354};  // small cube: half its diameter
    double costmap_falloff{0.05};
    double costmap_weight{1.0};
    // Constant forward term along the push direction; keeps the EE pressing
    // once it reaches the contact point.
    double push_speed{0.01};
    // Replan when the pushee strays this far from the latched path (m).
    double replan_deviation{0.02};

    // Defaults derived from the pushee and EE geometry.
    static ControllerParams for_pushee(const ShapeSpec& pushee, double ee_radius = scenario_defaults::kEeRadius);
    // Throws Error(invalid_argument).
    void validate() const;
};

// Lethal (infinite) within `costmap_inflation` of an occupied cell,
// 1 + w * exp(-d / falloff) elsewhere, d in meters between cell centers.
CostGrid build_costmap(const OccupancyGrid& grid, const ControllerParams& params);

// psi = (1 - cos a) / 2, a the angle between (pushee - ee) and push_dir.
// Throws Error(degenerate_geometry) when ee and pushee coincide.
double relocation_activation(Vec2 ee_pos, Vec2 pushee_pos, Vec2 push_dir);

// Unit vector from the pushee toward the 20%-arc-length point of `path`.
// Falls back to the path's end, then to +x, when that point coincides with
// the pushee.
Vec2 push_direction(const Path& path, Vec2 pushee_pos);

struct ControlTerms {
    ActionDelta action;
    Vec2 push_dir;
    double psi{0};
    bool relocating{false};  // psi >= threshold branch
};

// One push/relocate command; `cost_path` must be non-empty.
ControlTerms control_step_terms(const WorldState& world, const Path& cost_path, const ControllerParams& params,
                                const ActionCaps& caps = {});
ActionDelta control_step(const WorldState& world, const Path& cost_path, const ControllerParams& params,
                         const ActionCaps& caps = {});

// Per-episode driver: builds the cost map once, latches the weighted path and
// replans when the pushee deviates from it.
class BaselineController {
public:
    explicit BaselineController(std::optional<ControllerParams> params = std::nullopt) : fixed_(params) {}

    void begin(const PushEnv& env);
    ControlTerms act(const PushEnv& env);
    [[nodiscard]] const ControllerParams& params() const noexcept { return params_; }
    [[nodiscard]] const Path& path() const noexcept { return path_; }
    [[nodiscard]] const CostGrid& costs() const noexcept { return costs_; }

private:
    void replan(const PushEnv& env);

    std::optional<ControllerParams> fixed_;
    ControllerParams params_;
    OccupancyGrid grid_;
    CostGrid costs_;
    Path path_;
};

} // namespace cpush
