#pragma once

#include "clutterpush/geometry.hpp"
#include "clutterpush/world.hpp"

namespace cpush {

struct ActionDelta {
    double dx{0};
    double dy{0};
    double dtheta{0};
    friend bool operator==(const ActionDelta&, const ActionDelta&) = default;
};

struct ActionCaps {
    double dxy_max{0.01};
    double dtheta_max{5.0 * std::numbers::pi / 180.0};
};

// Componentwise clamp; NaN components become 0.
ActionDelta clamp_action(const ActionDelta& a, const ActionCaps& caps = {});

struct LimitSurfaceParams {
    double c{0.05};          // max friction torque / max friction force (m)
    double ee_radius{0.01};  // disk EE
    // Upper bound on EE translation per sub-step; the effective bound is
    // min(max_substep, 0.5 * ee_radius).
    double max_substep{0.002};
    ActionCaps caps{};
};

inline constexpr double kContactEpsilon = 1e-3;
inline constexpr double kPenetrationTolerance = 1e-4;

struct StepOutcome {
    WorldState world;
    bool ee_object_contact{false};
    bool object_obstacle_collision{false};
    bool ee_obstacle_collision{false};
    bool out_of_bounds{false};
};

struct ContactReport {
    bool ee_object{false};
    bool object_obstacle{false};
    bool ee_obstacle{false};
    double min_separation{0};
};

// Quasi-static pushee increment for a single frictionless point contact
// under the ellipsoidal limit surface: twist ~ (fx, fy, m / c^2) with the
// force along `contact_normal` (pointing into the pushee), scaled so the
// contact point's normal velocity matches the normal part of
// `ee_displacement`. Throws Error(degenerate_contact) for a zero normal.
Pose2D resolve_push_contact(const BodyState& pushee, Vec2 contact_point, Vec2 contact_normal, Vec2 ee_displacement,
                            const LimitSurfaceParams& params);

// Flags are true iff the pair separation <= kContactEpsilon.
ContactReport detect_contacts(const WorldState& world);

// Pushee center strictly outside the bounds; the boundary counts as inside.
bool check_out_of_bounds(const WorldState& world);

// Advances the EE by the clamped action in sub-steps, pushing the pushee and
// stopping the EE where the pushee would penetrate an obstacle. Obstacles
// never move; the EE passes through obstacles (reported, not resolved).
StepOutcome step_ee(const WorldState& world, const ActionDelta& action, const LimitSurfaceParams& params = {});

} // namespace cpush
