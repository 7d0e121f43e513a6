#pragma once

// Safety-pilot behavioural model (signals W5, W9; consumes W7/W8/W13/W14).
// The pilot judges the situation from ground truth: visual assessment is a
// source independent of the wingman's sensors.

#include <optional>
#include <string>
#include <vector>

#include "mumt/controllers.hpp"
#include "mumt/core.hpp"
#include "mumt/plant.hpp"
#include "mumt/rta.hpp"

namespace mumt::pilot {

struct PilotConfig {
    int reaction_delay_frames = 25;
    double los_cone_half_angle = 1.2;  // rad
    int los_max_loss_frames = 100;
    double proximity_factor = 2.0;     // visual proximity trigger, x d_min
    int jetwash_takeover_frames = 25;
    int distraction_limit_frames = 100;
    int impaired_delay_factor = 8;     // reaction slowdown when impaired

    // Behaviour switches; each corresponds to a briefing or procedure.
    bool monitor_los = true;
    bool visual_proximity = true;
    bool watch_jetwash = true;
    bool terminate_after_distraction = true;
    bool briefed_on_limits = true;  // interventions alone are not a reason to take over
    bool respect_epm = true;
    bool monitor_envelope = true;

    controllers::RejoinGoal manual_goal;
    controllers::Gains gains;

    void validate() const;
};

/// Mutable pilot state (the model's memory between frames).
struct PilotModel {
    bool incapacitated = false;
    bool impaired = false;
    std::optional<std::int64_t> distracted_from;
    std::optional<std::int64_t> distracted_until;
    int los_lost_frames = 0;
    int jetwash_frames = 0;
    std::optional<std::int64_t> takeover_at;  // pending decision
    std::string pending_reason;
    bool has_control = false;
    std::string takeover_reason;
    std::optional<ControlCommand> last_command;
    std::optional<ControlCommand> maneuver;  // scripted test-card input overriding guidance
    std::int64_t ended_distraction_frames = 0;
};

struct PilotInputs {
    AircraftState own;        // truth
    AircraftState lead;       // truth
    std::vector<std::string> alerts;  // everything on W7, W8, W13, W14 this frame
    bool scripted_takeover = false;
    bool selector_on_pilot = false;   // pilot is flying (needs assured manual commands)
    FrameStamp stamp;
};

struct PilotOutput {
    ControlCommand command;
    bool takeover = false;      // latched
    bool epm_request = false;   // W9, raised on the takeover frame
    bool line_of_sight = true;
    bool distracted = false;
    std::string reason;         // takeover reason on the takeover frame
    int distraction_length = 0; // frames, set on the frame a distraction ends
};

bool line_of_sight(const AircraftState& own, const Vec3& lead_pos, double half_angle);
bool is_safety_alert(const std::string& alert);

PilotOutput pilot_step(const PilotInputs& in, PilotModel& m, const PilotConfig& cfg, const rta::Context& assure_ctx,
                       const plant::JetwashRegion& jet);

}  // namespace mumt::pilot
