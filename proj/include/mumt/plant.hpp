#pragma once

// 3-DOF point-mass airframe, scripted lead trajectories, jetwash geometry and
// sensed-state generation.

#include <string>
#include <vector>

#include "mumt/core.hpp"
#include "mumt/rng.hpp"

namespace mumt::plant {

struct SensorError {
    std::string field;  // see state_scalar_fields()
    double bias = 0.0;
    double noise_std = 0.0;
};

struct PlantConfig {
    double dt = 0.02;  // s
    CommandEnvelope envelope;
    double v_floor = 40.0;       // m/s, airspeed never integrates below this
    double alpha_zero = 0.04;    // rad at 1 g
    double alpha_per_g = 0.03;   // rad per g above 1
    double fuel_flow_max = 1.2;  // kg/s at PLA 1
    double density_scale_height = 9000.0;  // m
    std::vector<SensorError> sensor;

    void validate() const;
};

/// Builds a consistent steady-flight state (derived fields filled in).
AircraftState make_state(const Vec3& position, double heading, double airspeed, double climb_rate, double fuel,
                         const Vec3& wind, const PlantConfig& cfg, FrameStamp stamp = {});

/// One exact closed-form step: heading integrates turn_rate, airspeed integrates
/// longitudinal_accel (floored at v_floor), vertical speed equals climb_rate and
/// the horizontal path is a circular arc (or segment) at the mean speed.
AircraftState plant_step(const AircraftState& state, const ControlCommand& cmd, const Vec3& wind,
                         const PlantConfig& cfg);

/// Command that keeps |roll| at or below `max_roll` for the given airspeed.
double max_turn_rate_for_roll(double airspeed, double max_roll);

/// Sensed copy of the truth state: additive bias plus Gaussian noise per field.
AircraftState sense(const AircraftState& truth, const std::vector<SensorError>& errors, RngStream& rng);

struct JetwashRegion {
    double length = 600.0;
    double half_angle = 0.15;
    int min_dwell_frames = 150;
};

/// True iff the wingman lies in the cone extending behind the lead's velocity.
bool in_jetwash(const Vec3& wing_pos, const AircraftState& lead, const JetwashRegion& j);

/// Piecewise-constant lead manoeuvre script.
struct LeadSegment {
    std::int64_t start_frame = 0;
    double turn_rate = 0.0;
    double climb_rate = 0.0;
    double longitudinal_accel = 0.0;
};

struct LeadScript {
    std::vector<LeadSegment> segments;  // sorted by start_frame

    ControlCommand command_at(std::int64_t frame, double dt) const;
    static LeadScript straight() { return {}; }
    /// Racetrack: straight legs joined by 180-degree turns at `turn_rate`.
    static LeadScript racetrack(std::int64_t leg_frames, double turn_rate, double dt, std::int64_t total_frames);
};

}  // namespace mumt::plant
