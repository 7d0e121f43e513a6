#pragma once

// Shared domain types for the wingman simulator: units, geometry, aircraft
// state, control commands and the hard/soft safety-constraint model.
//
// Frame: local flat-earth NED in meters. Altitude is -down.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mumt {

inline constexpr double kGravity = 9.80665;  // m/s^2
inline constexpr double kPi = std::numbers::pi;

/// Raised for any invalid scenario, catalog or matrix configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    double north = 0.0;  // m
    double east = 0.0;   // m
    double down = 0.0;   // m

    constexpr Vec3 operator+(const Vec3& o) const { return {north + o.north, east + o.east, down + o.down}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {north - o.north, east - o.east, down - o.down}; }
    constexpr Vec3 operator*(double s) const { return {north * s, east * s, down * s}; }
    constexpr bool operator==(const Vec3&) const = default;

    double norm() const { return std::sqrt(north * north + east * east + down * down); }
    double horizontal_norm() const { return std::hypot(north, east); }
    double dot(const Vec3& o) const { return north * o.north + east * o.east + down * o.down; }
    bool finite() const { return std::isfinite(north) && std::isfinite(east) && std::isfinite(down); }
    double altitude() const { return -down; }
};

/// Euclidean distance; total, symmetric, non-negative.
double distance(const Vec3& a, const Vec3& b);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

struct FrameStamp {
    std::int64_t frame_index = 0;
    double sim_time = 0.0;  // s

    static FrameStamp at(std::int64_t frame, double dt) { return {frame, static_cast<double>(frame) * dt}; }
    bool operator==(const FrameStamp&) const = default;
};

struct Attitude {
    double roll = 0.0;   // rad
    double pitch = 0.0;  // rad
    double yaw = 0.0;    // rad, heading from north
    bool operator==(const Attitude&) const = default;
};

struct BodyRates {
    double p = 0.0;  // rad/s
    double q = 0.0;
    double r = 0.0;
    bool operator==(const BodyRates&) const = default;
};

struct AircraftState {
    Vec3 position;
    Vec3 velocity;                     // m/s, ground-relative
    Vec3 acceleration;                 // m/s^2
    double normal_acceleration = 1.0;  // g
    Attitude orientation;
    BodyRates orientation_rates;
    double true_airspeed = 0.0;        // m/s
    double calibrated_airspeed = 0.0;  // m/s
    Vec3 wind_velocity;
    double fuel_remaining = 0.0;       // kg
    double power_lever_angle = 0.5;    // [0,1]
    double angle_of_attack = 0.0;      // rad
    FrameStamp timestamp;

    bool operator==(const AircraftState&) const = default;

    // Flight-path quantities used by the point-mass model.
    double heading() const { return orientation.yaw; }
    double climb_rate() const { return -(velocity.down - wind_velocity.down); }
};

/// Empty when the state satisfies every type invariant, else the first broken one.
std::optional<std::string> state_invariant_violation(const AircraftState& s);

struct ControlCommand {
    double turn_rate = 0.0;           // rad/s, positive = right turn
    double climb_rate = 0.0;          // m/s, positive = up
    double longitudinal_accel = 0.0;  // m/s^2
    FrameStamp stamp;

    bool operator==(const ControlCommand&) const = default;
    bool same_values(const ControlCommand& o) const {
        return turn_rate == o.turn_rate && climb_rate == o.climb_rate && longitudinal_accel == o.longitudinal_accel;
    }
    bool finite() const {
        return std::isfinite(turn_rate) && std::isfinite(climb_rate) && std::isfinite(longitudinal_accel);
    }
    static ControlCommand maintain(FrameStamp stamp) { return {0.0, 0.0, 0.0, stamp}; }
};

/// Symmetric absolute bounds every emitted command must respect.
struct CommandEnvelope {
    double max_turn_rate = 0.6;    // rad/s
    double max_climb_rate = 40.0;  // m/s
    double max_accel = 12.0;       // m/s^2

    ControlCommand saturate(ControlCommand c) const;
    bool contains(const ControlCommand& c) const;
};

// ---------------------------------------------------------------------------
// Constraints

struct SeparationConstraint {
    double d_min = 152.4;  // m (500 ft)
};

struct SeparationVerdict {
    bool safe = true;
    double distance = 0.0;
};

/// Violation iff distance < d_min; the boundary counts as safe.
SeparationVerdict check_separation(const Vec3& lead, const Vec3& wing, const SeparationConstraint& c);

struct Vertex2 {
    double north = 0.0;
    double east = 0.0;
    bool operator==(const Vertex2&) const = default;
};

struct GeofenceConstraint {
    std::vector<Vertex2> polygon;  // convex, either winding
    double altitude_floor = 0.0;   // m
    double altitude_ceiling = 0.0;

    /// Throws ConfigError unless the polygon is convex, non-degenerate and floor < ceiling.
    void validate() const;
    Vertex2 centroid() const;
    double altitude_mid() const { return 0.5 * (altitude_floor + altitude_ceiling); }
    /// Signed distance of (n,e) to each face's inward half-plane (>= 0 inside).
    std::vector<double> face_margins(double north, double east) const;
    /// Polygon scaled about its centroid.
    GeofenceConstraint scaled(double factor) const;
};

struct GeofenceVerdict {
    enum class Face { none, polygon_edge, floor, ceiling };
    bool inside = true;
    Face face = Face::none;
    int edge_index = -1;  // for polygon_edge: edge from vertex i to i+1
};

/// Closed-set containment; reports the first violated half-plane in vertex
/// order, then the floor, then the ceiling.
GeofenceVerdict check_geofence(const Vec3& pos, const GeofenceConstraint& g);

struct EnvelopeLimits {
    double max_roll = 1.309;    // rad (75 deg)
    double max_pitch = 0.5236;  // rad (30 deg)
    double alpha_min = -0.1;
    double alpha_max = 0.35;
    double v_min = 60.0;        // m/s
    double v_max = 320.0;
    double n_min = -1.5;        // g
    double n_max = 5.0;
    double altitude_floor = 300.0;
    double altitude_ceiling = 12000.0;

    void validate() const;
    /// Names of every limit the state exceeds; empty when inside the envelope.
    std::vector<std::string> violations(const AircraftState& s, double scale = 1.0) const;
};

struct LosConstraint {
    double cone_half_angle = 1.2;  // rad about the wingman's nose
};

struct JetwashConstraint {
    double length = 600.0;        // m behind the lead
    double half_angle = 0.15;     // rad
    int min_dwell_frames = 150;
};

struct SafetyConstraintSet {
    SeparationConstraint separation;
    GeofenceConstraint geofence;
    EnvelopeLimits epm_envelope;
    LosConstraint line_of_sight;
    JetwashConstraint jetwash_avoidance;

    void validate() const;
    bool hard_satisfied(const Vec3& lead, const Vec3& wing) const {
        return check_separation(lead, wing, separation).safe && check_geofence(wing, geofence).inside;
    }
};

/// Rectangle helper for scenario files and tests.
GeofenceConstraint rectangular_fence(double north_min, double north_max, double east_min, double east_max,
                                     double floor, double ceiling);

/// Named scalar fields of AircraftState ("position.north", "roll", "fuel_remaining", ...),
/// shared by sensor-error models and datalink corruption faults.
const std::vector<std::string>& state_scalar_fields();
/// Pointer to the named scalar, or nullptr if the name is unknown.
double* scalar_field(AircraftState& s, std::string_view name);
double scalar_field_value(const AircraftState& s, std::string_view name);

/// Lead-body-frame offset (forward, right, down) rotated into NED by heading.
Vec3 body_to_ned(const Vec3& offset_frd, double heading);

}  // namespace mumt
