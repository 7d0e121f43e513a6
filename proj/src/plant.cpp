#include "mumt/plant.hpp"

#include <algorithm>

namespace mumt::plant {

void PlantConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("plant dt must be positive");
    if (!(envelope.max_turn_rate > 0.0 && envelope.max_climb_rate > 0.0 && envelope.max_accel > 0.0))
        throw ConfigError("command envelope bounds must be positive");
    if (!(v_floor > 0.0)) throw ConfigError("plant v_floor must be positive");
    for (const auto& e : sensor) {
        AircraftState probe;
        if (!scalar_field(probe, e.field)) throw ConfigError("unknown sensor field '" + e.field + "'");
        if (!(e.noise_std >= 0.0)) throw ConfigError("sensor noise std must be >= 0");
    }
}

namespace {

struct Derived {
    double roll, n, alpha, cas, pla;
};

Derived derive(double airspeed, double horizontal_speed, double turn_rate, double accel, double altitude,
               const PlantConfig& cfg) {
    const double roll = std::atan(horizontal_speed * turn_rate / kGravity);
    const double n = 1.0 / std::cos(roll);
    const double alpha = cfg.alpha_zero + cfg.alpha_per_g * (n - 1.0);
    const double sigma = std::exp(-std::max(altitude, 0.0) / cfg.density_scale_height);
    const double cas = airspeed * std::sqrt(sigma);
    const double pla = std::clamp(0.5 + 0.5 * accel / cfg.envelope.max_accel, 0.0, 1.0);
    return {roll, n, alpha, cas, pla};
}

double horizontal_from(double airspeed, double climb) {
    return std::sqrt(std::max(airspeed * airspeed - climb * climb, 0.0));
}

}  // namespace

AircraftState make_state(const Vec3& position, double heading, double airspeed, double climb_rate, double fuel,
                         const Vec3& wind, const PlantConfig& cfg, FrameStamp stamp) {
    AircraftState s;
    const double vh = horizontal_from(airspeed, climb_rate);
    const double psi = wrap_angle(heading);
    s.position = position;
    s.velocity = {vh * std::cos(psi) + wind.north, vh * std::sin(psi) + wind.east, -climb_rate + wind.down};
    s.wind_velocity = wind;
    s.true_airspeed = airspeed;
    const auto d = derive(airspeed, vh, 0.0, 0.0, position.altitude(), cfg);
    s.orientation = {d.roll, std::atan2(climb_rate, vh), psi};
    s.normal_acceleration = d.n;
    s.angle_of_attack = d.alpha;
    s.calibrated_airspeed = d.cas;
    s.power_lever_angle = d.pla;
    s.fuel_remaining = fuel;
    s.timestamp = stamp;
    return s;
}

double max_turn_rate_for_roll(double airspeed, double max_roll) {
    return kGravity * std::tan(max_roll) / std::max(airspeed, 1.0);
}

AircraftState plant_step(const AircraftState& s, const ControlCommand& cmd, const Vec3& wind, const PlantConfig& cfg) {
    const double dt = cfg.dt;
    const double psi0 = s.orientation.yaw;
    const double omega = cmd.turn_rate;
    const double v0 = s.true_airspeed;
    const double v1 = std::max(cfg.v_floor, v0 + cmd.longitudinal_accel * dt);
    const double v_mean = 0.5 * (v0 + v1);
    const double climb = std::clamp(cmd.climb_rate, -0.95 * v_mean, 0.95 * v_mean);
    const double vh_mean = horizontal_from(v_mean, climb);
    const double psi1 = psi0 + omega * dt;

    Vec3 dp;
    if (std::abs(omega) > 1e-12) {
        const double r = vh_mean / omega;
        dp.north = r * (std::sin(psi1) - std::sin(psi0));
        dp.east = r * (std::cos(psi0) - std::cos(psi1));
    } else {
        dp.north = vh_mean * dt * std::cos(psi0);
        dp.east = vh_mean * dt * std::sin(psi0);
    }
    dp.down = -climb * dt;

    AircraftState n = s;
    n.position = s.position + dp + wind * dt;
    const double vh1 = horizontal_from(v1, climb);
    n.velocity = {vh1 * std::cos(psi1) + wind.north, vh1 * std::sin(psi1) + wind.east, -climb + wind.down};
    n.acceleration = (n.velocity - s.velocity) * (1.0 / dt);
    n.wind_velocity = wind;
    n.true_airspeed = v1;

    const auto d = derive(v1, vh1, omega, cmd.longitudinal_accel, n.position.altitude(), cfg);
    const Attitude att{d.roll, std::atan2(climb, vh1), wrap_angle(psi1)};
    n.orientation_rates = {(att.roll - s.orientation.roll) / dt, (att.pitch - s.orientation.pitch) / dt, omega};
    n.orientation = att;
    n.normal_acceleration = d.n;
    n.angle_of_attack = d.alpha;
    n.calibrated_airspeed = d.cas;
    n.power_lever_angle = d.pla;
    n.fuel_remaining = std::max(0.0, s.fuel_remaining - cfg.fuel_flow_max * d.pla * dt);
    n.timestamp = FrameStamp::at(s.timestamp.frame_index + 1, dt);
    return n;
}

AircraftState sense(const AircraftState& truth, const std::vector<SensorError>& errors, RngStream& rng) {
    AircraftState out = truth;
    for (const auto& e : errors) {
        double* f = scalar_field(out, e.field);
        if (!f) continue;
        *f += e.bias;
        if (e.noise_std > 0.0) *f += rng.normal(0.0, e.noise_std);
    }
    return out;
}

bool in_jetwash(const Vec3& wing_pos, const AircraftState& lead, const JetwashRegion& j) {
    const double speed = lead.velocity.norm();
    if (speed <= 0.0) return false;
    const Vec3 axis = lead.velocity * (-1.0 / speed);
    const Vec3 d = wing_pos - lead.position;
    const double along = d.dot(axis);
    if (along <= 0.0 || along > j.length) return false;
    const double off_axis = (d - axis * along).norm();
    return std::atan2(off_axis, along) <= j.half_angle;
}

ControlCommand LeadScript::command_at(std::int64_t frame, double dt) const {
    ControlCommand c = ControlCommand::maintain(FrameStamp::at(frame, dt));
    for (const auto& seg : segments) {
        if (seg.start_frame > frame) break;
        c.turn_rate = seg.turn_rate;
        c.climb_rate = seg.climb_rate;
        c.longitudinal_accel = seg.longitudinal_accel;
    }
    return c;
}

LeadScript LeadScript::racetrack(std::int64_t leg_frames, double turn_rate, double dt, std::int64_t total_frames) {
    LeadScript s;
    const auto turn_frames = static_cast<std::int64_t>(std::llround(kPi / std::abs(turn_rate) / dt));
    std::int64_t f = 0;
    while (f < total_frames) {
        s.segments.push_back({f, 0.0, 0.0, 0.0});
        f += leg_frames;
        s.segments.push_back({f, turn_rate, 0.0, 0.0});
        f += turn_frames;
    }
    return s;
}

}  // namespace mumt::plant
