#include "mumt/core.hpp"

#include <algorithm>

namespace mumt {

double distance(const Vec3& a, const Vec3& b) {
    const double dn = a.north - b.north;
    const double de = a.east - b.east;
    const double dd = a.down - b.down;
    return std::sqrt(dn * dn + de * de + dd * dd);
}

double wrap_angle(double a) {
    if (!std::isfinite(a)) return a;
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

std::optional<std::string> state_invariant_violation(const AircraftState& s) {
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!s.position.finite() || !s.velocity.finite() || !s.acceleration.finite() || !s.wind_velocity.finite())
        return "non-finite vector field";
    if (!finite(s.normal_acceleration) || !finite(s.orientation.roll) || !finite(s.orientation.pitch) ||
        !finite(s.orientation.yaw) || !finite(s.orientation_rates.p) || !finite(s.orientation_rates.q) ||
        !finite(s.orientation_rates.r) || !finite(s.true_airspeed) || !finite(s.calibrated_airspeed) ||
        !finite(s.fuel_remaining) || !finite(s.power_lever_angle) || !finite(s.angle_of_attack))
        return "non-finite scalar field";
    if (s.true_airspeed < 0.0 || s.calibrated_airspeed < 0.0) return "negative airspeed";
    if (s.fuel_remaining < 0.0) return "negative fuel";
    if (std::abs(s.orientation.roll) > kPi) return "roll outside [-pi, pi]";
    if (s.power_lever_angle < 0.0 || s.power_lever_angle > 1.0) return "PLA outside [0, 1]";
    return std::nullopt;
}

ControlCommand CommandEnvelope::saturate(ControlCommand c) const {
    const auto clamp = [](double v, double lim) { return std::isfinite(v) ? std::clamp(v, -lim, lim) : 0.0; };
    c.turn_rate = clamp(c.turn_rate, max_turn_rate);
    c.climb_rate = clamp(c.climb_rate, max_climb_rate);
    c.longitudinal_accel = clamp(c.longitudinal_accel, max_accel);
    return c;
}

bool CommandEnvelope::contains(const ControlCommand& c) const {
    return c.finite() && std::abs(c.turn_rate) <= max_turn_rate && std::abs(c.climb_rate) <= max_climb_rate &&
           std::abs(c.longitudinal_accel) <= max_accel;
}

SeparationVerdict check_separation(const Vec3& lead, const Vec3& wing, const SeparationConstraint& c) {
    const double d = distance(lead, wing);
    return {!(d < c.d_min), d};
}

namespace {

double cross(const Vertex2& o, const Vertex2& a, const Vertex2& b) {
    return (a.north - o.north) * (b.east - o.east) - (a.east - o.east) * (b.north - o.north);
}

double winding_sign(const std::vector<Vertex2>& p) {
    double area2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& a = p[i];
        const auto& b = p[(i + 1) % p.size()];
        area2 += a.north * b.east - b.north * a.east;
    }
    return area2 >= 0.0 ? 1.0 : -1.0;
}

}  // namespace

void GeofenceConstraint::validate() const {
    if (polygon.size() < 3) throw ConfigError("geofence polygon needs at least 3 vertices");
    for (const auto& v : polygon)
        if (!std::isfinite(v.north) || !std::isfinite(v.east)) throw ConfigError("geofence vertex not finite");
    if (!(altitude_floor < altitude_ceiling)) throw ConfigError("geofence floor must be below ceiling");
    double sign = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double c = cross(polygon[i], polygon[(i + 1) % n], polygon[(i + 2) % n]);
        if (c == 0.0) throw ConfigError("geofence has collinear consecutive vertices");
        const double s = c > 0.0 ? 1.0 : -1.0;
        if (sign == 0.0) sign = s;
        else if (s != sign) throw ConfigError("geofence polygon is not convex");
    }
}

Vertex2 GeofenceConstraint::centroid() const {
    // Area centroid of a simple polygon.
    double a2 = 0.0, cn = 0.0, ce = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = polygon[i];
        const auto& q = polygon[(i + 1) % n];
        const double w = p.north * q.east - q.north * p.east;
        a2 += w;
        cn += (p.north + q.north) * w;
        ce += (p.east + q.east) * w;
    }
    if (a2 == 0.0) return polygon.empty() ? Vertex2{} : polygon.front();
    return {cn / (3.0 * a2), ce / (3.0 * a2)};
}

std::vector<double> GeofenceConstraint::face_margins(double north, double east) const {
    std::vector<double> out;
    out.reserve(polygon.size());
    const double sign = winding_sign(polygon);
    const Vertex2 pt{north, east};
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % polygon.size()];
        const double len = std::hypot(b.north - a.north, b.east - a.east);
        out.push_back(sign * cross(a, b, pt) / len);
    }
    return out;
}

GeofenceConstraint GeofenceConstraint::scaled(double factor) const {
    GeofenceConstraint g = *this;
    const auto c = centroid();
    for (auto& v : g.polygon) {
        v.north = c.north + (v.north - c.north) * factor;
        v.east = c.east + (v.east - c.east) * factor;
    }
    return g;
}

GeofenceVerdict check_geofence(const Vec3& pos, const GeofenceConstraint& g) {
    const double sign = winding_sign(g.polygon);
    const Vertex2 pt{pos.north, pos.east};
    for (std::size_t i = 0; i < g.polygon.size(); ++i) {
        const auto& a = g.polygon[i];
        const auto& b = g.polygon[(i + 1) % g.polygon.size()];
        if (sign * cross(a, b, pt) < 0.0) return {false, GeofenceVerdict::Face::polygon_edge, static_cast<int>(i)};
    }
    const double alt = pos.altitude();
    if (alt < g.altitude_floor) return {false, GeofenceVerdict::Face::floor, -1};
    if (alt > g.altitude_ceiling) return {false, GeofenceVerdict::Face::ceiling, -1};
    return {};
}

void EnvelopeLimits::validate() const {
    if (!(max_roll > 0.0) || !(max_pitch > 0.0)) throw ConfigError("envelope roll/pitch limits must be positive");
    if (!(alpha_min < alpha_max)) throw ConfigError("envelope alpha_min must be below alpha_max");
    if (!(v_min < v_max)) throw ConfigError("envelope v_min must be below v_max");
    if (!(n_min < n_max)) throw ConfigError("envelope n_min must be below n_max");
    if (!(altitude_floor < altitude_ceiling)) throw ConfigError("envelope altitude floor must be below ceiling");
}

std::vector<std::string> EnvelopeLimits::violations(const AircraftState& s, double scale) const {
    std::vector<std::string> out;
    const auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(s.orientation.roll) || std::abs(s.orientation.roll) > max_roll * scale) out.emplace_back("roll");
    if (bad(s.orientation.pitch) || std::abs(s.orientation.pitch) > max_pitch * scale) out.emplace_back("pitch");
    const double alpha_mid = 0.5 * (alpha_min + alpha_max);
    const double alpha_half = 0.5 * (alpha_max - alpha_min) * scale;
    if (bad(s.angle_of_attack) || std::abs(s.angle_of_attack - alpha_mid) > alpha_half) out.emplace_back("alpha");
    if (bad(s.true_airspeed) || s.true_airspeed < v_min / scale || s.true_airspeed > v_max * scale)
        out.emplace_back("airspeed");
    const double n_mid = 0.5 * (n_min + n_max);
    const double n_half = 0.5 * (n_max - n_min) * scale;
    if (bad(s.normal_acceleration) || std::abs(s.normal_acceleration - n_mid) > n_half) out.emplace_back("load");
    const double alt = s.position.altitude();
    if (bad(alt) || alt < altitude_floor / scale || alt > altitude_ceiling * scale) out.emplace_back("altitude");
    return out;
}

void SafetyConstraintSet::validate() const {
    if (!(separation.d_min > 0.0)) throw ConfigError("separation d_min must be positive");
    geofence.validate();
    epm_envelope.validate();
    if (!(line_of_sight.cone_half_angle > 0.0 && line_of_sight.cone_half_angle < kPi))
        throw ConfigError("line-of-sight cone half-angle must be in (0, pi)");
    if (!(jetwash_avoidance.length > 0.0)) throw ConfigError("jetwash length must be positive");
}

GeofenceConstraint rectangular_fence(double north_min, double north_max, double east_min, double east_max,
                                     double floor, double ceiling) {
    GeofenceConstraint g;
    g.polygon = {{north_min, east_min}, {north_max, east_min}, {north_max, east_max}, {north_min, east_max}};
    g.altitude_floor = floor;
    g.altitude_ceiling = ceiling;
    return g;
}

const std::vector<std::string>& state_scalar_fields() {
    static const std::vector<std::string> names = {
        "position.north", "position.east", "position.down", "velocity.north", "velocity.east", "velocity.down",
        "acceleration.north", "acceleration.east", "acceleration.down", "normal_acceleration", "roll", "pitch", "yaw",
        "p", "q", "r", "true_airspeed", "calibrated_airspeed", "wind.north", "wind.east", "wind.down",
        "fuel_remaining", "power_lever_angle", "angle_of_attack"};
    return names;
}

double* scalar_field(AircraftState& s, std::string_view n) {
    if (n == "position.north") return &s.position.north;
    if (n == "position.east") return &s.position.east;
    if (n == "position.down") return &s.position.down;
    if (n == "velocity.north") return &s.velocity.north;
    if (n == "velocity.east") return &s.velocity.east;
    if (n == "velocity.down") return &s.velocity.down;
    if (n == "acceleration.north") return &s.acceleration.north;
    if (n == "acceleration.east") return &s.acceleration.east;
    if (n == "acceleration.down") return &s.acceleration.down;
    if (n == "normal_acceleration") return &s.normal_acceleration;
    if (n == "roll") return &s.orientation.roll;
    if (n == "pitch") return &s.orientation.pitch;
    if (n == "yaw") return &s.orientation.yaw;
    if (n == "p") return &s.orientation_rates.p;
    if (n == "q") return &s.orientation_rates.q;
    if (n == "r") return &s.orientation_rates.r;
    if (n == "true_airspeed") return &s.true_airspeed;
    if (n == "calibrated_airspeed") return &s.calibrated_airspeed;
    if (n == "wind.north") return &s.wind_velocity.north;
    if (n == "wind.east") return &s.wind_velocity.east;
    if (n == "wind.down") return &s.wind_velocity.down;
    if (n == "fuel_remaining") return &s.fuel_remaining;
    if (n == "power_lever_angle") return &s.power_lever_angle;
    if (n == "angle_of_attack") return &s.angle_of_attack;
    return nullptr;
}

double scalar_field_value(const AircraftState& s, std::string_view n) {
    auto copy = s;
    const double* p = scalar_field(copy, n);
    return p ? *p : std::nan("");
}

Vec3 body_to_ned(const Vec3& frd, double heading) {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    return {frd.north * c - frd.east * s, frd.north * s + frd.east * c, frd.down};
}

}  // namespace mumt
