#include "mumt/serialize.hpp"

namespace mumt {

void to_json(json& j, const Vec3& v) { j = json::array({v.north, v.east, v.down}); }

void from_json(const json& j, Vec3& v) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("vector must be [north, east, down]");
    v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(json& j, const FrameStamp& s) { j = json{{"frame", s.frame_index}, {"time", s.sim_time}}; }

void from_json(const json& j, FrameStamp& s) {
    s.frame_index = j.at("frame").get<std::int64_t>();
    s.sim_time = j.at("time").get<double>();
}

void to_json(json& j, const AircraftState& s) {
    j = json{{"position", s.position},
             {"velocity", s.velocity},
             {"acceleration", s.acceleration},
             {"normal_acceleration", s.normal_acceleration},
             {"attitude", {s.orientation.roll, s.orientation.pitch, s.orientation.yaw}},
             {"rates", {s.orientation_rates.p, s.orientation_rates.q, s.orientation_rates.r}},
             {"tas", s.true_airspeed},
             {"cas", s.calibrated_airspeed},
             {"wind", s.wind_velocity},
             {"fuel", s.fuel_remaining},
             {"pla", s.power_lever_angle},
             {"alpha", s.angle_of_attack},
             {"stamp", s.timestamp}};
}

void from_json(const json& j, AircraftState& s) {
    s.position = j.at("position").get<Vec3>();
    s.velocity = j.at("velocity").get<Vec3>();
    s.acceleration = j.at("acceleration").get<Vec3>();
    s.normal_acceleration = j.at("normal_acceleration").get<double>();
    const auto& a = j.at("attitude");
    s.orientation = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
    const auto& r = j.at("rates");
    s.orientation_rates = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    s.true_airspeed = j.at("tas").get<double>();
    s.calibrated_airspeed = j.at("cas").get<double>();
    s.wind_velocity = j.at("wind").get<Vec3>();
    s.fuel_remaining = j.at("fuel").get<double>();
    s.power_lever_angle = j.at("pla").get<double>();
    s.angle_of_attack = j.at("alpha").get<double>();
    s.timestamp = j.at("stamp").get<FrameStamp>();
}

void to_json(json& j, const ControlCommand& c) {
    j = json{{"turn", c.turn_rate}, {"climb", c.climb_rate}, {"accel", c.longitudinal_accel}, {"frame", c.stamp.frame_index},
             {"time", c.stamp.sim_time}};
}

void from_json(const json& j, ControlCommand& c) {
    c.turn_rate = j.at("turn").get<double>();
    c.climb_rate = j.at("climb").get<double>();
    c.longitudinal_accel = j.at("accel").get<double>();
    c.stamp = {j.value("frame", std::int64_t{0}), j.value("time", 0.0)};
}

json fence_to_json(const GeofenceConstraint& g) {
    json poly = json::array();
    for (const auto& v : g.polygon) poly.push_back({v.north, v.east});
    return json{{"polygon", poly}, {"floor", g.altitude_floor}, {"ceiling", g.altitude_ceiling}};
}

GeofenceConstraint fence_from_json(const json& j) {
    GeofenceConstraint g;
    for (const auto& v : j.at("polygon")) g.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    g.altitude_floor = j.at("floor").get<double>();
    g.altitude_ceiling = j.at("ceiling").get<double>();
    return g;
}

json deep_merge(json base, const json& over) {
    if (!base.is_object() || !over.is_object()) return over;
    for (auto it = over.begin(); it != over.end(); ++it) {
        if (base.contains(it.key())) base[it.key()] = deep_merge(base[it.key()], it.value());
        else base[it.key()] = it.value();
    }
    return base;
}

void to_json(json& j, const EnvelopeLimits& e) {
    j = json{{"max_roll", e.max_roll},   {"max_pitch", e.max_pitch}, {"alpha_min", e.alpha_min},
             {"alpha_max", e.alpha_max}, {"v_min", e.v_min},         {"v_max", e.v_max},
             {"n_min", e.n_min},         {"n_max", e.n_max},         {"altitude_floor", e.altitude_floor},
             {"altitude_ceiling", e.altitude_ceiling}};
}

void from_json(const json& j, EnvelopeLimits& e) {
    e.max_roll = j.value("max_roll", e.max_roll);
    e.max_pitch = j.value("max_pitch", e.max_pitch);
    e.alpha_min = j.value("alpha_min", e.alpha_min);
    e.alpha_max = j.value("alpha_max", e.alpha_max);
    e.v_min = j.value("v_min", e.v_min);
    e.v_max = j.value("v_max", e.v_max);
    e.n_min = j.value("n_min", e.n_min);
    e.n_max = j.value("n_max", e.n_max);
    e.altitude_floor = j.value("altitude_floor", e.altitude_floor);
    e.altitude_ceiling = j.value("altitude_ceiling", e.altitude_ceiling);
}

}  // namespace mumt
