#include "mumt/controllers.hpp"

#include <algorithm>
#include <mutex>

namespace mumt::controllers {

Behavior behavior_from_name(const std::string& n) {
    if (n == "nominal") return Behavior::nominal;
    if (n == "random") return Behavior::random;
    if (n == "ram") return Behavior::ram;
    if (n == "fence") return Behavior::fence;
    if (n == "weave") return Behavior::weave;
    throw ConfigError("unknown controller behavior '" + n + "'");
}

std::string behavior_name(Behavior b) {
    switch (b) {
        case Behavior::nominal: return "nominal";
        case Behavior::random: return "random";
        case Behavior::ram: return "ram";
        case Behavior::fence: return "fence";
        case Behavior::weave: return "weave";
    }
    return "?";
}

namespace {

double deadband(double v, double band) { return std::abs(v) < band ? 0.0 : v; }

ControlCommand finish(ControlCommand c, const Gains& g, const CommandEnvelope& env, FrameStamp stamp) {
    c = env.saturate(c);
    c.turn_rate = deadband(c.turn_rate, g.deadband);
    c.climb_rate = deadband(c.climb_rate, g.deadband);
    c.longitudinal_accel = deadband(c.longitudinal_accel, g.deadband);
    c.stamp = stamp;
    return c;
}

}  // namespace

ControlCommand rejoin_guidance(const AircraftState& own, const LeadEstimate& lead, const RejoinGoal& goal,
                               const Gains& g, const CommandEnvelope& env) {
    const double lead_heading = std::atan2(lead.velocity.east, lead.velocity.north);
    const Vec3 target = lead.position + body_to_ned(goal.rejoin_point, lead_heading);
    const Vec3 err = target - own.position;

    double cn = g.k_position * err.north;
    double ce = g.k_position * err.east;
    const double corr = std::hypot(cn, ce);
    if (corr > g.max_correction) {
        cn *= g.max_correction / corr;
        ce *= g.max_correction / corr;
    }
    const Vec3 air_lead = lead.velocity - own.wind_velocity;
    const double dn = air_lead.north + cn;
    const double de = air_lead.east + ce;

    ControlCommand c;
    c.turn_rate = g.k_heading * wrap_angle(std::atan2(de, dn) - own.orientation.yaw);
    const double own_h = std::hypot(own.velocity.north - own.wind_velocity.north,
                                    own.velocity.east - own.wind_velocity.east);
    c.longitudinal_accel = g.k_speed * (std::hypot(dn, de) - own_h);
    c.climb_rate = g.k_altitude * (-err.down) + (-lead.velocity.down);
    return env.saturate(c);
}

ScriptedRejoinController::ScriptedRejoinController(ControllerConfig cfg, std::uint64_t seed,
                                                   const GeofenceConstraint& fence)
    : cfg_(std::move(cfg)), rng_(seed, "nncs.adversary"), fence_(fence) {}

ControlCommand ScriptedRejoinController::adversarial(const AircraftState& own, const std::optional<LeadEstimate>& lead,
                                                     FrameStamp stamp) {
    const auto& env = cfg_.envelope;
    const double seg_frames = std::max(1.0, cfg_.segment_s / 0.02);
    if (stamp.frame_index >= segment_end_) {
        segment_end_ = stamp.frame_index + static_cast<std::int64_t>(seg_frames * rng_.uniform(0.5, 1.5));
        segment_cmd_ = {rng_.uniform(-env.max_turn_rate, env.max_turn_rate),
                        rng_.uniform(-env.max_climb_rate, env.max_climb_rate),
                        rng_.uniform(-env.max_accel, env.max_accel), stamp};
        if (cfg_.behavior == Behavior::weave)
            segment_cmd_ = {segment_cmd_.turn_rate >= 0.0 ? env.max_turn_rate : -env.max_turn_rate, 0.0, 0.0, stamp};
    }
    switch (cfg_.behavior) {
        case Behavior::random:
        case Behavior::weave: return segment_cmd_;
        case Behavior::ram: {
            if (!lead) return segment_cmd_;
            Gains hard = cfg_.gains;
            hard.k_position = 1.0;
            hard.max_correction = 200.0;
            hard.k_heading = 3.0;
            return rejoin_guidance(own, *lead, RejoinGoal{{0, 0, 0}, 1.0}, hard, env);
        }
        case Behavior::fence: {
            // Steer for the nearest face and dive or climb toward the nearer altitude bound.
            const auto margins = fence_.face_margins(own.position.north, own.position.east);
            const auto i = static_cast<std::size_t>(std::min_element(margins.begin(), margins.end()) - margins.begin());
            const auto& a = fence_.polygon[i];
            const auto& b = fence_.polygon[(i + 1) % fence_.polygon.size()];
            const double mid_n = 0.5 * (a.north + b.north) - own.position.north;
            const double mid_e = 0.5 * (a.east + b.east) - own.position.east;
            ControlCommand c;
            c.turn_rate = 3.0 * wrap_angle(std::atan2(mid_e, mid_n) - own.orientation.yaw);
            const double alt = own.position.altitude();
            c.climb_rate = (alt - fence_.altitude_floor < fence_.altitude_ceiling - alt) ? -env.max_climb_rate
                                                                                          : env.max_climb_rate;
            c.longitudinal_accel = env.max_accel;
            return c;
        }
        case Behavior::nominal: break;
    }
    return ControlCommand::maintain(stamp);
}

StepResult ScriptedRejoinController::step(const AircraftState& own, const std::optional<LeadEstimate>& lead,
                                          const RejoinGoal& goal, const PrimaryControllerStatus& status,
                                          FrameStamp stamp) {
    StepResult r;
    r.status = status;
    if (status.mode == Mode::faulted) {
        const ControlCommand c = cfg_.default_on_fault ? ControlCommand::maintain(stamp) : cfg_.fault_output;
        r.command = finish(c, cfg_.gains, cfg_.envelope, stamp);
        if (cfg_.alert_on_fault) r.alerts.emplace_back("nncs_fault");
        r.status.last_output = r.command;
        return r;
    }

    std::optional<LeadEstimate> use = lead;
    if (lead) {
        last_lead_ = lead;
        r.status.ever_had_lead = true;
    } else if (last_lead_) {
        use = last_lead_;
    }

    ControlCommand c;
    if (cfg_.behavior != Behavior::nominal) {
        c = adversarial(own, use, stamp);
    } else if (use) {
        c = rejoin_guidance(own, *use, goal, cfg_.gains, cfg_.envelope);
    } else {
        c = ControlCommand::maintain(stamp);
        r.alerts.emplace_back("no_lead_estimate");
    }
    r.command = finish(c, cfg_.gains, cfg_.envelope, stamp);
    r.status.last_output = r.command;
    return r;
}

namespace {

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::string, ControllerFactory>& registry() {
    static std::map<std::string, ControllerFactory> r = {
        {"scripted_rejoin",
         [](const ControllerConfig& c, std::uint64_t seed, const GeofenceConstraint& f) -> std::unique_ptr<PrimaryController> {
             return std::make_unique<ScriptedRejoinController>(c, seed, f);
         }}};
    return r;
}

}  // namespace

void register_controller(const std::string& name, ControllerFactory f) {
    std::lock_guard lock(registry_mutex());
    registry()[name] = std::move(f);
}

std::unique_ptr<PrimaryController> make_controller(const std::string& name, const ControllerConfig& cfg,
                                                    std::uint64_t seed, const GeofenceConstraint& fence) {
    std::lock_guard lock(registry_mutex());
    const auto it = registry().find(name);
    if (it == registry().end()) throw ConfigError("unknown primary controller '" + name + "'");
    return it->second(cfg, seed, fence);
}

}  // namespace mumt::controllers
