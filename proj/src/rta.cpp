#include "mumt/rta.hpp"

#include <algorithm>
#include <array>

namespace mumt::rta {

BackupPolicy policy_from_name(const std::string& n) {
    if (n == "geofence_recovery") return BackupPolicy::geofence_recovery;
    if (n == "separation_recovery") return BackupPolicy::separation_recovery;
    if (n == "combined") return BackupPolicy::combined;
    throw ConfigError("unknown backup policy '" + n + "'");
}

std::string policy_name(BackupPolicy p) {
    switch (p) {
        case BackupPolicy::geofence_recovery: return "geofence_recovery";
        case BackupPolicy::separation_recovery: return "separation_recovery";
        case BackupPolicy::combined: return "combined";
    }
    return "?";
}

std::string reason_name(Reason::Kind k) {
    switch (k) {
        case Reason::Kind::geofence: return "geofence";
        case Reason::Kind::separation: return "separation";
        case Reason::Kind::epm: return "epm";
    }
    return "?";
}

void RtaConfig::validate(double dt) const {
    if (!(horizon > 0.0)) throw ConfigError("rta horizon must be > 0");
    if (!(prediction_dt > 0.0) || prediction_dt > 5.0 * dt + 1e-12)
        throw ConfigError("rta prediction_dt must be in (0, 5*dt]");
    if (!(frame_budget_fraction > 0.0 && frame_budget_fraction <= 1.0))
        throw ConfigError("rta frame_budget_fraction must be in (0, 1]");
    if (!(epm_margin > 0.0 && epm_margin <= 1.0)) throw ConfigError("rta epm_margin must be in (0, 1]");
    if (uncertainty_base < 0.0 || uncertainty_per_s < 0.0) throw ConfigError("rta uncertainty must be >= 0");
}

// ---------------------------------------------------------------------------
// EPM command limits

namespace {

struct CmdLimits {
    double turn, climb, accel_lo, accel_hi;
};

CmdLimits command_limits(const AircraftState& own, double accel, const EnvelopeLimits& lim, double m,
                         const plant::PlantConfig& p) {
    const double v = own.true_airspeed;
    const double a_hi = (lim.v_max * m - v) / p.dt;
    const double a_lo = (lim.v_min * (2.0 - m) - v) / p.dt;
    const double v1 = std::max(p.v_floor, v + std::clamp(accel, std::min(a_lo, a_hi), std::max(a_lo, a_hi)) * p.dt);
    const double v_fast = std::max(v, v1);
    const double v_slow = std::min(v, v1);

    // Roll bounded by the roll limit itself and by the load and alpha limits it induces.
    double roll = m * lim.max_roll;
    const double n_cap = 0.5 * (lim.n_min + lim.n_max) + 0.5 * (lim.n_max - lim.n_min) * m;
    if (n_cap > 1.0) roll = std::min(roll, std::acos(1.0 / n_cap));
    const double alpha_cap = 0.5 * (lim.alpha_min + lim.alpha_max) + 0.5 * (lim.alpha_max - lim.alpha_min) * m;
    if (p.alpha_per_g > 0.0) {
        const double n_alpha = 1.0 + (alpha_cap - p.alpha_zero) / p.alpha_per_g;
        if (n_alpha > 1.0) roll = std::min(roll, std::acos(1.0 / n_alpha));
    }
    CmdLimits out;
    out.turn = kGravity * std::tan(roll) / std::max(v_fast, 1.0);
    out.climb = v_slow * std::sin(m * lim.max_pitch);
    out.accel_lo = a_lo;
    out.accel_hi = a_hi;
    return out;
}

}  // namespace

ControlCommand epm_clamp(const ControlCommand& c, const AircraftState& own, const EnvelopeLimits& lim, double m,
                         const plant::PlantConfig& p) {
    ControlCommand o = p.envelope.saturate(c);
    auto lo = (lim.v_min * (2.0 - m) - own.true_airspeed) / p.dt;
    auto hi = (lim.v_max * m - own.true_airspeed) / p.dt;
    if (lo > hi) std::swap(lo, hi);
    o.longitudinal_accel = std::clamp(o.longitudinal_accel, lo, hi);
    o = p.envelope.saturate(o);
    const auto L = command_limits(own, o.longitudinal_accel, lim, m, p);
    o.turn_rate = std::clamp(o.turn_rate, -L.turn, L.turn);
    o.climb_rate = std::clamp(o.climb_rate, -L.climb, L.climb);
    return o;
}

std::optional<std::string> epm_command_violation(const ControlCommand& c, const AircraftState& own,
                                                 const EnvelopeLimits& lim, double m, const plant::PlantConfig& p) {
    const auto L = command_limits(own, c.longitudinal_accel, lim, m, p);
    const double tol = 1e-9;
    if (std::abs(c.turn_rate) > L.turn * (1 + tol)) return "roll";
    if (std::abs(c.climb_rate) > L.climb * (1 + tol)) return "pitch";
    const double lo = std::min(L.accel_lo, L.accel_hi), hi = std::max(L.accel_lo, L.accel_hi);
    if (c.longitudinal_accel > hi + tol && c.longitudinal_accel > 0.0) return "airspeed";
    if (c.longitudinal_accel < lo - tol && c.longitudinal_accel < 0.0) return "airspeed";
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Prediction

namespace {

struct Kin {
    double n, e, d, psi, v, climb;
    Vec3 wind;
};

Kin kin_of(const AircraftState& s) {
    return {s.position.north, s.position.east, s.position.down, s.orientation.yaw, s.true_airspeed, s.climb_rate(),
            s.wind_velocity};
}

// Same closed-form step as the plant, at the prediction step length.
void advance(Kin& k, const ControlCommand& c, double h, const plant::PlantConfig& p) {
    const double v1 = std::max(p.v_floor, k.v + c.longitudinal_accel * h);
    const double vm = 0.5 * (k.v + v1);
    const double climb = std::clamp(c.climb_rate, -0.95 * vm, 0.95 * vm);
    const double vh = std::sqrt(std::max(vm * vm - climb * climb, 0.0));
    const double psi1 = k.psi + c.turn_rate * h;
    if (std::abs(c.turn_rate) > 1e-12) {
        const double r = vh / c.turn_rate;
        k.n += r * (std::sin(psi1) - std::sin(k.psi));
        k.e += r * (std::cos(k.psi) - std::cos(psi1));
    } else {
        k.n += vh * h * std::cos(k.psi);
        k.e += vh * h * std::sin(k.psi);
    }
    k.n += k.wind.north * h;
    k.e += k.wind.east * h;
    k.d += (-climb + k.wind.down) * h;
    k.psi = psi1;
    k.v = v1;
    k.climb = climb;
}

struct Face {
    double a, b, c;  // margin = a*north + b*east + c, >= 0 inside
};

class Checker {
public:
    Checker(const Context& ctx, const std::optional<LeadTrack>& lead) : ctx_(ctx), lead_(lead) {
        const auto& g = ctx.constraints->geofence;
        double area2 = 0.0;
        for (std::size_t i = 0; i < g.polygon.size(); ++i) {
            const auto& p = g.polygon[i];
            const auto& q = g.polygon[(i + 1) % g.polygon.size()];
            area2 += p.north * q.east - q.north * p.east;
        }
        const double s = area2 >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < g.polygon.size(); ++i) {
            const auto& p = g.polygon[i];
            const auto& q = g.polygon[(i + 1) % g.polygon.size()];
            const double len = std::hypot(q.north - p.north, q.east - p.east);
            const double dn = q.north - p.north, de = q.east - p.east;
            faces_.push_back({-s * de / len, s * dn / len, s * (de * p.north - dn * p.east) / len});
        }
        floor_ = g.altitude_floor + ctx.cfg->fence_margin;
        ceil_ = g.altitude_ceiling - ctx.cfg->fence_margin;
        if (lead) radius_ = ctx.constraints->separation.d_min + lead->extra_radius;
        const auto c = g.centroid();
        cn_ = c.north;
        ce_ = c.east;
        alt_mid_ = g.altitude_mid();
    }

    double fence_margin(double n, double e) const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& f : faces_) m = std::min(m, f.a * n + f.b * e + f.c);
        return m;
    }

    bool fence_ok(const Kin& k) const {
        const double alt = -k.d;
        return alt >= floor_ && alt <= ceil_ && fence_margin(k.n, k.e) >= ctx_.cfg->fence_margin;
    }

    Vec3 lead_at(double t) const { return lead_->position + lead_->velocity * t; }

    // Closest approach over the chord between two samples, relative motion taken as linear.
    bool separation_ok(const Kin& k0, double t0, const Kin& k1, double t1) const {
        if (!lead_) return true;
        const Vec3 r0 = Vec3{k0.n, k0.e, k0.d} - lead_at(t0);
        const Vec3 r1 = Vec3{k1.n, k1.e, k1.d} - lead_at(t1);
        const Vec3 dr = r1 - r0;
        const double dd = dr.dot(dr);
        double s = dd > 0.0 ? std::clamp(-r0.dot(dr) / dd, 0.0, 1.0) : 0.0;
        return (r0 + dr * s).norm() >= radius_;
    }

    bool separation_ok_now(const Kin& k) const {
        if (!lead_) return true;
        return distance({k.n, k.e, k.d}, lead_->position) >= radius_;
    }

    const Context& ctx() const { return ctx_; }
    const std::optional<LeadTrack>& lead() const { return lead_; }
    double cn() const { return cn_; }
    double ce() const { return ce_; }
    double alt_mid() const { return alt_mid_; }
    double floor() const { return floor_; }
    double ceil() const { return ceil_; }

private:
    const Context& ctx_;
    const std::optional<LeadTrack>& lead_;
    std::vector<Face> faces_;
    double floor_ = 0, ceil_ = 0, radius_ = 0, cn_ = 0, ce_ = 0, alt_mid_ = 0;
};

template <class Policy>
Assessment roll(const Kin& start, const Checker& chk, Policy&& policy) {
    const auto& cfg = *chk.ctx().cfg;
    const auto& p = *chk.ctx().plant;
    Assessment a;
    Kin k = start;
    if (!chk.fence_ok(k)) return {false, 0.0, Reason::Kind::geofence, 0};
    if (!chk.separation_ok_now(k)) return {false, 0.0, Reason::Kind::separation, 0};
    const int n = static_cast<int>(std::ceil(cfg.horizon / cfg.prediction_dt - 1e-9));
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
        const ControlCommand c = policy(k, t);
        Kin next = k;
        advance(next, c, cfg.prediction_dt, p);
        const double t1 = t + cfg.prediction_dt;
        ++a.steps;
        if (!chk.fence_ok(next)) return {false, t1, Reason::Kind::geofence, a.steps};
        if (!chk.separation_ok(k, t, next, t1)) return {false, t1, Reason::Kind::separation, a.steps};
        k = next;
        t = t1;
    }
    return a;
}

enum class Backup { geofence_recovery, separation_recovery, combined, break_left, break_right };

std::string backup_name(Backup b) {
    switch (b) {
        case Backup::geofence_recovery: return "geofence_recovery";
        case Backup::separation_recovery: return "separation_recovery";
        case Backup::combined: return "combined";
        case Backup::break_left: return "break_left";
        case Backup::break_right: return "break_right";
    }
    return "?";
}

// Clamp a policy command to the envelope and EPM margin for a predicted state.
ControlCommand clamp_kin(ControlCommand c, const Kin& k, const Context& ctx) {
    AircraftState s;
    s.true_airspeed = k.v;
    if (!ctx.cfg->epm_clamp) return ctx.plant->envelope.saturate(c);
    return epm_clamp(c, s, ctx.constraints->epm_envelope, ctx.cfg->epm_margin, *ctx.plant);
}

ControlCommand backup_command(Backup b, const Kin& k, double t, const Checker& chk) {
    const auto& ctx = chk.ctx();
    const auto& env = ctx.plant->envelope;
    const double alt = -k.d;
    const double band_lo = chk.floor() + 250.0, band_hi = chk.ceil() - 250.0;
    const auto band_limit = [&](double climb) {
        return std::clamp(climb, 0.5 * (band_lo - alt), 0.5 * (band_hi - alt));
    };
    const auto heading_to = [&](double dn, double de) { return 3.0 * wrap_angle(std::atan2(de, dn) - k.psi); };

    ControlCommand c;
    c.longitudinal_accel = 0.5 * (ctx.cfg->cruise_speed - k.v);
    const bool has_lead = chk.lead().has_value();
    Vec3 away{};
    double dist = std::numeric_limits<double>::infinity();
    if (has_lead) {
        const Vec3 l = chk.lead_at(t);
        away = Vec3{k.n, k.e, k.d} - l;
        dist = away.norm();
    }
    const double vertical_away = has_lead ? (away.down <= 0.0 ? env.max_climb_rate : -env.max_climb_rate) : 0.0;

    switch (b) {
        case Backup::geofence_recovery:
            c.turn_rate = heading_to(chk.cn() - k.n, chk.ce() - k.e);
            c.climb_rate = 0.5 * (chk.alt_mid() - alt);
            break;
        case Backup::separation_recovery:
            c.turn_rate = has_lead ? heading_to(away.north, away.east) : 0.0;
            c.climb_rate = band_limit(vertical_away);
            break;
        case Backup::combined: {
            double vn = chk.cn() - k.n, ve = chk.ce() - k.e;
            const double fn = std::hypot(vn, ve);
            const double wf = std::clamp(1.5 - chk.fence_margin(k.n, k.e) / 2000.0, 0.2, 1.5);
            vn = fn > 0 ? wf * vn / fn : 0.0;
            ve = fn > 0 ? wf * ve / fn : 0.0;
            if (has_lead) {
                const double hn = std::hypot(away.north, away.east);
                const double ws = std::clamp(2.0 - dist / 1000.0, 0.2, 1.5);
                if (hn > 0) {
                    vn += ws * away.north / hn;
                    ve += ws * away.east / hn;
                }
            }
            c.turn_rate = heading_to(vn, ve);
            c.climb_rate = band_limit(vertical_away != 0.0 ? vertical_away : 0.5 * (chk.alt_mid() - alt));
            break;
        }
        case Backup::break_left:
        case Backup::break_right:
            c.turn_rate = b == Backup::break_left ? -env.max_turn_rate : env.max_turn_rate;
            c.climb_rate = band_limit(vertical_away);
            break;
    }
    return clamp_kin(c, k, ctx);
}

std::array<Backup, 5> backup_order(Reason::Kind why, BackupPolicy preferred) {
    using B = Backup;
    if (why == Reason::Kind::separation) {
        if (preferred == BackupPolicy::geofence_recovery)
            return {B::geofence_recovery, B::separation_recovery, B::combined, B::break_left, B::break_right};
        if (preferred == BackupPolicy::combined)
            return {B::combined, B::separation_recovery, B::break_left, B::break_right, B::geofence_recovery};
        return {B::separation_recovery, B::combined, B::break_left, B::break_right, B::geofence_recovery};
    }
    if (preferred == BackupPolicy::separation_recovery)
        return {B::separation_recovery, B::geofence_recovery, B::combined, B::break_left, B::break_right};
    if (preferred == BackupPolicy::combined)
        return {B::combined, B::geofence_recovery, B::separation_recovery, B::break_left, B::break_right};
    return {B::geofence_recovery, B::combined, B::separation_recovery, B::break_left, B::break_right};
}

}  // namespace

Assessment rollout_command(const ControlCommand& c, const AircraftState& own, const std::optional<LeadTrack>& lead,
                           const Context& ctx) {
    const Checker chk(ctx, lead);
    return roll(kin_of(own), chk, [&](const Kin&, double) { return c; });
}

AssureResult assure(const ControlCommand& candidate, const AircraftState& own, const std::optional<LeadTrack>& lead,
                    const Context& ctx) {
    const auto& cfg = *ctx.cfg;
    const auto& lim = ctx.constraints->epm_envelope;
    const Checker chk(ctx, lead);
    const Kin start = kin_of(own);
    AssureResult r;

    ControlCommand first = candidate;
    std::optional<std::string> epm_limit;
    if (cfg.epm_clamp) {
        epm_limit = epm_command_violation(candidate, own, lim, cfg.epm_margin, *ctx.plant);
        if (epm_limit) first = epm_clamp(candidate, own, lim, cfg.epm_margin, *ctx.plant);
    }
    r.candidate_within_epm = !epm_limit;

    const auto hold = roll(start, chk, [&](const Kin&, double) { return first; });
    r.steps += hold.steps;
    r.candidate_clean = hold.clean && !epm_limit;
    if (hold.clean) {
        r.output = first;
        r.output.stamp = candidate.stamp;
        if (epm_limit) {
            r.intervened = true;
            r.reason = Reason{Reason::Kind::epm, 0.0, *epm_limit};
            r.policy = "epm_clamp";
        }
        return r;
    }

    r.intervened = true;
    r.reason = Reason{*hold.kind, hold.first_violation, {}};
    double best_time = -1.0;
    ControlCommand best;
    std::string best_name;
    for (Backup b : backup_order(*hold.kind, cfg.backup_policy)) {
        const auto a = roll(start, chk, [&](const Kin& k, double t) { return backup_command(b, k, t, chk); });
        r.steps += a.steps;
        const ControlCommand now = backup_command(b, start, 0.0, chk);
        if (a.clean) {
            r.output = now;
            r.output.stamp = candidate.stamp;
            r.policy = backup_name(b);
            return r;
        }
        if (a.first_violation > best_time) {
            best_time = a.first_violation;
            best = now;
            best_name = backup_name(b);
        }
    }
    r.ok = false;
    r.output = best;
    r.output.stamp = candidate.stamp;
    r.policy = best_name;
    return r;
}

// ---------------------------------------------------------------------------

RtaFilter::RtaFilter(RtaConfig cfg, RtaMitigations mit, SafetyConstraintSet constraints, plant::PlantConfig plant,
                     double reasonable_speed, double reasonable_slack)
    : cfg_(std::move(cfg)),
      mit_(mit),
      constraints_(std::move(constraints)),
      plant_(std::move(plant)),
      reasonable_speed_(reasonable_speed),
      reasonable_slack_(reasonable_slack) {}

std::optional<RtaDecision> RtaFilter::step(const RtaStepInput& in) {
    RtaDecision d;
    d.enabled = in.enabled;
    d.budget = cfg_.frame_budget_fraction * plant_.dt;

    if (in.primary) memory_ = in.primary;
    ControlCommand candidate;
    if (in.primary) {
        candidate = *in.primary;
        d.candidate_source = "primary";
    } else if (memory_ && mit_.use_memory) {
        candidate = *memory_;
        d.candidate_source = "memory";
    } else if (!memory_ && mit_.assume_maintain) {
        candidate = ControlCommand::maintain(in.stamp);
        d.candidate_source = "maintain";
    } else {
        return std::nullopt;
    }
    if (!in.own) return std::nullopt;
    candidate.stamp = in.stamp;
    d.candidate = candidate;
    d.lead_used = in.lead;
    const AircraftState& own = *in.own;

    bool unreasonable = !own.position.finite() || !std::isfinite(own.true_airspeed) ||
                        own.true_airspeed > reasonable_speed_ || own.true_airspeed < 0.0;
    if (!unreasonable && last_good_own_) {
        const auto gap = std::max<std::int64_t>(1, own.timestamp.frame_index - last_good_own_->timestamp.frame_index);
        const double allowed = reasonable_speed_ * static_cast<double>(gap) * plant_.dt + reasonable_slack_;
        unreasonable = distance(own.position, last_good_own_->position) > allowed;
    }
    if (!unreasonable) last_good_own_ = own;

    const double v = own.true_airspeed;
    d.design_range_ok = v <= cfg_.design_max_speed && v >= cfg_.design_min_speed;

    const Context ctx{&constraints_, &cfg_, &plant_};
    const auto lane_a = assure(candidate, own, in.lead, ctx);
    auto lane_b = assure(candidate, own, in.lead, ctx);
    if (in.lane_b_turn_offset) lane_b.output.turn_rate += *in.lane_b_turn_offset;
    d.lanes_agree = lane_a.output == lane_b.output && lane_a.intervened == lane_b.intervened;
    const int steps = lane_a.steps + lane_b.steps;
    d.compute_cost = cfg_.cost_base + cfg_.cost_per_step * steps + in.overrun_excess;
    const bool over = d.compute_cost > d.budget;

    const AssureResult& used = mit_.dual_compare ? lane_a : lane_b;
    d.candidate_within_epm = used.candidate_within_epm;
    d.candidate_clean = used.candidate_clean;

    auto fail = [&](const std::string& why) {
        d.status = Status::failed;
        if (mit_.alert_on_failure || why != "no_safe_command") d.alerts.push_back("rta_failed:" + why);
    };

    if (!in.enabled) {
        // Disabled: the primary command passes untouched; the guard keeps watching.
        d.output = candidate;
        if (mit_.toggle_guard && !used.candidate_clean && used.reason && used.reason->kind != Reason::Kind::epm)
            d.alerts.emplace_back("rta_off_violation_predicted");
        was_enabled_ = false;
        return d;
    }
    if (!was_enabled_ && mit_.toggle_guard) {
        const Checker chk(ctx, in.lead);
        const Kin k = kin_of(own);
        if (!check_geofence(own.position, constraints_.geofence).inside ||
            (in.lead && distance(own.position, in.lead->position) < constraints_.separation.d_min) ||
            !chk.separation_ok_now(k))
            d.alerts.emplace_back("reenable_while_violating");
    }
    was_enabled_ = true;

    d.output = used.output;
    d.intervened = used.intervened;
    d.reason = used.reason;
    d.policy = used.policy;
    if (used.intervened) d.alerts.emplace_back("rta_intervening");
    if (!used.ok || in.solver_fault) fail("no_safe_command");
    if (mit_.dual_compare && !d.lanes_agree) fail("lane_mismatch");
    if (mit_.reasonableness && unreasonable) fail("unreasonable_input");
    if (!d.design_range_ok) fail("out_of_design_range");
    if (over && mit_.detect_overrun) {
        d.overrun = true;
        d.alerts.emplace_back("rta_overrun");
        d.status = Status::failed;
    }
    if (in.common_mode_output) {
        d.output = *in.common_mode_output;
        d.output.stamp = in.stamp;
        d.intervened = !(d.output == candidate);
    }
    return d;
}

}  // namespace mumt::rta
