#include "mumt/pilot.hpp"

#include <algorithm>

namespace mumt::pilot {

void PilotConfig::validate() const {
    if (reaction_delay_frames < 0 || los_max_loss_frames < 0 || jetwash_takeover_frames < 0 ||
        distraction_limit_frames < 0)
        throw ConfigError("pilot delays must be >= 0");
    if (!(los_cone_half_angle > 0.0 && los_cone_half_angle < kPi))
        throw ConfigError("pilot LOS cone half-angle must be in (0, pi)");
    manual_goal.validate();
}

bool line_of_sight(const AircraftState& own, const Vec3& lead_pos, double half_angle) {
    const double cp = std::cos(own.orientation.pitch);
    const Vec3 nose{cp * std::cos(own.orientation.yaw), cp * std::sin(own.orientation.yaw),
                    -std::sin(own.orientation.pitch)};
    const Vec3 to = lead_pos - own.position;
    const double d = to.norm();
    if (d <= 0.0) return true;
    return std::acos(std::clamp(nose.dot(to) / d, -1.0, 1.0)) <= half_angle;
}

bool is_safety_alert(const std::string& a) {
    return a.rfind("rta_failed", 0) == 0 || a == "rta_overrun" || a == "rta_off_violation_predicted" ||
           a == "reenable_while_violating" || a == "nncs_fault" || a == "lead_unknown" || a == "rejoin_unknown" ||
           a == "no_rta_signal" || a == "no_command_source" || a == "epm_fault" || a == "cs_fault" ||
           a == "config_unreasonable";
}

PilotOutput pilot_step(const PilotInputs& in, PilotModel& m, const PilotConfig& cfg, const rta::Context& ctx,
                       const plant::JetwashRegion& jet) {
    PilotOutput out;
    const auto k = in.stamp.frame_index;
    const auto& sep = ctx.constraints->separation;

    out.line_of_sight = line_of_sight(in.own, in.lead.position, cfg.los_cone_half_angle);
    m.los_lost_frames = out.line_of_sight ? 0 : m.los_lost_frames + 1;
    const bool jetwash = plant::in_jetwash(in.own.position, in.lead, jet);
    m.jetwash_frames = jetwash ? m.jetwash_frames + 1 : 0;

    const bool distracted = m.distracted_from && m.distracted_until && k >= *m.distracted_from && k < *m.distracted_until;
    out.distracted = distracted;
    const bool distraction_just_ended = m.distracted_until && k == *m.distracted_until;
    if (distraction_just_ended) {
        m.ended_distraction_frames = *m.distracted_until - m.distracted_from.value_or(*m.distracted_until);
        out.distraction_length = static_cast<int>(m.ended_distraction_frames);
    }

    // Qualifying triggers, judged from truth.
    std::string trigger;
    bool premature = false;
    if (in.scripted_takeover) trigger = "test_card";
    for (const auto& a : in.alerts) {
        if (!trigger.empty()) break;
        if (is_safety_alert(a)) trigger = "alert:" + a;
    }
    if (trigger.empty() && cfg.monitor_los && m.los_lost_frames > cfg.los_max_loss_frames) trigger = "los_lost";
    if (trigger.empty() && cfg.visual_proximity && distance(in.own.position, in.lead.position) < cfg.proximity_factor * sep.d_min)
        trigger = "proximity";
    if (trigger.empty() && cfg.watch_jetwash && m.jetwash_frames >= cfg.jetwash_takeover_frames) trigger = "jetwash";
    if (trigger.empty() && cfg.monitor_envelope && !ctx.constraints->epm_envelope.violations(in.own).empty())
        trigger = "envelope";
    if (trigger.empty() && cfg.terminate_after_distraction && distraction_just_ended &&
        m.ended_distraction_frames > cfg.distraction_limit_frames)
        trigger = "distraction";
    if (trigger.empty() && !cfg.briefed_on_limits &&
        std::find(in.alerts.begin(), in.alerts.end(), "rta_intervening") != in.alerts.end()) {
        trigger = "rta_intervention";
        premature = true;
    }

    const int delay = cfg.reaction_delay_frames * (m.impaired ? cfg.impaired_delay_factor : 1);
    if (!m.has_control && !m.takeover_at && !trigger.empty() && !m.incapacitated) {
        // A distracted pilot only notices once the distraction ends.
        const std::int64_t noticed = distracted ? *m.distracted_until : k;
        m.takeover_at = (trigger == "test_card") ? k : noticed + delay;
        m.pending_reason = premature ? "premature:" + trigger : trigger;
    }
    if (!m.has_control && m.takeover_at && k >= *m.takeover_at && !m.incapacitated) {
        m.has_control = true;
        m.takeover_reason = m.pending_reason;
        out.reason = m.takeover_reason;
        out.epm_request = true;
    }
    out.takeover = m.has_control;

    // Manual command: always produced so the pilot path is available to the selector.
    if (m.incapacitated && m.last_command) {
        out.command = *m.last_command;
    } else {
        const controllers::LeadEstimate lead{in.lead.position, in.lead.velocity, 0.0};
        ControlCommand c = m.maneuver ? *m.maneuver
                                      : controllers::rejoin_guidance(in.own, lead, cfg.manual_goal, cfg.gains,
                                                                     ctx.plant->envelope);
        if (cfg.watch_jetwash && jetwash && !m.maneuver) {
            c.climb_rate = ctx.plant->envelope.max_climb_rate;
            c.turn_rate = ctx.plant->envelope.max_turn_rate;
        }
        if (in.selector_on_pilot || m.has_control) {
            rta::RtaConfig rc = *ctx.cfg;
            rc.epm_clamp = cfg.respect_epm;
            const rta::Context pc{ctx.constraints, &rc, ctx.plant};
            const rta::LeadTrack lt{in.lead.position, in.lead.velocity, rc.uncertainty_base};
            if (m.maneuver && !cfg.respect_epm) c = ctx.plant->envelope.saturate(c);
            else c = rta::assure(c, in.own, lt, pc).output;
        } else {
            c = ctx.plant->envelope.saturate(c);
        }
        c.stamp = in.stamp;
        out.command = c;
    }
    out.command.stamp = in.stamp;
    m.last_command = out.command;
    return out;
}

}  // namespace mumt::pilot
