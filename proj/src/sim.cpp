#include "mumt/sim.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mumt/selector.hpp"
#include "sim_detail.hpp"

namespace mumt::sim {

using detail::Faults;
using detail::Mitigations;
using K = FaultSpec::Kind;

std::string hash_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string trace_text(const monitors::Trace& t) {
    std::ostringstream os;
    t.write(os);
    return os.str();
}

void write_trace(const monitors::Trace& t, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write trace " + path.string());
    t.write(f);
}

const monitors::MonitorVerdict* RunResult::verdict(const std::string& id) const {
    for (const auto& v : verdicts)
        if (v.id == id) return &v;
    return nullptr;
}

namespace {

json cmd_json(const ControlCommand& c) { return c; }

void put_cmd(json& j, const char* key, const std::optional<ControlCommand>& c) {
    if (c) j[key] = cmd_json(*c);
}

json alerts_json(const std::vector<std::string>& a) { return {{"alerts", a}}; }

std::int64_t skew(const Faults& f, const char* target, std::int64_t k) {
    return static_cast<std::int64_t>(f.sum(K::clock_skew, target, k));
}

json context_of(const Scenario& s) {
    return {
        {"d_min", s.constraints.separation.d_min},
        {"geofence", fence_to_json(s.constraints.geofence)},
        {"envelope", s.constraints.epm_envelope},
        {"dt", s.dt},
        {"reaction_delay_frames", s.pilot.reaction_delay_frames},
        {"los_max_loss_frames", s.pilot.los_max_loss_frames},
        {"distraction_limit_frames", s.pilot.distraction_limit_frames},
        {"jetwash_takeover_frames", s.pilot.jetwash_takeover_frames},
        {"jetwash_dwell_frames", s.constraints.jetwash_avoidance.min_dwell_frames},
        {"lead_unknown_frames", s.validation.lead_unknown_frames},
        {"reasonable_speed", s.validation.bounds.v_max},
        {"reasonable_slack", s.validation.bounds.slack},
        {"h2_margin", 1.2},
        {"no_command_frames", 10},
    };
}

}  // namespace

RunResult run(const Scenario& s, const RunOptions& opt) {
    const std::uint64_t seed = opt.seed.value_or(s.seed);
    const std::set<std::string> enabled = opt.mitigations.value_or(s.mitigations);
    const Mitigations m(enabled);
    const Faults f(s.faults);
    const auto plan = detail::Plan::from(s);
    const std::int64_t n = s.duration_frames;
    const double dt = s.dt;

    plant::PlantConfig pc = s.plant;
    pc.dt = dt;
    const plant::JetwashRegion jet{s.constraints.jetwash_avoidance.length, s.constraints.jetwash_avoidance.half_angle,
                                   s.constraints.jetwash_avoidance.min_dwell_frames};

    // Preflight check of the operator-entered separation minimum.
    double d_min_used = s.constraints.separation.d_min;
    bool preflight_reject = false;
    if (s.operator_d_min) {
        const double v = *s.operator_d_min;
        if (m("RL2.W2.5") && (v < d_min_used || v > 20.0 * d_min_used)) preflight_reject = true;
        else d_min_used = v;
    }

    rta::RtaConfig rc = s.rta;
    rc.epm_clamp = m("RL2.W2.10");
    if (!m("RL2.W2.1")) rc.design_max_speed = s.off_design_max_speed;
    if (!m("RL2.W6.1")) rc.epm_margin = s.off_epm_margin;
    const rta::RtaMitigations rm{m("RL2.W2.2"), m("RL2.W2.3"), m("RL2.W2.4"), m("RL2.W2.6"),
                                 m("RL2.W2.12"), m("RL2.W2.14"), m("RL2.W2.15")};
    SafetyConstraintSet rta_cons = s.constraints;
    rta_cons.separation.d_min = d_min_used;
    rta::RtaFilter filter(rc, rm, rta_cons, pc, s.validation.bounds.v_max, s.validation.bounds.slack);

    controllers::ControllerConfig cc = s.controller;
    cc.envelope = pc.envelope;
    cc.default_on_fault = m("RL2.W1.2");
    cc.alert_on_fault = m("RL2.W1.3");
    auto nncs = controllers::make_controller(s.controller_name, cc, splitmix64(seed ^ fnv1a64("nncs")),
                                             s.constraints.geofence);
    controllers::PrimaryControllerStatus nncs_status;
    controllers::RejoinGoal goal = s.goal;

    epm::EpmConfig ecfg = s.epm;
    ecfg.limits = s.constraints.epm_envelope;
    if (!m("RL2.W6.3")) ecfg.hysteresis_frames = 1;
    ecfg.fail_safe_on_fault = m("RL2.W6.2");
    ecfg.report_faults = m("RL2.W6.4");
    epm::EpmState epm_state;

    pilot::PilotConfig pcfg = s.pilot;
    pcfg.monitor_los = m("RL2.W5.2");
    pcfg.visual_proximity = m("RL2.W4.1");
    pcfg.watch_jetwash = m("RL2.W2.9");
    pcfg.terminate_after_distraction = m("RL2.W5.4");
    pcfg.briefed_on_limits = m("RL2.W5.5");
    pcfg.respect_epm = m("RL2.W3.4");
    pcfg.monitor_envelope = m("RL2.W3.5");
    pilot::PilotModel pm;
    for (const auto& fs : s.faults)
        if (fs.kind == K::pilot_distraction && !pm.distracted_from) {
            pm.distracted_from = fs.from;
            pm.distracted_until = fs.to + 1;
        }
    const rta::Context pilot_ctx{&s.constraints, &rc, &pc};

    const selector::SelectorConfig scfg{m("RL2.W3.1"), m("RL2.W3.6"), m("RL2.W2.13"), m("RL2.W3.5")};
    selector::SelectorState sel;
    const bool unhealthy_at_start =
        f.any(K::pilot_impairment, "", 0) || f.any(K::pilot_incapacitation, "", 0);
    if (preflight_reject || (m("RL2.W5.1") && unhealthy_at_start)) {
        sel.source = selector::Source::pilot;
        sel.switch_reason = "preflight";
        pm.has_control = true;
        pm.takeover_reason = "preflight";
    }

    json resolved = s.resolved;
    resolved["mitigations"] = enabled;
    resolved["seed"] = seed;
    json header = {
        {"format", monitors::kTraceFormat},
        {"seed", seed},
        {"config_hash", hash_hex(resolved.dump())},
        {"frames", n},
        {"channels", monitors::channel_ids()},
        {"context", context_of(s)},
        {"scenario", resolved},
    };
    monitors::Recorder recorder(header);
    for (const auto& fs : s.faults)
        if (fs.kind == K::recorder_fault) recorder.add_fault({fs.target, fs.from, fs.to, fs.total});
    std::set<std::string> checked;
    if (m("RL2.W1.4")) checked.insert("W1");
    if (m("RL2.W2.16")) checked.insert("W2");
    if (m("RL2.W3.9")) checked.insert("W3");
    recorder.set_checked(checked);

    RngStream channel_rng(seed, "channel");
    RngStream sensor_rng(seed, "sensor");
    datalink::DatalinkChannel channel;
    detail::WingLink link(s, m);

    AircraftState lead = plant::make_state(s.lead.position, s.lead.heading, s.lead.airspeed, 0.0, s.lead.fuel, s.wind, pc,
                                           FrameStamp::at(0, dt));
    AircraftState wing = plant::make_state(s.wing.position, s.wing.heading, s.wing.airspeed, 0.0, s.wing.fuel, s.wind, pc,
                                           FrameStamp::at(0, dt));
    std::vector<AircraftState> lead_truth;
    lead_truth.reserve(static_cast<std::size_t>(n));

    std::optional<AircraftState> held_own;
    std::int64_t held_frame = 0;
    ControlCommand applied_last = ControlCommand::maintain(FrameStamp::at(0, dt));
    std::int64_t frames_without_command = 0;
    std::int64_t jetwash_dwell = 0;
    bool prev_w9 = false;
    std::vector<std::string> prev_w14;
    bool rta_enabled = s.rta.enabled;
    std::int64_t maneuver_until = -1;

    Summary sum;
    sum.frames = n;

    for (std::int64_t k = 0; k < n; ++k) {
        const FrameStamp st = FrameStamp::at(k, dt);
        if (k > 0) lead = plant::plant_step(lead, s.lead.script.command_at(k - 1, dt), s.wind, pc);
        lead.timestamp = st;
        wing.timestamp = st;
        lead_truth.push_back(lead);

        bool scripted_takeover = false;
        for (const auto& a : s.test_card) {
            if (a.frame != k) continue;
            if (a.action == "takeover") scripted_takeover = true;
            else if (a.action == "rta_off") rta_enabled = false;
            else if (a.action == "rta_on") rta_enabled = true;
            else if (a.action == "maneuver") {
                const auto& c = a.params.at("cmd");
                pm.maneuver = ControlCommand{c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>(), st};
                maneuver_until = k + a.params.value("duration", std::int64_t{50});
            } else if (a.action == "reengage") {
                sel = selector::reengage(sel);
                pm.has_control = false;
                pm.takeover_at.reset();
                pm.takeover_reason.clear();
                epm_state.engaged = true;
                epm_state.hysteresis_counter = 0;
            }
        }
        for (const auto& fs : s.faults)
            if (fs.kind == K::rta_toggle && fs.from == k) rta_enabled = fs.value != 0.0;
        if (maneuver_until >= 0 && k >= maneuver_until) {
            pm.maneuver.reset();
            maneuver_until = -1;
        }

        // L1.5: lead report over the datalink.
        auto lr = detail::build_lead_report(s, f, m, plan, k, lead_truth);
        auto outcome = datalink::transmit(lr.report, s.channel, channel_rng);
        if (f.any(K::signal_dropout, "L1.5", k)) outcome.delivered = false;
        if (const auto* e = f.find(K::stale_timestamp, "L1.5", k)) outcome.delay_frames += static_cast<int>(e->value);
        for (const auto* e : f.all(K::field_corruption, "L1.5", k))
            if (double* p = scalar_field(outcome.report.lead_state, e->field)) *p += e->value;
        if (outcome.delivered) channel.send(outcome, k);
        const auto arrivals = channel.receive(k);
        auto wl = link.step(k, arrivals, lead_truth, plan, f);

        // W4: wingman own-state sensing.
        std::vector<plant::SensorError> errs = s.plant.sensor;
        for (const auto* e : f.all(K::sensor_bias, "", k)) errs.push_back({e->field, e->value, 0.0});
        for (const auto* e : f.all(K::sensor_noise, "", k)) errs.push_back({e->field, 0.0, e->value});
        AircraftState sensed = plant::sense(wing, errs, sensor_rng);
        const std::int64_t air_clock = k + (m("RL2.W4.3") ? 0 : skew(f, "airframe", k));
        sensed.timestamp = FrameStamp::at(air_clock, dt);
        const bool w4_delivered = !f.any(K::signal_dropout, "W4", k);
        std::optional<AircraftState> own;
        if (w4_delivered) {
            own = sensed;
            held_own = sensed;
            held_frame = k;
        } else if (m("RL2.W4.2") && held_own) {
            AircraftState h = *held_own;
            h.position = h.position + h.velocity * (static_cast<double>(k - held_frame) * dt);
            h.timestamp = sensed.timestamp;
            own = h;
        }

        // W1: primary controller.
        if (wl.commanded_rejoin) {
            const bool safe = wl.commanded_rejoin->norm() >= s.validation.rejoin_factor * s.constraints.separation.d_min;
            if (safe || !m("RL1.5.5")) goal.rejoin_point = *wl.commanded_rejoin;
        }
        nncs_status.mode = f.any(K::component_fault, "nncs", k) ? controllers::Mode::faulted : controllers::Mode::nominal;
        const FrameStamp nncs_stamp = FrameStamp::at(k + (m("RL2.W1.5") ? 0 : skew(f, "nncs", k)), dt);
        std::vector<std::string> w13 = wl.alerts;
        std::optional<ControlCommand> w1;
        if (own) {
            auto r = nncs->step(*own, wl.estimate, goal, nncs_status, nncs_stamp);
            nncs_status = r.status;
            w1 = r.command;
            w13.insert(w13.end(), r.alerts.begin(), r.alerts.end());
        }
        const bool w1_delivered = w1 && !f.any(K::signal_dropout, "W1", k);

        // W2: run-time assurance.
        rta::RtaStepInput rin;
        if (w1_delivered) rin.primary = w1;
        rin.own = own;
        rin.lead = wl.track;
        rin.stamp = FrameStamp::at(k + (m("RL2.W2.11") ? 0 : skew(f, "rta", k)), dt);
        if (const auto* e = f.find(K::component_fault, "rta_lane_b", k)) rin.lane_b_turn_offset = e->value != 0.0 ? e->value : 0.1;
        if (const auto* e = f.find(K::component_fault, "rta", k); e && e->output) rin.common_mode_output = e->output;
        rin.solver_fault = f.any(K::component_fault, "rta_solver", k);
        rin.overrun_excess = f.sum(K::frame_overrun, "rta", k);
        rin.enabled = rta_enabled;
        const auto dec = filter.step(rin);
        if (dec && dec->intervened) ++sum.interventions;

        const bool w2_wire = dec && !f.any(K::signal_dropout, "W2", k);
        std::optional<selector::AutonomySignal> autonomy;
        if (w2_wire) {
            selector::AutonomySignal sig{dec->output, dec->status == rta::Status::failed};
            const auto* c = f.find(K::field_corruption, "W2", k);
            if (c && m("RL2.W2.7")) {
                // The two transported copies disagree: discard the signal.
            } else {
                if (c) sig.output.turn_rate += c->value;
                autonomy = sig;
            }
        }

        // W6/W8: envelope protection.
        if (f.any(K::component_fault, "epm", k)) epm_state.faulted = true;
        const auto eo = epm::epm_step(sensed, ecfg, prev_w9, epm_state);
        epm_state = eo.state;
        bool w8_engaged = eo.status.engaged;
        if (f.any(K::field_corruption, "W8", k) && !m("RL2.W8.1")) w8_engaged = !w8_engaged;
        const bool w8_present = !f.any(K::signal_dropout, "W8", k) || m("RL2.W8.2");

        // W5/W9: safety pilot.
        pm.incapacitated = f.any(K::pilot_incapacitation, "", k);
        pm.impaired = f.any(K::pilot_impairment, "", k);
        std::vector<std::string> pilot_alerts;
        if (dec) pilot_alerts = dec->alerts;
        pilot_alerts.insert(pilot_alerts.end(), w13.begin(), w13.end());
        if (w8_present && eo.status.faulted) pilot_alerts.emplace_back("epm_fault");
        pilot_alerts.insert(pilot_alerts.end(), prev_w14.begin(), prev_w14.end());
        const pilot::PilotInputs pin{wing, lead, pilot_alerts, scripted_takeover,
                                     sel.source == selector::Source::pilot, st};
        const auto po = pilot::pilot_step(pin, pm, pcfg, pilot_ctx, jet);
        const bool w5_present = !f.any(K::signal_dropout, "W5", k) || m("RL2.W5.3");
        const bool healthy = !pm.incapacitated && !pm.impaired;

        // W3: control selector.
        if (f.any(K::component_fault, "cs", k)) sel.faulted = true;
        const FrameStamp cs_stamp = FrameStamp::at(k + (m("RL2.W3.7") ? 0 : skew(f, "cs", k)), dt);
        std::optional<ControlCommand> pilot_cmd;
        if (w5_present) pilot_cmd = po.command;
        auto so = selector::select(autonomy, pilot_cmd, eo.command, po.takeover, sel, scfg, cs_stamp);
        sel = so.state;
        std::vector<std::string> w14 = so.alerts;
        if (sel.faulted) w14.emplace_back("cs_fault");
        if (preflight_reject) w14.emplace_back("config_unreasonable");
        if (sel.source == selector::Source::pilot) ++sum.pilot_frames;

        // Airframe actuation.
        const bool received = !f.any(K::signal_dropout, "W3", k) || m("RL2.W3.8");
        ControlCommand applied = so.command;
        if (const auto* c = f.find(K::field_corruption, "W3", k); c && !m("RL2.W3.2")) applied.turn_rate += c->value;
        if (received) {
            applied_last = applied;
            frames_without_command = 0;
        } else {
            ++frames_without_command;
        }
        const bool in_jet = plant::in_jetwash(wing.position, lead, jet);
        jetwash_dwell = in_jet ? jetwash_dwell + 1 : 0;

        // Record every channel.
        json l15 = {{"lead", lr.payload}, {"wing", wl.payload}};

        json p1 = {{"present", w1_delivered},
                   {"produced", w1.has_value()},
                   {"mode", nncs_status.mode == controllers::Mode::faulted ? "faulted" : "nominal"},
                   {"stamp", w1 ? json(nncs_stamp.frame_index) : json(nullptr)},
                   {"goal", goal.rejoin_point},
                   {"test_point", wl.test_point}};
        put_cmd(p1, "cmd", w1);

        json p2 = {{"present", w2_wire},
                   {"produced", dec.has_value()},
                   {"memory_available", filter.memory().has_value()},
                   {"d_min_used", d_min_used},
                   {"enabled", rta_enabled},
                   {"stamp", rin.stamp.frame_index}};
        if (dec) {
            p2["cmd"] = cmd_json(dec->output);
            p2["candidate"] = cmd_json(dec->candidate);
            p2["candidate_source"] = dec->candidate_source;
            p2["intervened"] = dec->intervened;
            p2["reason"] = dec->reason ? json(rta::reason_name(dec->reason->kind)) : json(nullptr);
            p2["policy"] = dec->policy;
            p2["status"] = dec->status == rta::Status::ok ? "ok" : "failed";
            p2["candidate_within_epm"] = dec->candidate_within_epm;
            p2["candidate_clean"] = dec->candidate_clean;
            p2["lanes_agree"] = dec->lanes_agree;
            p2["overrun"] = dec->overrun;
            p2["compute_cost"] = dec->compute_cost;
            p2["budget"] = dec->budget;
            p2["design_range_ok"] = dec->design_range_ok;
            p2["own"] = *own;
            if (dec->lead_used)
                p2["lead_used"] = {{"position", dec->lead_used->position},
                                   {"velocity", dec->lead_used->velocity},
                                   {"extra_radius", dec->lead_used->extra_radius}};
        }

        json p3 = {{"present", true},
                   {"cmd", cmd_json(so.command)},
                   {"source", selector::source_name(sel.source)},
                   {"faulted", sel.faulted},
                   {"stamp", cs_stamp.frame_index},
                   {"airframe_received", received},
                   {"autonomy_received", autonomy.has_value()},
                   {"switch_reason", sel.switch_reason}};
        if (received) p3["applied"] = cmd_json(applied);

        json p4 = {{"present", w4_delivered}, {"stamp", own ? json(own->timestamp.frame_index) : json(nullptr)}};
        if (own) p4["state"] = *own;

        json p5 = {{"present", w5_present},
                   {"has_control", po.takeover},
                   {"takeover_reason", pm.takeover_reason},
                   {"los", po.line_of_sight},
                   {"los_lost_frames", pm.los_lost_frames},
                   {"distracted", po.distracted},
                   {"distraction_length", po.distraction_length},
                   {"health_ok", healthy},
                   {"epm_request", po.epm_request}};
        if (w5_present) p5["cmd"] = cmd_json(po.command);

        json p6 = {{"switch", eo.command == epm::SwitchCommand::to_pilot ? "to_pilot" : "none"},
                   {"faulted", eo.state.faulted},
                   {"engaged", eo.state.engaged},
                   {"violations", eo.status.violations},
                   {"reason", eo.status.reason}};
        json p8 = {{"present", w8_present}, {"engaged", w8_engaged}, {"faulted", eo.status.faulted}};
        json p9 = {{"request", po.epm_request}};
        json truth = {{"lead", lead},
                      {"wing", wing},
                      {"jetwash", in_jet},
                      {"jetwash_dwell", jetwash_dwell},
                      {"frames_without_command", frames_without_command}};

        const json status = {{"nncs", p1["mode"]},
                             {"rta", dec ? p2["status"] : json("idle")},
                             {"cs", p3["source"]},
                             {"epm", eo.state.engaged ? "engaged" : "disengaged"}};
        std::vector<std::string> failed;
        auto put = [&](const char* ch, json payload) {
            const auto res = recorder.record({st, ch, std::move(payload), status});
            if (res.detected) failed.emplace_back(ch);
        };
        put("L1.5", std::move(l15));
        put("W1", std::move(p1));
        put("W2", std::move(p2));
        put("W3", std::move(p3));
        put("W4", std::move(p4));
        put("W5", std::move(p5));
        put("W6", std::move(p6));
        put("W7", alerts_json(dec ? dec->alerts : std::vector<std::string>{}));
        put("W8", std::move(p8));
        put("W9", std::move(p9));
        put("W13", alerts_json(w13));
        put("W14", alerts_json(w14));
        put("TRUTH", std::move(truth));
        put("REC", json{{"failed", failed}, {"alert", !failed.empty()}});

        prev_w9 = po.epm_request;
        prev_w14 = w14;
        wing = plant::plant_step(wing, applied_last, s.wind, pc);
    }

    RunResult out;
    out.trace = recorder.take();
    sum.final_source = selector::source_name(sel.source);
    sum.config_hash = out.trace.header.value("config_hash", std::string());
    sum.trace_hash = hash_hex(trace_text(out.trace));
    if (opt.catalog) {
        out.verdicts = monitors::evaluate(out.trace, opt.catalog->monitors());
        for (const auto& v : out.verdicts) {
            if (v.pass()) continue;
            if (v.severity == monitors::Severity::hazard) ++sum.hazard_violations;
            else ++sum.requirement_violations;
        }
    }
    out.summary = sum;
    return out;
}

}  // namespace mumt::sim
