#include <algorithm>
#include <cmath>
#include <map>

#include "sim_detail.hpp"

namespace mumt::sim::detail {

using datalink::Field;
using datalink::PositionReport;
using K = FaultSpec::Kind;

const FaultSpec* Faults::find(K kind, std::string_view target, std::int64_t k) const {
    for (const auto& f : *faults_)
        if (f.kind == kind && f.active(k) && (target.empty() || f.target == target)) return &f;
    return nullptr;
}

std::vector<const FaultSpec*> Faults::all(K kind, std::string_view target, std::int64_t k) const {
    std::vector<const FaultSpec*> out;
    for (const auto& f : *faults_)
        if (f.kind == kind && f.active(k) && (target.empty() || f.target == target)) out.push_back(&f);
    return out;
}

double Faults::sum(K kind, std::string_view target, std::int64_t k) const {
    double s = 0.0;
    for (const auto* f : all(kind, target, k)) s += f->value;
    return s;
}

namespace {

Vec3 vec_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

std::int64_t to_frame(double seconds_or_frames) { return static_cast<std::int64_t>(std::llround(seconds_or_frames)); }

// Requirement rows for a wrong or a missing value of each report field.
const std::map<std::string, std::string>& incorrect_rows() {
    static const std::map<std::string, std::string> m = {
        {"position", "RL1.5.11"},           {"attitude", "RL1.5.13"},
        {"orientation_rates", "RL1.5.15"},  {"true_airspeed", "RL1.5.16"},
        {"velocity", "RL1.5.18"},           {"acceleration", "RL1.5.20"},
        {"fuel_remaining", "RL1.5.22"},     {"calibrated_airspeed", "RL1.5.24"},
        {"normal_acceleration", "RL1.5.26"}, {"power_lever_angle", "RL1.5.28"},
        {"heading", "RL1.5.30"},            {"wind_velocity", "RL1.5.34"},
    };
    return m;
}

const std::map<std::string, std::string>& missing_rows() {
    static const std::map<std::string, std::string> m = {
        {"position", "RL1.5.12"},            {"attitude", "RL1.5.14"},
        {"true_airspeed", "RL1.5.17"},       {"velocity", "RL1.5.19"},
        {"acceleration", "RL1.5.21"},        {"fuel_remaining", "RL1.5.23"},
        {"calibrated_airspeed", "RL1.5.25"}, {"normal_acceleration", "RL1.5.27"},
        {"power_lever_angle", "RL1.5.29"},   {"heading", "RL1.5.31"},
        {"invalid_flag", "RL1.5.33"},        {"wind_velocity", "RL1.5.35"},
    };
    return m;
}

bool linear_field(Field f) {
    switch (f) {
        case Field::position:
        case Field::velocity:
        case Field::acceleration:
        case Field::true_airspeed:
        case Field::calibrated_airspeed:
        case Field::wind_velocity:
        case Field::fuel_remaining: return true;
        default: return false;
    }
}

std::vector<std::string> deviating_fields(const PositionReport& r, const AircraftState& truth,
                                          const ValidationSetup& v) {
    std::vector<std::string> out;
    auto t = truth;
    auto rep = r.lead_state;
    for (Field f : datalink::state_fields()) {
        if (!r.has(f)) continue;
        const double tol = linear_field(f) ? v.field_tolerance : v.angle_tolerance;
        for (const auto& sc : datalink::field_scalars(f))
            if (!(std::abs(*scalar_field(rep, sc) - *scalar_field(t, sc)) <= tol)) {
                out.emplace_back(datalink::field_name(f));
                break;
            }
    }
    return out;
}

json details_json(const PositionReport& r) {
    json d = json::array();
    for (const auto& x : r.invalid_details) d.push_back({x.field, x.reason});
    return d;
}

}  // namespace

Plan Plan::from(const Scenario& s) {
    Plan p;
    for (const auto& a : s.test_card) {
        if (a.action == "test_point") {
            PlanTestPoint tp;
            tp.id = a.params.at("id").get<std::string>();
            if (a.params.contains("rejoin")) tp.rejoin = vec_of(a.params["rejoin"]);
            tp.from = a.frame;
            tp.to = a.params.value("end", s.duration_frames);
            p.test_points.push_back(tp);
        } else if (a.action == "rejoin_point") {
            p.rejoin_points.emplace_back(a.frame, vec_of(a.params.at("point")));
        } else if (a.action == "voice") {
            VoiceEvent v;
            v.frame = a.frame;
            v.payload = a.params.value("payload", std::string("coordination"));
            v.window_start = to_frame(a.params.at("window_start").get<double>());
            v.window_end = to_frame(a.params.at("window_end").get<double>());
            p.voice.push_back(v);
        }
    }
    return p;
}

const PlanTestPoint* Plan::test_point_at(std::int64_t k) const {
    const PlanTestPoint* out = nullptr;
    for (const auto& tp : test_points)
        if (k >= tp.from && k <= tp.to) out = &tp;
    return out;
}

std::optional<Vec3> Plan::rejoin_at(std::int64_t k) const {
    std::optional<Vec3> out;
    std::int64_t at = -1;
    for (const auto& [f, v] : rejoin_points)
        if (f <= k && f >= at) {
            out = v;
            at = f;
        }
    if (const auto* tp = test_point_at(k); tp && tp->rejoin && tp->from >= at) out = tp->rejoin;
    return out;
}

LeadReport build_lead_report(const Scenario& s, const Faults& f, const Mitigations& m, const Plan& plan,
                             std::int64_t k, const std::vector<AircraftState>& lead_truth) {
    const AircraftState& truth = lead_truth.at(static_cast<std::size_t>(k));
    PositionReport r;
    r.lead_state = truth;

    for (const auto* e : f.all(K::lead_sensor, "", k))
        if (double* p = scalar_field(r.lead_state, e->field)) *p += e->value;
    if (!m("RL1.5.3"))
        for (const auto* e : f.all(K::async_sampling, "", k)) {
            const auto fld = datalink::field_from_name(e->field);
            if (!fld) continue;
            const auto lag = std::max<std::int64_t>(0, k - static_cast<std::int64_t>(e->value));
            auto late = lead_truth.at(static_cast<std::size_t>(lag));
            for (const auto& sc : datalink::field_scalars(*fld)) *scalar_field(r.lead_state, sc) = *scalar_field(late, sc);
        }

    std::int64_t lead_clock = k;
    if (!m("RL1.5.7")) lead_clock += static_cast<std::int64_t>(f.sum(K::clock_skew, "lead", k));
    r.report_timestamp = FrameStamp::at(lead_clock, s.dt);
    r.lead_state.timestamp = *r.report_timestamp;

    const PlanTestPoint* tp = plan.test_point_at(k);
    if (tp) r.test_point_id = tp->id;
    if (const auto* c = f.find(K::field_corruption, "test_point_id", k)) r.test_point_id = c->text;
    r.commanded_rejoin_point = plan.rejoin_at(k);

    std::vector<std::string> missing;
    for (const auto* e : f.all(K::field_missing, "L1.5", k)) {
        if (e->field == "rejoin") {
            r.commanded_rejoin_point.reset();
            continue;
        }
        const auto fld = datalink::field_from_name(e->field);
        if (!fld) continue;
        r.drop(*fld);
        missing.push_back(e->field);
        if (*fld == Field::timestamp) r.report_timestamp.reset();
        if (*fld == Field::test_point_id) r.test_point_id.clear();
        for (const auto& sc : datalink::field_scalars(*fld)) *scalar_field(r.lead_state, sc) = 0.0;
    }

    const auto deviating = deviating_fields(r, truth, s.validation);
    for (const auto& name : deviating) {
        const auto it = incorrect_rows().find(name);
        if (it != incorrect_rows().end() && m(it->second)) r.add_invalid(name, "cross_check");
    }
    const bool stamp_missing = !r.has(Field::timestamp);
    if (stamp_missing && m("RL1.5.8")) r.add_invalid("timestamp", "missing");
    if (const auto* e = f.find(K::component_fault, "lead_flag", k)) {
        r.add_invalid(e->field.empty() ? "position" : e->field, "spurious");
        if (m("RL1.5.32")) {
            // Re-verification keeps only flags the cross-check can confirm.
            std::erase_if(r.invalid_details, [&](const datalink::InvalidDetail& d) {
                if (d.field == "timestamp") return !stamp_missing;
                return std::find(deviating.begin(), deviating.end(), d.field) == deviating.end();
            });
            r.invalid = !r.invalid_details.empty();
        }
    }

    // Every report crosses the wire in its canonical encoding.
    const auto bytes = datalink::encode_report(r);
    const auto decoded = datalink::decode_report(bytes);
    if (!decoded || !datalink::bit_equal(*decoded, r)) throw std::logic_error("position report failed its round trip");

    LeadReport out;
    out.report = *decoded;
    out.payload = {
        {"sent", true},
        {"stamp", r.report_timestamp ? json(r.report_timestamp->frame_index) : json(nullptr)},
        {"missing", missing},
        {"invalid", r.invalid},
        {"details", details_json(r)},
        {"test_point_id", r.has(Field::test_point_id) ? json(r.test_point_id) : json(nullptr)},
        {"scheduled_test_point", tp ? tp->id : std::string()},
        {"rejoin", r.commanded_rejoin_point ? json(*r.commanded_rejoin_point) : json(nullptr)},
        {"deviating", deviating},
        {"bytes", bytes.size()},
    };
    return out;
}

WingLink::WingLink(const Scenario& s, const Mitigations& m) : s_(&s), m_(&m) {}

WingLink::Out WingLink::step(std::int64_t k, const std::vector<std::pair<PositionReport, int>>& arrivals,
                             const std::vector<AircraftState>& lead_truth, const Plan& plan, const Faults& f) {
    const Scenario& s = *s_;
    const Mitigations& m = *m_;
    Out out;
    json w = json::object();
    w["received"] = !arrivals.empty();

    datalink::ReasonablenessBounds b = s.validation.bounds;
    b.kinematic_checks = m("RL1.5.1");
    if (!m("RL1.5.4")) b.stale_frames = 0;

    bool accepted_any = false;
    json verdict = nullptr;
    json rules = json::array();
    json estimated = json::array();
    json report_missing = json::array();
    json delay = nullptr;
    json position_error = nullptr;
    bool degraded = false;
    bool rejoin_received = false;

    for (const auto& [arrived, d] : arrivals) {
        PositionReport r = arrived;
        const std::vector<PositionReport> hist(history_.begin(), history_.end());
        const auto v = datalink::validate_report(r, hist, b, k);
        verdict = std::string(datalink::verdict_name(v.verdict));
        rules = json::array();
        for (const auto& reason : v.reasons) rules.push_back(reason.rule_id);
        delay = d;
        rejoin_received = r.commanded_rejoin_point.has_value();
        estimated = json::array();
        report_missing = json::array();
        for (const auto& [name, row] : missing_rows()) {
            const auto fld = *datalink::field_from_name(name);
            if (!r.has(fld)) report_missing.push_back(name);
        }
        if (!r.has(Field::orientation_rates)) report_missing.push_back("orientation_rates");
        if (!r.has(Field::angle_of_attack)) report_missing.push_back("angle_of_attack");
        if (v.verdict != datalink::Verdict::valid) continue;

        // Fill missing groups from the last accepted report.
        for (Field fld : datalink::state_fields()) {
            if (r.has(fld)) continue;
            const auto name = std::string(datalink::field_name(fld));
            const auto row = missing_rows().find(name);
            if (row != missing_rows().end() && !m(row->second)) continue;
            if (!last_) continue;
            auto prev = last_->lead_state;
            for (const auto& sc : datalink::field_scalars(fld)) *scalar_field(r.lead_state, sc) = *scalar_field(prev, sc);
            if (fld == Field::position && r.report_timestamp && last_->report_timestamp) {
                const double gap = static_cast<double>(r.report_timestamp->frame_index - last_->report_timestamp->frame_index) * s.dt;
                r.lead_state.position = prev.position + prev.velocity * gap;
            }
            r.present |= datalink::bit(fld);
            estimated.push_back(name);
        }
        if (!r.has(Field::invalid_flag) && m("RL1.5.33")) {
            r.invalid = false;
            r.invalid_details.clear();
            r.present |= datalink::bit(Field::invalid_flag);
            estimated.push_back("invalid_flag");
        }

        accepted_any = true;
        degraded = d > 0 || !estimated.empty();
        const auto stamp = r.report_timestamp ? r.report_timestamp->frame_index : k;
        const auto at = static_cast<std::size_t>(std::clamp<std::int64_t>(stamp, 0, k));
        position_error = distance(r.lead_state.position, lead_truth.at(at).position);

        last_ = r;
        last_arrival_ = k;
        history_.push_back(r);
        if (history_.size() > 16) history_.pop_front();
        last_test_point_ = r.has(Field::test_point_id) ? r.test_point_id : std::string();
        if (r.commanded_rejoin_point) last_rejoin_ = r.commanded_rejoin_point;
    }

    const std::int64_t unknown = last_arrival_ ? k - *last_arrival_ : k + 1;
    const bool lead_unknown = unknown > s.validation.lead_unknown_frames;
    if (lead_unknown && m("RL1.5.2")) out.alerts.emplace_back("lead_unknown");

    const PlanTestPoint* tp = plan.test_point_at(k);
    const bool tp_active = tp && tp->rejoin.has_value();
    if (!arrivals.empty() && tp_active && !rejoin_received && m("RL1.5.6")) out.alerts.emplace_back("rejoin_unknown");

    // Test point the wingman flies.
    std::string test_point = last_test_point_;
    if (tp) {
        if (test_point.empty() && m("RL1.5.10")) test_point = tp->id;
        else if (!test_point.empty() && test_point != tp->id && m("RL1.5.9")) test_point = tp->id;
    }
    out.test_point = test_point;
    out.commanded_rejoin = last_rejoin_;

    if (last_) {
        const auto stamp = last_->report_timestamp ? last_->report_timestamp->frame_index : *last_arrival_;
        const double age = static_cast<double>(k - stamp) * s.dt;
        controllers::LeadEstimate e{last_->lead_state.position + last_->lead_state.velocity * age,
                                    last_->lead_state.velocity, std::max(0.0, age)};
        out.estimate = e;
        out.track = rta::LeadTrack{e.position, e.velocity, s.rta.uncertainty_base + s.rta.uncertainty_per_s * e.staleness};
    }

    // Voice coordination.
    json acted = json::array();
    bool missed = false;
    auto act = [&](const VoiceEvent& v) {
        acted.push_back({{"payload", v.payload}, {"window_start", v.window_start}, {"window_end", v.window_end}});
    };
    for (auto it = held_.begin(); it != held_.end();) {
        if (k >= it->window_start) {
            act(*it);
            it = held_.erase(it);
        } else {
            ++it;
        }
    }
    for (std::size_t i = 0; i < plan.voice.size(); ++i) {
        const auto& v = plan.voice[i];
        if (v.frame == k && !f.any(K::signal_dropout, "voice", k)) {
            delivered_voice_.insert(i);
            if (k < v.window_start && m("RL1.5.41")) held_.push_back(v);
            else if (k > v.window_end && m("RL1.5.42")) {
            } else act(v);
        }
        if (k == v.window_end + 1 && !delivered_voice_.count(i)) missed = true;
    }
    if (missed && m("RL1.5.37")) out.alerts.emplace_back("comm_dropout");

    w["verdict"] = verdict;
    w["rules"] = rules;
    w["accepted"] = accepted_any;
    w["degraded"] = degraded;
    w["estimated"] = estimated;
    w["report_missing"] = report_missing;
    w["delay"] = delay;
    w["last_accepted_frame"] = last_arrival_ ? json(*last_arrival_) : json(nullptr);
    w["unknown_frames"] = unknown;
    w["lead_unknown"] = lead_unknown;
    w["accepted_position_error"] = position_error;
    w["test_point_active"] = tp_active;
    w["rejoin_received"] = rejoin_received;
    w["voice_acted"] = acted;
    w["voice_missed"] = missed;
    out.payload = std::move(w);
    return out;
}

}  // namespace mumt::sim::detail
