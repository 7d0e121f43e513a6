#include <fstream>
#include <sstream>

#include "mumt/sim.hpp"

namespace mumt::sim {

namespace {

const std::vector<std::pair<FaultSpec::Kind, const char*>>& fault_names() {
    using K = FaultSpec::Kind;
    static const std::vector<std::pair<K, const char*>> t = {
        {K::signal_dropout, "signal_dropout"},
        {K::field_corruption, "field_corruption"},
        {K::field_missing, "field_missing"},
        {K::stale_timestamp, "stale_timestamp"},
        {K::clock_skew, "clock_skew"},
        {K::component_fault, "component_fault"},
        {K::pilot_incapacitation, "pilot_incapacitation"},
        {K::pilot_distraction, "pilot_distraction"},
        {K::pilot_impairment, "pilot_impairment"},
        {K::sensor_bias, "sensor_bias"},
        {K::sensor_noise, "sensor_noise"},
        {K::lead_sensor, "lead_sensor"},
        {K::async_sampling, "async_sampling"},
        {K::frame_overrun, "frame_overrun"},
        {K::recorder_fault, "recorder_fault"},
        {K::rta_toggle, "rta_toggle"},
    };
    return t;
}

template <typename T>
void opt(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

json load_doc(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open scenario " + path.string());
    try {
        return json::parse(f, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("scenario " + path.string() + ": " + e.what());
    }
}

json resolve(json doc, const std::filesystem::path& base_dir, int depth) {
    if (depth > 8) throw ConfigError("scenario 'extends' chain too deep");
    if (!doc.is_object()) throw ConfigError("scenario must be an object");
    if (!doc.contains("extends")) return doc;
    const auto parent_path = base_dir / doc["extends"].get<std::string>();
    json parent = resolve(load_doc(parent_path), parent_path.parent_path(), depth + 1);
    doc.erase("extends");
    parent.erase("id");
    parent.erase("description");
    return deep_merge(std::move(parent), doc);
}

std::set<std::string> make_toggleable() {
    std::set<std::string> s;
    auto add = [&](const std::string& prefix, std::initializer_list<int> rows) {
        for (int r : rows) s.insert(prefix + std::to_string(r));
    };
    add("RL2.W1.", {2, 3, 4, 5});
    add("RL2.W2.", {1, 2, 3, 4, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15, 16});
    add("RL2.W3.", {1, 2, 4, 5, 6, 7, 8, 9});
    add("RL2.W4.", {1, 2, 3});
    add("RL2.W5.", {1, 2, 3, 4, 5});
    add("RL2.W6.", {1, 2, 3, 4});
    add("RL2.W8.", {1, 2});
    for (int r = 1; r <= 42; ++r)
        if (r != 36 && r != 38 && r != 39 && r != 40) s.insert("RL1.5." + std::to_string(r));
    return s;
}

}  // namespace

std::string fault_kind_name(FaultSpec::Kind k) {
    for (const auto& [kind, name] : fault_names())
        if (kind == k) return name;
    return "?";
}

FaultSpec::Kind fault_kind_from_name(const std::string& n) {
    for (const auto& [kind, name] : fault_names())
        if (n == name) return kind;
    throw ConfigError("unknown fault kind '" + n + "'");
}

const std::set<std::string>& toggleable_mitigations() {
    static const std::set<std::string> s = make_toggleable();
    return s;
}

const std::set<std::string>& construction_enforced() {
    static const std::set<std::string> s{"RL2.W2.8", "RL2.W3.3"};
    return s;
}

std::set<std::string> parse_mitigation_list(const std::string& s) {
    if (s == "all") return toggleable_mitigations();
    std::set<std::string> out;
    if (s == "none" || s.empty()) return out;
    std::stringstream ss(s);
    std::string id;
    while (std::getline(ss, id, ',')) {
        if (id.empty()) continue;
        if (!toggleable_mitigations().count(id) && !construction_enforced().count(id))
            throw ConfigError("unknown mitigation id '" + id + "'");
        out.insert(id);
    }
    return out;
}

Scenario parse_scenario(const json& input, const std::filesystem::path& base_dir) {
    Scenario s;
    try {
        const json doc = resolve(input, base_dir, 0);
        s.resolved = doc;
        opt(doc, "id", s.id);
        opt(doc, "description", s.description);
        opt(doc, "seed", s.seed);
        opt(doc, "duration_frames", s.duration_frames);
        opt(doc, "dt", s.dt);
        s.plant.dt = s.dt;
        s.validation.bounds.dt = s.dt;

        if (doc.contains("plant")) {
            const auto& p = doc["plant"];
            opt(p, "v_floor", s.plant.v_floor);
            opt(p, "fuel_flow_max", s.plant.fuel_flow_max);
            if (p.contains("envelope")) {
                opt(p["envelope"], "max_turn_rate", s.plant.envelope.max_turn_rate);
                opt(p["envelope"], "max_climb_rate", s.plant.envelope.max_climb_rate);
                opt(p["envelope"], "max_accel", s.plant.envelope.max_accel);
            }
            if (p.contains("sensor"))
                for (const auto& e : p["sensor"])
                    s.plant.sensor.push_back({e.at("field").get<std::string>(), e.value("bias", 0.0), e.value("noise_std", 0.0)});
        }

        if (doc.contains("lead")) {
            const auto& l = doc["lead"];
            opt(l, "position", s.lead.position);
            opt(l, "heading", s.lead.heading);
            opt(l, "airspeed", s.lead.airspeed);
            opt(l, "fuel", s.lead.fuel);
            if (l.contains("script"))
                for (const auto& seg : l["script"])
                    s.lead.script.segments.push_back({seg.value("start", std::int64_t{0}), seg.value("turn", 0.0),
                                                      seg.value("climb", 0.0), seg.value("accel", 0.0)});
            if (l.contains("racetrack")) {
                const auto& r = l["racetrack"];
                s.lead.script = plant::LeadScript::racetrack(r.at("leg_frames").get<std::int64_t>(),
                                                             r.at("turn_rate").get<double>(), s.dt, s.duration_frames);
            }
        }
        if (doc.contains("wingman")) {
            const auto& w = doc["wingman"];
            opt(w, "position", s.wing.position);
            opt(w, "heading", s.wing.heading);
            opt(w, "airspeed", s.wing.airspeed);
            opt(w, "fuel", s.wing.fuel);
        }
        opt(doc, "wind", s.wind);

        s.constraints.geofence = rectangular_fence(-5000.0, 60000.0, -10000.0, 10000.0, 500.0, 9000.0);
        if (doc.contains("constraints")) {
            const auto& c = doc["constraints"];
            opt(c, "d_min", s.constraints.separation.d_min);
            if (c.contains("geofence")) {
                const auto& g = c["geofence"];
                if (g.contains("rectangle")) {
                    const auto& r = g["rectangle"];
                    s.constraints.geofence =
                        rectangular_fence(r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                                          r.at(3).get<double>(), g.value("floor", 500.0), g.value("ceiling", 9000.0));
                } else {
                    s.constraints.geofence = fence_from_json(g);
                }
            }
            if (c.contains("envelope")) s.constraints.epm_envelope = c["envelope"].get<EnvelopeLimits>();
            opt(c, "los_half_angle", s.constraints.line_of_sight.cone_half_angle);
            if (c.contains("jetwash")) {
                opt(c["jetwash"], "length", s.constraints.jetwash_avoidance.length);
                opt(c["jetwash"], "half_angle", s.constraints.jetwash_avoidance.half_angle);
                opt(c["jetwash"], "min_dwell_frames", s.constraints.jetwash_avoidance.min_dwell_frames);
            }
        }

        s.controller.envelope = s.plant.envelope;
        if (doc.contains("controller")) {
            const auto& c = doc["controller"];
            opt(c, "name", s.controller_name);
            if (c.contains("behavior")) s.controller.behavior = controllers::behavior_from_name(c["behavior"].get<std::string>());
            opt(c, "segment_s", s.controller.segment_s);
            if (c.contains("fault_output")) {
                const auto& f = c["fault_output"];
                s.controller.fault_output = {f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>(), {}};
            }
            if (c.contains("gains")) {
                const auto& g = c["gains"];
                opt(g, "k_position", s.controller.gains.k_position);
                opt(g, "max_correction", s.controller.gains.max_correction);
                opt(g, "k_heading", s.controller.gains.k_heading);
                opt(g, "k_speed", s.controller.gains.k_speed);
                opt(g, "k_altitude", s.controller.gains.k_altitude);
            }
        }
        if (doc.contains("goal")) {
            opt(doc["goal"], "rejoin_point", s.goal.rejoin_point);
            opt(doc["goal"], "capture_radius", s.goal.capture_radius);
        }

        if (doc.contains("rta")) {
            const auto& r = doc["rta"];
            opt(r, "horizon", s.rta.horizon);
            opt(r, "prediction_dt", s.rta.prediction_dt);
            if (r.contains("backup_policy")) s.rta.backup_policy = rta::policy_from_name(r["backup_policy"].get<std::string>());
            opt(r, "enabled", s.rta.enabled);
            opt(r, "frame_budget_fraction", s.rta.frame_budget_fraction);
            opt(r, "uncertainty_base", s.rta.uncertainty_base);
            opt(r, "uncertainty_per_s", s.rta.uncertainty_per_s);
            opt(r, "epm_margin", s.rta.epm_margin);
            opt(r, "fence_margin", s.rta.fence_margin);
            opt(r, "cruise_speed", s.rta.cruise_speed);
            opt(r, "design_max_speed", s.rta.design_max_speed);
            opt(r, "design_min_speed", s.rta.design_min_speed);
            opt(r, "off_design_max_speed", s.off_design_max_speed);
            opt(r, "off_epm_margin", s.off_epm_margin);
        }

        s.epm.limits = s.constraints.epm_envelope;
        if (doc.contains("epm")) opt(doc["epm"], "hysteresis_frames", s.epm.hysteresis_frames);

        s.pilot.manual_goal = s.goal;
        if (doc.contains("pilot")) {
            const auto& p = doc["pilot"];
            opt(p, "reaction_delay_frames", s.pilot.reaction_delay_frames);
            opt(p, "los_max_loss_frames", s.pilot.los_max_loss_frames);
            opt(p, "proximity_factor", s.pilot.proximity_factor);
            opt(p, "jetwash_takeover_frames", s.pilot.jetwash_takeover_frames);
            opt(p, "distraction_limit_frames", s.pilot.distraction_limit_frames);
            if (p.contains("manual_goal")) opt(p["manual_goal"], "rejoin_point", s.pilot.manual_goal.rejoin_point);
        }
        s.pilot.los_cone_half_angle = s.constraints.line_of_sight.cone_half_angle;

        if (doc.contains("channel")) {
            opt(doc["channel"], "dropout_probability", s.channel.dropout_probability);
            opt(doc["channel"], "max_delay_frames", s.channel.max_delay_frames);
        }
        if (doc.contains("validation")) {
            const auto& v = doc["validation"];
            opt(v, "v_max", s.validation.bounds.v_max);
            opt(v, "a_max", s.validation.bounds.a_max);
            opt(v, "stale_frames", s.validation.bounds.stale_frames);
            opt(v, "slack", s.validation.bounds.slack);
            opt(v, "lead_unknown_frames", s.validation.lead_unknown_frames);
            opt(v, "rejoin_factor", s.validation.rejoin_factor);
        }
        // Missing state groups are estimated on the wing side; only the stamp is mandatory by default.
        s.validation.bounds.required = datalink::bit(datalink::Field::timestamp);
        if (doc.contains("validation") && doc["validation"].contains("required"))
            for (const auto& n : doc["validation"]["required"]) {
                const auto fld = datalink::field_from_name(n.get<std::string>());
                if (!fld) throw ConfigError("validation.required: unknown field " + n.dump());
                s.validation.bounds.required |= datalink::bit(*fld);
            }
        if (doc.contains("operator") && doc["operator"].contains("d_min"))
            s.operator_d_min = doc["operator"]["d_min"].get<double>();

        if (doc.contains("faults"))
            for (const auto& f : doc["faults"]) {
                FaultSpec fs;
                fs.kind = fault_kind_from_name(f.at("kind").get<std::string>());
                opt(f, "target", fs.target);
                opt(f, "field", fs.field);
                opt(f, "value", fs.value);
                opt(f, "text", fs.text);
                opt(f, "total", fs.total);
                fs.from = f.value("from", std::int64_t{0});
                fs.to = f.value("to", s.duration_frames);
                if (f.contains("output")) {
                    const auto& o = f["output"];
                    fs.output = ControlCommand{o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>(), {}};
                }
                s.faults.push_back(std::move(fs));
            }
        if (doc.contains("test_card"))
            for (const auto& a : doc["test_card"]) {
                TestCardAction t;
                t.frame = a.at("frame").get<std::int64_t>();
                t.action = a.at("action").get<std::string>();
                t.params = a;
                s.test_card.push_back(std::move(t));
            }

        s.mitigations = toggleable_mitigations();
        if (doc.contains("mitigations")) {
            const auto& m = doc["mitigations"];
            if (m.is_string()) s.mitigations = parse_mitigation_list(m.get<std::string>());
            else s.mitigations = m.get<std::set<std::string>>();
        }
        opt(doc, "mitigation", s.mitigation);
        opt(doc, "target", s.target);
        if (doc.contains("expected")) s.expected = doc["expected"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError("scenario " + s.id + ": " + e.what());
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    Scenario s = parse_scenario(load_doc(path), path.parent_path());
    if (s.id.empty()) s.id = path.stem().string();
    return s;
}

void Scenario::validate(const monitors::Catalog* catalog) const {
    if (duration_frames <= 0) throw ConfigError("duration_frames must be > 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    constraints.validate();
    plant.validate();
    rta.validate(dt);
    pilot.validate();
    goal.validate();
    channel.validate();
    if (operator_d_min && !(*operator_d_min > 0.0)) throw ConfigError("operator d_min must be > 0");
    for (const auto& f : faults) {
        if (f.from < 0 || f.from >= duration_frames)
            throw ConfigError("fault " + fault_kind_name(f.kind) + " activates outside the scenario duration");
        if (f.to < f.from) throw ConfigError("fault " + fault_kind_name(f.kind) + " ends before it starts");
    }
    auto known = [&](const std::string& id) {
        if (catalog ? catalog->find(id) == nullptr : false) throw ConfigError("unknown requirement id '" + id + "'");
    };
    for (const auto& m : mitigations) known(m);
    if (!mitigation.empty()) known(mitigation);
    if (!target.empty()) known(target);
    for (const auto& e : expected) known(e);
}

}  // namespace mumt::sim
