// Named frame predicates used by the monitor catalog.
//
// Generic forms take "CH/path[=value]" where CH is a channel id and path a
// '/'-separated key path into the payload. A value of "ctx.<key>" reads the
// trace header context.

#include <algorithm>
#include <cmath>

#include "mumt/datalink.hpp"
#include "mumt/monitors.hpp"
#include "mumt/plant.hpp"
#include "mumt/rta.hpp"

namespace mumt::monitors {

namespace {

struct Ref {
    std::string channel;
    std::vector<std::string> path;
    std::string value;
    bool has_value = false;
};

Ref parse_ref(const std::string& arg) {
    Ref r;
    std::string body = arg;
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
        r.value = body.substr(eq + 1);
        r.has_value = true;
        body.resize(eq);
    }
    std::size_t start = 0;
    const auto slash = body.find('/');
    r.channel = body.substr(0, slash);
    if (slash == std::string::npos) return r;
    start = slash + 1;
    while (start <= body.size()) {
        const auto next = body.find('/', start);
        r.path.push_back(body.substr(start, next - start));
        if (next == std::string::npos) break;
        start = next + 1;
    }
    return r;
}

const json* walk(const json* j, const std::vector<std::string>& path) {
    for (const auto& k : path) {
        if (!j || !j->is_object()) return nullptr;
        const auto it = j->find(k);
        if (it == j->end()) return nullptr;
        j = &*it;
    }
    return j;
}

const json* lookup(const FrameView& v, const Ref& r, std::int64_t frame) { return walk(v.ch_at(r.channel, frame), r.path); }

bool truthy(const json* j) { return j && j->is_boolean() && j->get<bool>(); }

double number_of(const FrameView& v, const std::string& s) {
    if (s.rfind("ctx.", 0) == 0) {
        const auto key = s.substr(4);
        if (!v.ctx().contains(key)) throw ConfigError("context key '" + key + "' missing");
        return v.ctx()[key].get<double>();
    }
    return std::stod(s);
}

bool payload_flag(const json* p, const char* key) { return p && truthy(walk(p, {key})); }

std::string payload_str(const json* p, const char* key) {
    if (!p) return {};
    const auto it = p->find(key);
    return it != p->end() && it->is_string() ? it->get<std::string>() : std::string{};
}

Vec3 vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

std::optional<AircraftState> truth_state(const FrameView& v, const char* who, std::int64_t frame) {
    const json* t = v.ch_at("TRUTH", frame);
    if (!t || !t->contains(who)) return std::nullopt;
    return t->at(who).get<AircraftState>();
}

bool has_alert(const json* p, const std::string& name) {
    if (!p) return false;
    const auto it = p->find("alerts");
    if (it == p->end() || !it->is_array()) return false;
    const bool prefix = !name.empty() && name.back() == '*';
    const std::string stem = prefix ? name.substr(0, name.size() - 1) : name;
    for (const auto& a : *it) {
        if (!a.is_string()) continue;
        const auto s = a.get<std::string>();
        if (prefix ? s.rfind(stem, 0) == 0 : s == stem) return true;
    }
    return false;
}

bool list_has(const json* list, const std::string& s) {
    if (!list || !list->is_array()) return false;
    for (const auto& x : *list) {
        if (x.is_string() && x.get<std::string>() == s) return true;
        if (x.is_array() && !x.empty() && x[0].is_string() && x[0].get<std::string>() == s) return true;
    }
    return false;
}

bool same_cmd(const json* a, const json* b) {
    if (!a || !b || !a->is_object() || !b->is_object()) return false;
    return a->at("turn") == b->at("turn") && a->at("climb") == b->at("climb") && a->at("accel") == b->at("accel");
}

bool separation_ok_at(const FrameView& v, std::int64_t f) {
    const json* t = v.ch_at("TRUTH", f);
    if (!t) return true;  // gaps belong to the completeness monitor
    const Vec3 lead = vec(t->at("lead").at("position"));
    const Vec3 wing = vec(t->at("wing").at("position"));
    return check_separation(lead, wing, v.constraints().separation).safe;
}

bool in_fence_at(const FrameView& v, std::int64_t f) {
    const json* t = v.ch_at("TRUTH", f);
    if (!t) return true;
    return check_geofence(vec(t->at("wing").at("position")), v.constraints().geofence).inside;
}

bool within_epm_at(const FrameView& v, std::int64_t f, double scale) {
    const auto w = truth_state(v, "wing", f);
    return !w || v.constraints().epm_envelope.violations(*w, scale).empty();
}

bool control_ok_at(const FrameView& v, std::int64_t f) {
    const json* t = v.ch_at("TRUTH", f);
    if (!t) return true;
    const double margin = v.ctx().value("h2_margin", 1.2);
    const std::int64_t dwell_limit = v.ctx().value("jetwash_dwell_frames", std::int64_t{150});
    const std::int64_t no_cmd_limit = v.ctx().value("no_command_frames", std::int64_t{10});
    if (t->value("jetwash_dwell", std::int64_t{0}) >= dwell_limit) return false;
    if (t->value("frames_without_command", std::int64_t{0}) >= no_cmd_limit) return false;
    return within_epm_at(v, f, margin);
}

bool load_ok_at(const FrameView& v, std::int64_t f) {
    const auto w = truth_state(v, "wing", f);
    if (!w) return true;
    const auto& e = v.constraints().epm_envelope;
    return w->normal_acceleration >= e.n_min && w->normal_acceleration <= e.n_max;
}

const json* lead_side(const FrameView& v) { return walk(v.ch("L1.5"), {"lead"}); }
const json* wing_side(const FrameView& v) { return walk(v.ch("L1.5"), {"wing"}); }

void install_generic() {
    register_predicate("rec", [](const FrameView& v, const std::string& a) { return v.ch(a) != nullptr; });
    register_predicate("present", [](const FrameView& v, const std::string& a) {
        return payload_flag(v.ch(a), "present");
    });
    register_predicate("true", [](const FrameView& v, const std::string& a) {
        return truthy(lookup(v, parse_ref(a), v.frame));
    });
    register_predicate("eq", [](const FrameView& v, const std::string& a) {
        const Ref r = parse_ref(a);
        const json* j = lookup(v, r, v.frame);
        if (!j) return false;
        if (j->is_string()) return j->get<std::string>() == r.value;
        if (j->is_number()) return j->get<double>() == number_of(v, r.value);
        if (j->is_boolean()) return (j->get<bool>() ? "true" : "false") == r.value;
        return false;
    });
    auto cmp = [](auto op) {
        return [op](const FrameView& v, const std::string& a) {
            const Ref r = parse_ref(a);
            const json* j = lookup(v, r, v.frame);
            return j && j->is_number() && op(j->get<double>(), number_of(v, r.value));
        };
    };
    register_predicate("gt", cmp(std::greater<double>{}));
    register_predicate("ge", cmp(std::greater_equal<double>{}));
    register_predicate("le", cmp(std::less_equal<double>{}));
    register_predicate("alert", [](const FrameView& v, const std::string& a) {
        const auto eq = a.find('=');
        return has_alert(v.ch(a.substr(0, eq)), eq == std::string::npos ? "" : a.substr(eq + 1));
    });
    // Null or absent stamps pass: a missing stamp is a different requirement.
    register_predicate("eq_frame", [](const FrameView& v, const std::string& a) {
        const json* j = lookup(v, parse_ref(a), v.frame);
        return !j || j->is_null() || (j->is_number_integer() && j->get<std::int64_t>() == v.frame);
    });
}

void install_hazards() {
    register_predicate("separation_ok", [](const FrameView& v, const std::string&) { return separation_ok_at(v, v.frame); });
    register_predicate("in_fence", [](const FrameView& v, const std::string&) { return in_fence_at(v, v.frame); });
    register_predicate("control_ok", [](const FrameView& v, const std::string&) { return control_ok_at(v, v.frame); });
    register_predicate("harm_free", [](const FrameView& v, const std::string&) {
        return separation_ok_at(v, v.frame) && control_ok_at(v, v.frame) && load_ok_at(v, v.frame);
    });
    register_predicate("truth_within_epm", [](const FrameView& v, const std::string&) {
        return within_epm_at(v, v.frame, 1.0);
    });
    register_predicate("proximity", [](const FrameView& v, const std::string& a) {
        const json* t = v.ch("TRUTH");
        if (!t) return false;
        const double factor = a.empty() ? 2.0 : std::stod(a);
        return distance(vec(t->at("lead").at("position")), vec(t->at("wing").at("position"))) <
               factor * v.constraints().separation.d_min;
    });
}

void install_cs_rta() {
    register_predicate("autonomy_epm_violation", [](const FrameView& v, const std::string&) {
        return payload_str(v.ch("W3"), "source") == "autonomy" && !within_epm_at(v, v.frame, 1.0);
    });
    register_predicate("pilot_flying_settled", [](const FrameView& v, const std::string&) {
        return payload_str(v.ch("W3"), "source") == "pilot" && payload_str(v.ch_at("W3", v.frame - 1), "source") == "pilot";
    });
    register_predicate("w3_matches_w2", [](const FrameView& v, const std::string&) {
        return same_cmd(walk(v.ch("W3"), {"cmd"}), walk(v.ch("W2"), {"cmd"}));
    });
    register_predicate("w3_applied_matches", [](const FrameView& v, const std::string&) {
        return same_cmd(walk(v.ch("W3"), {"cmd"}), walk(v.ch("W3"), {"applied"}));
    });
    register_predicate("w1_default_output", [](const FrameView& v, const std::string&) {
        const json* c = walk(v.ch("W1"), {"cmd"});
        return c && c->at("turn") == 0.0 && c->at("climb") == 0.0 && c->at("accel") == 0.0;
    });
    register_predicate("w2_epm_ok", [](const FrameView& v, const std::string&) {
        const json* w2 = v.ch("W2");
        if (!w2 || !w2->contains("own") || w2->at("own").is_null()) return true;
        const auto own = w2->at("own").get<AircraftState>();
        const auto cmd = w2->at("cmd").get<ControlCommand>();
        plant::PlantConfig pc;
        pc.dt = v.ctx().value("dt", pc.dt);
        return !rta::epm_command_violation(cmd, own, v.constraints().epm_envelope, 1.0, pc).has_value();
    });
    register_predicate("own_jump", [](const FrameView& v, const std::string&) {
        const json* now = v.ch("W4");
        const json* prev = v.ch_at("W4", v.frame - 1);
        if (!payload_flag(now, "present") || !payload_flag(prev, "present")) return false;
        const double dt = v.ctx().value("dt", 0.02);
        const double allowed = v.ctx().value("reasonable_speed", 350.0) * dt + v.ctx().value("reasonable_slack", 5.0);
        return distance(vec(now->at("state").at("position")), vec(prev->at("state").at("position"))) > allowed;
    });
    register_predicate("rta_reenabled_violating", [](const FrameView& v, const std::string&) {
        const json* now = v.ch("W2");
        const json* prev = v.ch_at("W2", v.frame - 1);
        if (!now || !prev || !payload_flag(now, "enabled") || payload_flag(prev, "enabled")) return false;
        return !in_fence_at(v, v.frame) || !separation_ok_at(v, v.frame);
    });
    register_predicate("dmin_ok", [](const FrameView& v, const std::string&) {
        const json* j = walk(v.ch("W2"), {"d_min_used"});
        return j && j->is_number() && j->get<double>() >= v.constraints().separation.d_min;
    });
    register_predicate("cost_over_budget", [](const FrameView& v, const std::string&) {
        const json* w2 = v.ch("W2");
        return payload_flag(w2, "produced") && w2->at("compute_cost").get<double>() > w2->at("budget").get<double>();
    });
    register_predicate("no_w1_with_memory", [](const FrameView& v, const std::string&) {
        return !payload_flag(v.ch("W1"), "present") && payload_flag(v.ch("W2"), "memory_available");
    });
    register_predicate("no_w1_no_memory", [](const FrameView& v, const std::string&) {
        return v.ch("W1") && !payload_flag(v.ch("W1"), "present") && v.ch("W2") &&
               !payload_flag(v.ch("W2"), "memory_available");
    });
    register_predicate("w1_w2_produced", [](const FrameView& v, const std::string&) {
        return payload_flag(v.ch("W1"), "present") && payload_flag(v.ch("W2"), "produced");
    });
    register_predicate("goal_safe", [](const FrameView& v, const std::string& a) {
        const json* g = walk(v.ch("W1"), {"goal"});
        if (!g || !g->is_array()) return true;
        const double factor = a.empty() ? 1.5 : std::stod(a);
        return vec(*g).norm() >= factor * v.constraints().separation.d_min;
    });
}

void install_pilot_epm() {
    register_predicate("takeover_qualified", [](const FrameView& v, const std::string&) {
        const json* w5 = v.ch("W5");
        return !payload_flag(w5, "has_control") || payload_str(w5, "takeover_reason").rfind("premature", 0) != 0;
    });
    register_predicate("epm_limit_switch", [](const FrameView& v, const std::string&) {
        const json* w6 = v.ch("W6");
        return payload_str(w6, "switch") == "to_pilot" && payload_str(w6, "reason").rfind("limit", 0) == 0;
    });
    register_predicate("w8_engaged_correct", [](const FrameView& v, const std::string&) {
        const json* a = walk(v.ch("W8"), {"engaged"});
        const json* b = walk(v.ch("W6"), {"engaged"});
        return a && b && *a == *b;
    });
}

void install_datalink() {
    register_predicate("lead_deviates", [](const FrameView& v, const std::string& a) {
        const json* l = lead_side(v);
        return payload_flag(l, "sent") && list_has(walk(l, {"deviating"}), a);
    });
    register_predicate("lead_flags", [](const FrameView& v, const std::string& a) {
        const json* l = lead_side(v);
        return payload_flag(l, "invalid") && list_has(walk(l, {"details"}), a);
    });
    register_predicate("lead_missing", [](const FrameView& v, const std::string& a) {
        const json* l = lead_side(v);
        return payload_flag(l, "sent") && list_has(walk(l, {"missing"}), a);
    });
    register_predicate("lead_flag_truthful", [](const FrameView& v, const std::string&) {
        const json* l = lead_side(v);
        const json* dev = walk(l, {"deviating"});
        const bool any = (dev && dev->is_array() && !dev->empty()) || list_has(walk(l, {"missing"}), "timestamp");
        return payload_flag(l, "invalid") == any;
    });
    register_predicate("lead_consistent", [](const FrameView& v, const std::string&) {
        const json* dev = walk(lead_side(v), {"deviating"});
        return !dev || !dev->is_array() || dev->empty();
    });
    register_predicate("report_missing", [](const FrameView& v, const std::string& a) {
        const json* w = wing_side(v);
        return payload_flag(w, "received") && list_has(walk(w, {"report_missing"}), a);
    });
    register_predicate("estimated_or_contingency", [](const FrameView& v, const std::string& a) {
        const json* w = wing_side(v);
        if (payload_flag(w, "lead_unknown")) return true;
        return payload_flag(w, "accepted") && list_has(walk(w, {"estimated"}), a);
    });
    register_predicate("delay_tolerable", [](const FrameView& v, const std::string& a) {
        const json* w = wing_side(v);
        const json* d = walk(w, {"delay"});
        const double tol = a.empty() ? 10.0 : std::stod(a);
        return payload_flag(w, "received") && d && d->is_number() && d->get<double>() > 0.0 && d->get<double>() <= tol;
    });
    register_predicate("accepted_degraded", [](const FrameView& v, const std::string&) {
        const json* w = wing_side(v);
        return payload_flag(w, "accepted") && payload_flag(w, "degraded");
    });
    register_predicate("rejoin_missing_in_test", [](const FrameView& v, const std::string&) {
        const json* w = wing_side(v);
        return payload_flag(w, "received") && payload_flag(w, "test_point_active") && !payload_flag(w, "rejoin_received");
    });
    register_predicate("test_point_matches", [](const FrameView& v, const std::string&) {
        const std::string sched = payload_str(lead_side(v), "scheduled_test_point");
        return sched.empty() || !v.ch("W1") || payload_str(v.ch("W1"), "test_point") == sched;
    });
    register_predicate("test_point_known", [](const FrameView& v, const std::string&) {
        const std::string sched = payload_str(lead_side(v), "scheduled_test_point");
        return sched.empty() || !v.ch("W1") || !payload_str(v.ch("W1"), "test_point").empty();
    });
    register_predicate("voice_in_window", [](const FrameView& v, const std::string&) {
        const json* acted = walk(wing_side(v), {"voice_acted"});
        if (!acted || !acted->is_array()) return true;
        for (const auto& m : *acted) {
            const auto lo = m.at("window_start").get<std::int64_t>();
            const auto hi = m.at("window_end").get<std::int64_t>();
            if (v.frame < lo || v.frame > hi) return false;
        }
        return true;
    });
}

}  // namespace

void install_builtin_predicates() {
    install_generic();
    install_hazards();
    install_cs_rta();
    install_pilot_epm();
    install_datalink();
}

}  // namespace mumt::monitors
