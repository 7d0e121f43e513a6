// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// MUMT_FUZZ_RUNS and MUMT_ORACLE_REPORTS shrink criteria 2 and 8 for quick
// local iterations; the defaults are the acceptance sizes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "mumt/datalink.hpp"
#include "mumt/plant.hpp"
#include "mumt/risk.hpp"
#include "mumt/rng.hpp"
#include "mumt/selector.hpp"
#include "mumt/sim.hpp"

using namespace mumt;

namespace {

// Pinned tolerances.
constexpr double kRadiusTolerance = 0.005;  // relative, criterion 6
constexpr int kFuzzRuns = 1000;
constexpr std::int64_t kFuzzFrames = 1000;
constexpr double kFuzzBudgetSeconds = 600.0;
constexpr int kOracleReports = 10000;
constexpr std::size_t kMinPairedScenarios = 30;

const std::filesystem::path kData = MUMT_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int env_int(const char* name, int fallback) {
    const char* v = std::getenv(name);
    return v ? std::atoi(v) : fallback;
}

const monitors::Catalog& catalog() {
    static const auto c = monitors::Catalog::load(monitors::default_catalog_path());
    return c;
}

std::size_t count_violations(const sim::RunResult& r, const std::string& id) {
    const auto* v = r.verdict(id);
    return v ? v->violations.size() : 0;
}

// One record per channel per frame, counted straight from the trace.
bool complete(const monitors::Trace& t, std::int64_t frames) {
    std::map<std::pair<std::int64_t, std::string>, int> n;
    for (const auto& r : t.records) ++n[{r.frame.frame_index, r.channel}];
    for (std::int64_t k = 0; k < frames; ++k)
        for (const auto& ch : monitors::channel_ids())
            if (n[{k, ch}] != 1) return false;
    return n.size() == static_cast<std::size_t>(frames) * monitors::channel_ids().size();
}

// ---- 1

Outcome uca_coverage() {
    const auto results = sim::suite(kData / "scenarios" / "uca", catalog(), sim::default_workers(),
                                    sim::toggleable_mitigations());
    std::set<std::string> covered;
    std::size_t mitigated = 0;
    std::string bad;
    for (const auto& r : results) {
        covered.insert(r.mitigation);
        if (r.status == "mitigated") ++mitigated;
        else bad += " " + r.scenario + "(" + r.status + ")";
    }
    std::string uncovered;
    for (const auto& e : catalog().entries)
        if (e.enforcement == monitors::Enforcement::monitored && e.id.rfind("RL", 0) == 0 &&
            !sim::construction_enforced().count(e.id) && !covered.count(e.id))
            uncovered += " " + e.id;
    Outcome o;
    o.pass = results.size() >= kMinPairedScenarios && mitigated == results.size() && uncovered.empty();
    o.detail = std::to_string(mitigated) + "/" + std::to_string(results.size()) + " mitigated";
    if (!bad.empty()) o.detail += "; failing:" + bad;
    if (!uncovered.empty()) o.detail += "; rows without a scenario:" + uncovered;
    return o;
}

// ---- 2

constexpr double kMinTimeToBoundary = 4.0;  // s at the initial closure rate

// Initial states are drawn until the pair is at least kMinTimeToBoundary away
// from d_min at its current closure rate. Closer states are not recoverable
// by any command inside the turn and climb limits.
sim::Scenario fuzz_scenario(int i, int* rejected = nullptr) {
    RngStream rng(20240, "fuzz-" + std::to_string(i));
    static const char* behaviours[] = {"random", "ram", "fence", "weave"};
    const double d_min = 152.4;

    Vec3 lead, wing;
    double lead_heading = 0, lead_speed = 0, wing_heading = 0, wing_speed = 0;
    for (;;) {
        // Lead somewhere in the fence; wingman around it, outside 2 d_min.
        lead = {rng.uniform(-2000, 40000), rng.uniform(-7000, 7000), -rng.uniform(2000, 7500)};
        const double range = rng.uniform(2.0 * d_min, 3000.0);
        const double bearing = rng.uniform(-kPi, kPi);
        wing = {lead.north + range * std::cos(bearing), lead.east + range * std::sin(bearing),
                lead.down + rng.uniform(-300, 300)};
        lead_heading = rng.uniform(-kPi, kPi);
        lead_speed = rng.uniform(120, 200);
        wing_heading = rng.uniform(-kPi, kPi);
        wing_speed = rng.uniform(120, 250);

        const Vec3 rel = wing - lead;
        const Vec3 vrel{wing_speed * std::cos(wing_heading) - lead_speed * std::cos(lead_heading),
                        wing_speed * std::sin(wing_heading) - lead_speed * std::sin(lead_heading), 0.0};
        const double closure = -(rel.north * vrel.north + rel.east * vrel.east) / rel.norm();
        if (closure <= 0.0 || (rel.norm() - d_min) / closure >= kMinTimeToBoundary) break;
        if (rejected) ++*rejected;
    }

    json doc = {{"id", "fuzz-" + std::to_string(i)},
                {"seed", rng.next_u64() >> 12},
                {"duration_frames", kFuzzFrames},
                {"lead", {{"position", {lead.north, lead.east, lead.down}},
                          {"heading", lead_heading},
                          {"airspeed", lead_speed}}},
                {"wingman", {{"position", {wing.north, wing.east, wing.down}},
                             {"heading", wing_heading},
                             {"airspeed", wing_speed}}},
                {"controller", {{"behavior", behaviours[rng.next_u64() % 4]}}},
                {"mitigations", "all"}};
    return sim::parse_scenario(doc, kData / "scenarios");
}

Outcome fuzz_soundness() {
    const int runs = env_int("MUMT_FUZZ_RUNS", kFuzzRuns);
    monitors::Catalog hard;
    for (const auto& e : catalog().entries)
        if (e.id == "H1" || e.id == "H3") hard.entries.push_back(e);

    const auto t0 = std::chrono::steady_clock::now();
    std::size_t h1 = 0, h3 = 0, interventions = 0;
    double closest = 1e18;
    std::string first_bad;
    int rejected = 0;
    for (int i = 0; i < runs; ++i) {
        const auto s = fuzz_scenario(i, &rejected);
        sim::RunOptions opt;
        opt.catalog = &hard;
        const auto r = sim::run(s, opt);
        const auto a = count_violations(r, "H1"), b = count_violations(r, "H3");
        h1 += a;
        h3 += b;
        interventions += static_cast<std::size_t>(r.summary.interventions);
        if ((a || b) && first_bad.empty()) first_bad = s.id;
        for (const auto& rec : r.trace.records)
            if (rec.channel == "TRUTH")
                closest = std::min(closest, distance(rec.payload["lead"]["position"].get<Vec3>(),
                                                     rec.payload["wing"]["position"].get<Vec3>()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Outcome o;
    o.pass = h1 == 0 && h3 == 0 && secs < kFuzzBudgetSeconds;
    std::ostringstream d;
    d << runs << " runs, H1=" << h1 << " H3=" << h3 << ", " << interventions << " interventions, closest approach "
      << static_cast<int>(closest) << " m, " << static_cast<int>(secs)
      << " s";
    d << ", " << rejected << " unrecoverable draws resampled";
    if (!first_bad.empty()) d << ", first failing " << first_bad;
    o.detail = d.str();
    return o;
}

// ---- 3

struct AuditCounts {
    std::size_t pass_through = 0, intervened = 0, mismatches = 0;
    std::size_t hard = 0;  // separation or geofence reasons
};

// Replays every RTA decision from its recorded inputs.
AuditCounts audit(const sim::Scenario& s, const sim::RunResult& r) {
    plant::PlantConfig pc = s.plant;
    pc.dt = s.dt;
    rta::RtaConfig rc = s.rta;
    rc.epm_clamp = true;
    AuditCounts c;
    for (const auto& rec : r.trace.records) {
        if (rec.channel != "W2" || !rec.payload.value("produced", false) || !rec.payload.value("enabled", false)) continue;
        const auto& p = rec.payload;
        const auto cmd = p.at("cmd").get<ControlCommand>();
        const auto cand = p.at("candidate").get<ControlCommand>();
        const bool intervened = p.at("intervened").get<bool>();
        const bool predicted = !p.at("candidate_clean").get<bool>();
        bool ok = intervened == predicted;
        if (!intervened) {
            ++c.pass_through;
            ok = ok && cmd == cand;
        } else {
            ++c.intervened;
            if (p["reason"] == "separation" || p["reason"] == "geofence") ++c.hard;
        }
        SafetyConstraintSet cons = s.constraints;
        cons.separation.d_min = p.at("d_min_used").get<double>();
        std::optional<rta::LeadTrack> lead;
        if (p.contains("lead_used"))
            lead = rta::LeadTrack{p["lead_used"].at("position").get<Vec3>(), p["lead_used"].at("velocity").get<Vec3>(),
                                  p["lead_used"].at("extra_radius").get<double>()};
        const auto replay = rta::assure(cand, p.at("own").get<AircraftState>(), lead, {&cons, &rc, &pc});
        ok = ok && replay.intervened == intervened && replay.output == cmd;
        if (!ok) ++c.mismatches;
    }
    return c;
}

Outcome minimal_interference() {
    const auto s = sim::load_scenario(kData / "scenarios" / "nominal.scn");
    const auto nominal = audit(s, sim::run(s));
    // Adversarial runs exercise the intervened branch of the audit as well.
    AuditCounts adversarial;
    for (int i = 0; i < 8; ++i) {
        const auto f = fuzz_scenario(i);
        const auto a = audit(f, sim::run(f));
        adversarial.pass_through += a.pass_through;
        adversarial.intervened += a.intervened;
        adversarial.mismatches += a.mismatches;
        adversarial.hard += a.hard;
    }
    Outcome o;
    o.pass = nominal.mismatches == 0 && adversarial.mismatches == 0 && nominal.pass_through > 0 &&
             adversarial.hard > 0;
    o.detail = "nominal " + std::to_string(nominal.pass_through) + " pass-through / " +
               std::to_string(nominal.intervened) + " intervened, adversarial " +
               std::to_string(adversarial.pass_through) + " / " + std::to_string(adversarial.intervened) +
               " (" + std::to_string(adversarial.hard) + " separation/geofence), mismatches " + std::to_string(nominal.mismatches + adversarial.mismatches);
    return o;
}

// ---- 4 and 9 (completeness half)

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(bool& all_complete) {
    const auto dir = std::filesystem::temp_directory_path() / "mumt_acceptance";
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files = {kData / "scenarios" / "nominal.scn", kData / "scenarios" / "w3_fault.scn",
                                                kData / "scenarios" / "recorder_fault.scn",
                                                kData / "scenarios" / "uca" / "uca_1_5_12.scn",
                                                kData / "scenarios" / "uca" / "uca_w2_15.scn"};
    std::size_t identical = 0;
    all_complete = true;
    for (const auto& f : files) {
        const auto s = sim::load_scenario(f);
        std::set<std::string> hashes;
        for (int rep = 0; rep < 3; ++rep) {
            const auto r = sim::run(s);
            const auto out = dir / (s.id + "." + std::to_string(rep) + ".trace");
            sim::write_trace(r.trace, out);
            hashes.insert(sim::hash_hex(file_bytes(out)));
            if (rep == 0 && s.id != "recorder_fault") all_complete = all_complete && complete(r.trace, s.duration_frames);
        }
        if (hashes.size() == 1) ++identical;
    }
    std::filesystem::remove_all(dir);
    return {identical == files.size(),
            std::to_string(identical) + "/" + std::to_string(files.size()) + " scenarios byte-identical over 3 runs"};
}

// ---- 5

Outcome selector_table() {
    using namespace selector;
    const FrameStamp k = FrameStamp::at(7, 0.02);
    const ControlCommand autonomy{0.1, 0, 0, k}, pilot{-0.2, 0, 0, k};
    int agree = 0;
    for (int bits = 0; bits < 16; ++bits) {
        const bool epm_switch = bits & 1, takeover = bits & 2, fault = bits & 4, present = bits & 8;
        SelectorState st;
        st.faulted = fault;
        const auto out =
            select(present ? std::optional<AutonomySignal>(AutonomySignal{autonomy}) : std::nullopt, pilot,
                   epm_switch ? epm::SwitchCommand::to_pilot : epm::SwitchCommand::none, takeover, st, {}, k);
        const bool pilot_expected = epm_switch || takeover || fault || !present;
        const bool ok = (out.state.source == Source::pilot) == pilot_expected &&
                        out.command.same_values(pilot_expected ? pilot : autonomy);
        agree += ok;
    }
    return {agree == 16, std::to_string(agree) + "/16 cases"};
}

// ---- 6

Outcome turn_radius() {
    plant::PlantConfig pc;
    pc.dt = 0.02;
    const double v = 150.0, w = 0.1;
    auto s = plant::make_state({0, 0, -3000}, 0.0, v, 0.0, 1000.0, {}, pc, FrameStamp::at(0, pc.dt));
    const ControlCommand c{w, 0.0, 0.0, {}};
    const double r0 = v / w;
    // Heading north turning right: centre lies due east.
    const Vec3 centre{0.0, r0, -3000.0};
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
        s = plant::plant_step(s, c, {}, pc);
        const double r = std::hypot(s.position.north - centre.north, s.position.east - centre.east);
        worst = std::max(worst, std::abs(r - r0) / r0);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max relative radius error %.2e over 10 s (limit %.3f)", worst, kRadiusTolerance);
    return {worst <= kRadiusTolerance, buf};
}

// ---- 7

Outcome risk_tables() {
    using namespace risk;
    int ok = 0, total = 0;
    auto expect = [&](bool b) {
        ++total;
        ok += b;
    };
    auto sev = [](auto set) {
        SeverityAssessment a;
        set(a);
        return severity_level(a);
    };
    expect(sev([](auto& a) { a.monetary_loss = 10e6; }) == 1);
    expect(sev([](auto& a) { a.death_or_total_disability = true; }) == 1);
    expect(sev([](auto& a) { a.environmental = Environmental::irreversible_significant; }) == 1);
    expect(sev([](auto& a) { a.monetary_loss = 1e6; }) == 2);
    expect(sev([](auto& a) { a.hospitalization_3plus = true; }) == 2);
    expect(sev([](auto& a) { a.environmental = Environmental::reversible_significant; }) == 2);
    expect(sev([](auto& a) { a.monetary_loss = 100e3; }) == 3);
    expect(sev([](auto& a) { a.lost_workday = true; }) == 3);
    expect(sev([](auto& a) { a.environmental = Environmental::reversible_moderate; }) == 3);
    expect(sev([](auto& a) { a.monetary_loss = 99e3; }) == 4);
    expect(sev([](auto&) {}) == 4);

    const std::pair<double, int> bands[] = {{0.9, 5}, {0.7, 4}, {0.5, 3}, {0.3, 2}, {0.1, 1}, {0.8, 4}, {0.2, 1}};
    for (const auto& [p, lvl] : bands) expect(nasa_probability_level(p).level == lvl);

    for (char l = 'A'; l <= 'F'; ++l) expect(mil_probability_level(l) == l);
    expect(mil_probability_description('F').find("incapable of occurrence") != std::string::npos);
    bool rejects = false;
    try {
        mil_probability_level('G');
    } catch (const ConfigError&) {
        rejects = true;
    }
    expect(rejects);
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " table checks"};
}

// ---- 8

// Independent verdict for fully populated, in-range reports: walk the lead
// forward one frame at a time at the speed bound and see whether it can
// reach the reported position.
datalink::Verdict brute_force_verdict(const datalink::PositionReport& r, const datalink::PositionReport* prev,
                                      const datalink::ReasonablenessBounds& b, std::int64_t now) {
    using datalink::Verdict;
    if (!r.report_timestamp) return Verdict::invalid;
    if (r.invalid) return Verdict::invalid;
    const auto& s = r.lead_state;
    const double speed2 = s.velocity.north * s.velocity.north + s.velocity.east * s.velocity.east +
                          s.velocity.down * s.velocity.down;
    const double accel2 = s.acceleration.north * s.acceleration.north + s.acceleration.east * s.acceleration.east +
                          s.acceleration.down * s.acceleration.down;
    if (speed2 > b.v_max * b.v_max) return Verdict::unreasonable;
    if (accel2 > b.a_max * b.a_max) return Verdict::unreasonable;
    const auto k = r.report_timestamp->frame_index;
    if (now - k > b.stale_frames) return Verdict::unreasonable;
    if (prev) {
        const auto kp = prev->report_timestamp->frame_index;
        if (k <= kp) return Verdict::unreasonable;
        Vec3 p = prev->lead_state.position;
        const Vec3 target = s.position;
        for (auto f = kp; f < k; ++f) {
            const double step = b.v_max * b.dt;
            const double gap = distance(p, target);
            p = gap <= step ? target : p + (target - p) * (step / gap);
        }
        if (distance(p, target) > b.slack) return Verdict::unreasonable;
    }
    return Verdict::valid;
}

Outcome validator_oracle() {
    const int n = env_int("MUMT_ORACLE_REPORTS", kOracleReports);
    RngStream rng(8, "validator-oracle");
    plant::PlantConfig pc;
    datalink::ReasonablenessBounds b;
    int agree = 0;
    std::map<datalink::Verdict, int> seen;
    for (int i = 0; i < n; ++i) {
        const std::int64_t kp = 100 + static_cast<std::int64_t>(rng.next_u64() % 50);
        const Vec3 p0{rng.uniform(-5000, 5000), rng.uniform(-5000, 5000), -rng.uniform(1000, 8000)};
        datalink::PositionReport prev;
        prev.lead_state = plant::make_state(p0, 0.0, 150.0, 0.0, 1000.0, {}, pc, FrameStamp::at(kp, b.dt));
        prev.report_timestamp = FrameStamp::at(kp, b.dt);

        const std::int64_t gap = static_cast<std::int64_t>(rng.next_u64() % 6) - 1;  // -1 .. 4
        const std::int64_t k = kp + gap;
        const double reach = b.v_max * static_cast<double>(std::max<std::int64_t>(gap, 1)) * b.dt + b.slack;
        const double jump = rng.uniform(0.0, 1.6) * reach;
        const double az = rng.uniform(-kPi, kPi), el = rng.uniform(-0.5, 0.5);
        const Vec3 p1 = p0 + Vec3{jump * std::cos(el) * std::cos(az), jump * std::cos(el) * std::sin(az), jump * std::sin(el)};

        datalink::PositionReport r;
        r.lead_state = plant::make_state(p1, az, 150.0, 0.0, 1000.0, {}, pc, FrameStamp::at(k, b.dt));
        r.lead_state.velocity = Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.3, 0.3)} *
                                rng.uniform(0.0, 1.4 * b.v_max / std::sqrt(2.09));
        r.lead_state.acceleration =
            Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)} * rng.uniform(0.0, 1.3 * b.a_max / std::sqrt(3.0));
        if (!rng.bernoulli(0.05)) r.report_timestamp = FrameStamp::at(k, b.dt);
        else r.drop(datalink::Field::timestamp);
        if (rng.bernoulli(0.05)) r.add_invalid("position", "sender check");
        const std::int64_t now = k + static_cast<std::int64_t>(rng.next_u64() % 32);

        const bool with_history = rng.bernoulli(0.9);
        std::vector<datalink::PositionReport> history;
        if (with_history) history.push_back(prev);
        const auto got = datalink::validate_report(r, history, b, now).verdict;
        const auto want = brute_force_verdict(r, with_history ? &prev : nullptr, b, now);
        agree += got == want;
        ++seen[want];
    }
    std::ostringstream d;
    d << agree << "/" << n << " verdicts agree (valid " << seen[datalink::Verdict::valid] << ", invalid "
      << seen[datalink::Verdict::invalid] << ", unreasonable " << seen[datalink::Verdict::unreasonable] << ")";
    return {agree == n, d.str()};
}

// ---- 9

Outcome recorder(bool traces_complete) {
    sim::RunOptions opt;
    opt.catalog = &catalog();
    const auto s = sim::load_scenario(kData / "scenarios" / "recorder_fault.scn");
    const auto r = sim::run(s, opt);
    std::int64_t fault_from = -1;
    for (const auto& f : s.faults)
        if (f.kind == sim::FaultSpec::Kind::recorder_fault) fault_from = f.from;
    bool same_frame = false;
    for (const auto& rec : r.trace.records)
        if (rec.channel == "REC" && rec.frame.frame_index == fault_from && rec.payload.value("alert", false))
            same_frame = true;
    const auto h5 = count_violations(r, "H5");
    Outcome o;
    o.pass = traces_complete && same_frame && h5 > 0;
    o.detail = std::string("clean traces complete: ") + (traces_complete ? "yes" : "no") +
               ", same-frame alert: " + (same_frame ? "yes" : "no") + ", H5 violations " + std::to_string(h5);
    return o;
}

// ---- 10

Outcome traceability() {
    std::vector<std::string> ids;
    for (int i = 1; i <= 42; ++i) ids.push_back("RL1.5." + std::to_string(i));
    for (const auto& [w, n] : std::vector<std::pair<int, int>>{{1, 5}, {2, 16}, {3, 9}, {4, 3}, {5, 5}, {6, 4}, {8, 2}})
        for (int i = 1; i <= n; ++i) ids.push_back("RL2.W" + std::to_string(w) + "." + std::to_string(i));
    const auto report = monitors::traceability_report(catalog());
    std::map<std::string, std::string> cls;
    std::istringstream lines(report);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream ws(line);
        std::string id, c;
        ws >> id >> c;
        cls[id] = c;
    }
    int classified = 0;
    for (const auto& id : ids) {
        const auto it = cls.find(id);
        classified += it != cls.end() &&
                      (it->second == "monitored" || it->second == "design-time" || it->second == "out-of-scope");
    }
    return {classified == static_cast<int>(ids.size()),
            std::to_string(classified) + "/" + std::to_string(ids.size()) + " ids classified, " +
                std::to_string(ids.size() - classified) + " unclassified"};
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int n, const char* name, const Outcome& o) {
        std::printf("[%s] %2d %-22s %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    };
    auto guarded = [&](auto fn) -> Outcome {
        try {
            return fn();
        } catch (const std::exception& e) {
            return {false, std::string("exception: ") + e.what()};
        }
    };
    bool complete_traces = false;
    report(1, "uca-coverage", guarded(uca_coverage));
    report(2, "fuzz-soundness", guarded(fuzz_soundness));
    report(3, "minimal-interference", guarded(minimal_interference));
    report(4, "determinism", guarded([&] { return determinism(complete_traces); }));
    report(5, "selector-table", guarded(selector_table));
    report(6, "turn-radius", guarded(turn_radius));
    report(7, "risk-tables", guarded(risk_tables));
    report(8, "validator-oracle", guarded(validator_oracle));
    report(9, "recorder", guarded([&] { return recorder(complete_traces); }));
    report(10, "traceability", guarded(traceability));
    std::printf("%d/10 criteria passed\n", 10 - failed);
    return failed ? 1 : 0;
}
