#pragma once

// Frame scheduler, scenario engine and fault injector.
//
// Per frame, in fixed order: lead step, lead report build/encode, channel
// transmit, wingman sense, validate, primary controller, RTA, EPM, pilot,
// control selector, wingman step, record every channel.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mumt/controllers.hpp"
#include "mumt/core.hpp"
#include "mumt/datalink.hpp"
#include "mumt/epm.hpp"
#include "mumt/monitors.hpp"
#include "mumt/pilot.hpp"
#include "mumt/plant.hpp"
#include "mumt/rta.hpp"
#include "mumt/serialize.hpp"

namespace mumt::sim {

struct FaultSpec {
    enum class Kind {
        signal_dropout,     // target: L1.5 | W1 | W2 | W3 | W4 | W5 | W8 | voice
        field_corruption,   // target: L1.5 (field, value) | W2 | W3 (turn delta) | W8 (engaged flip) | test_point_id (text)
        field_missing,      // target L1.5, field: datalink field name or "rejoin"
        stale_timestamp,    // target L1.5, value: lag frames
        clock_skew,         // target: lead | nncs | rta | cs | airframe, value: offset frames
        component_fault,    // target: nncs | rta | rta_lane_b | cs | epm | lead_flag
        pilot_incapacitation,
        pilot_distraction,
        pilot_impairment,
        sensor_bias,        // wingman own-state sensor, field + value
        sensor_noise,       // wingman own-state sensor, field + value (std)
        lead_sensor,        // lead instrument error, field + value
        async_sampling,     // lead report field group sampled value frames late
        frame_overrun,      // target rta, value: excess seconds
        recorder_fault,     // target channel, total
        rta_toggle,         // value 0 = off, 1 = on, at `from`
    };
    Kind kind = Kind::signal_dropout;
    std::string target;
    std::string field;
    double value = 0.0;
    std::string text;
    std::optional<ControlCommand> output;
    std::int64_t from = 0;
    std::int64_t to = 0;  // inclusive
    bool total = false;

    bool active(std::int64_t k) const { return k >= from && k <= to; }
};

std::string fault_kind_name(FaultSpec::Kind k);
FaultSpec::Kind fault_kind_from_name(const std::string& n);

struct TestCardAction {
    std::int64_t frame = 0;
    std::string action;  // takeover | rta_off | rta_on | rejoin_point | test_point | maneuver | voice | expect_voice
    json params = json::object();
};

struct LeadSetup {
    Vec3 position{0.0, 0.0, -3000.0};
    double heading = 0.0;
    double airspeed = 150.0;
    double fuel = 2000.0;
    plant::LeadScript script;
};

struct WingSetup {
    Vec3 position{-150.0, 300.0, -3000.0};
    double heading = 0.0;
    double airspeed = 150.0;
    double fuel = 2000.0;
};

struct ValidationSetup {
    datalink::ReasonablenessBounds bounds;
    int lead_unknown_frames = 25;
    double field_tolerance = 0.5;        // linear fields
    double angle_tolerance = 0.005;      // rad, rad/s
    double rejoin_factor = 1.5;          // commanded rejoin must be >= factor * d_min from the lead
};

struct Scenario {
    std::string id;
    std::string description;
    std::uint64_t seed = 1;
    std::int64_t duration_frames = 1500;
    double dt = 0.02;
    LeadSetup lead;
    WingSetup wing;
    Vec3 wind;
    SafetyConstraintSet constraints;
    plant::PlantConfig plant;
    std::string controller_name = "scripted_rejoin";
    controllers::ControllerConfig controller;
    controllers::RejoinGoal goal;
    rta::RtaConfig rta;
    double off_design_max_speed = 200.0;  // design range when RL2.W2.1 is disabled
    double off_epm_margin = 0.9999;       // RTA clamp margin when RL2.W6.1 is disabled
    epm::EpmConfig epm;
    pilot::PilotConfig pilot;
    datalink::ChannelConfig channel;
    ValidationSetup validation;
    std::optional<double> operator_d_min;
    std::vector<FaultSpec> faults;
    std::vector<TestCardAction> test_card;
    std::set<std::string> mitigations;  // enabled requirement ids
    std::string mitigation;             // id toggled by paired runs
    std::string target;                 // monitor expected to fire when `mitigation` is off
    std::vector<std::string> expected;
    json resolved = json::object();     // merged scenario document

    void validate(const monitors::Catalog* catalog = nullptr) const;
};

/// Every requirement id whose enforcement the simulator can switch off.
const std::set<std::string>& toggleable_mitigations();
/// Ids enforced by construction (single shared command type).
const std::set<std::string>& construction_enforced();

/// Parses a scenario document; "extends" paths resolve against `base_dir`.
Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);
/// "all", "none" or a comma-separated id list.
std::set<std::string> parse_mitigation_list(const std::string& s);

struct Summary {
    std::int64_t frames = 0;
    std::int64_t interventions = 0;
    std::int64_t pilot_frames = 0;
    std::string final_source;
    std::size_t hazard_violations = 0;       // monitors with >= 1 violation
    std::size_t requirement_violations = 0;
    std::string config_hash;
    std::string trace_hash;
};

struct RunResult {
    monitors::Trace trace;
    std::vector<monitors::MonitorVerdict> verdicts;
    Summary summary;

    const monitors::MonitorVerdict* verdict(const std::string& id) const;
};

struct RunOptions {
    std::optional<std::set<std::string>> mitigations;  // overrides the scenario's set
    std::optional<std::uint64_t> seed;
    const monitors::Catalog* catalog = nullptr;       // evaluate when set
};

RunResult run(const Scenario& s, const RunOptions& opt = {});

std::string hash_hex(const std::string& bytes);
std::string trace_text(const monitors::Trace& t);
void write_trace(const monitors::Trace& t, const std::filesystem::path& path);

struct PairedResult {
    std::string scenario;
    std::string mitigation;
    std::string target;
    std::string status;  // mitigated | not-mitigated | enforced-by-construction | not-toggleable
    std::size_t off_target_violations = 0;
    std::size_t on_target_violations = 0;
    std::size_t on_hazard_violations = 0;
    std::size_t off_hazard_violations = 0;
    std::vector<monitors::MonitorVerdict> off_verdicts;
    std::vector<monitors::MonitorVerdict> on_verdicts;
};

PairedResult run_paired(const Scenario& s, const std::string& mitigation_id, const monitors::Catalog& catalog);

/// Paired runs for every *.scn in `dir`, using `workers` threads; sorted by scenario id.
/// `base` replaces each scenario's own mitigation set for the on-runs.
std::vector<PairedResult> suite(const std::filesystem::path& dir, const monitors::Catalog& catalog, unsigned workers,
                                const std::optional<std::set<std::string>>& base = std::nullopt);
/// Worker count from MUMT_WORKERS, else hardware concurrency.
unsigned default_workers();

}  // namespace mumt::sim
