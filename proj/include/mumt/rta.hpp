#pragma once

// Run-time assurance filter (signal W2): monitors the primary command,
// predicts hard-constraint violations over a horizon and switches to a
// verified backup manoeuvre when needed.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mumt/core.hpp"
#include "mumt/plant.hpp"

namespace mumt::rta {

enum class BackupPolicy { geofence_recovery, separation_recovery, combined };
BackupPolicy policy_from_name(const std::string& n);
std::string policy_name(BackupPolicy p);

struct RtaConfig {
    double horizon = 12.0;        // s
    double prediction_dt = 0.1;   // s
    BackupPolicy backup_policy = BackupPolicy::combined;  // tried first when both constraints are at risk
    bool enabled = true;
    double frame_budget_fraction = 0.5;
    double uncertainty_base = 10.0;    // m added to d_min
    double uncertainty_per_s = 20.0;   // m per second of lead-estimate staleness
    double epm_margin = 0.95;          // fraction of EPM limits the output is clamped to
    bool epm_clamp = true;
    double fence_margin = 5.0;         // m
    double cruise_speed = 150.0;       // m/s, backup speed target
    double design_max_speed = std::numeric_limits<double>::infinity();
    double design_min_speed = 0.0;
    // Virtual compute-cost model (s); wall clock is never consulted inside a run.
    double cost_base = 1e-4;
    double cost_per_step = 2e-7;

    void validate(double dt) const;
};

/// Lead as the RTA sees it at the current frame, with an inflated keep-out radius.
struct LeadTrack {
    Vec3 position;
    Vec3 velocity;
    double extra_radius = 0.0;
};

struct Reason {
    enum class Kind { geofence, separation, epm };
    Kind kind = Kind::geofence;
    double time = 0.0;   // s until predicted violation (geofence, separation)
    std::string limit;   // epm limit name
};
std::string reason_name(Reason::Kind k);

/// Result of rolling a command (held constant) or a policy forward.
struct Assessment {
    bool clean = true;
    double first_violation = std::numeric_limits<double>::infinity();
    std::optional<Reason::Kind> kind;
    int steps = 0;
};

struct Context {
    const SafetyConstraintSet* constraints = nullptr;
    const RtaConfig* cfg = nullptr;
    const plant::PlantConfig* plant = nullptr;
};

/// Command tightened so the airframe stays within `margin` x the EPM limits.
ControlCommand epm_clamp(const ControlCommand& c, const AircraftState& own, const EnvelopeLimits& lim, double margin,
                         const plant::PlantConfig& p);
/// Name of the first EPM command limit the command exceeds, if any.
std::optional<std::string> epm_command_violation(const ControlCommand& c, const AircraftState& own,
                                                 const EnvelopeLimits& lim, double margin, const plant::PlantConfig& p);

Assessment rollout_command(const ControlCommand& c, const AircraftState& own, const std::optional<LeadTrack>& lead,
                           const Context& ctx);

struct AssureResult {
    ControlCommand output;
    bool intervened = false;
    bool candidate_within_epm = true;
    bool candidate_clean = true;  // hold-rollout of the candidate was violation-free
    std::optional<Reason> reason;
    std::string policy;  // empty on pass-through
    bool ok = true;      // false: no verified command found
    int steps = 0;
};

/// One assurance pass (pure). Used by the RTA lanes and by the pilot model.
AssureResult assure(const ControlCommand& candidate, const AircraftState& own, const std::optional<LeadTrack>& lead,
                    const Context& ctx);

// ---------------------------------------------------------------------------

struct RtaMitigations {
    bool reasonableness = true;  // check own-state inputs against history and limits
    bool use_memory = true;      // last NNCS command when W1 is absent
    bool assume_maintain = true; // maintain when no command was ever received
    bool dual_compare = true;    // compute twice and compare
    bool detect_overrun = true;
    bool alert_on_failure = true;
    bool toggle_guard = true;    // watch hard constraints while disabled
};

enum class Status { ok, failed };

struct RtaDecision {
    ControlCommand output;
    ControlCommand candidate;
    std::string candidate_source;  // primary | memory | maintain
    bool intervened = false;
    bool candidate_within_epm = true;
    bool candidate_clean = true;
    std::optional<Reason> reason;
    std::string policy;
    Status status = Status::ok;
    std::vector<std::string> alerts;  // W7
    bool enabled = true;
    bool lanes_agree = true;
    bool overrun = false;
    double compute_cost = 0.0;
    double budget = 0.0;
    bool design_range_ok = true;
    std::optional<LeadTrack> lead_used;
};

struct RtaStepInput {
    std::optional<ControlCommand> primary;
    std::optional<AircraftState> own;
    std::optional<LeadTrack> lead;
    FrameStamp stamp;
    std::optional<double> lane_b_turn_offset;      // injected lane fault
    std::optional<ControlCommand> common_mode_output;  // injected fault affecting both lanes
    double overrun_excess = 0.0;                   // s of extra virtual compute
    bool solver_fault = false;                     // backup search finds nothing
    bool enabled = true;
};

class RtaFilter {
public:
    RtaFilter(RtaConfig cfg, RtaMitigations mit, SafetyConstraintSet constraints, plant::PlantConfig plant,
              double reasonable_speed = 350.0, double reasonable_slack = 5.0);

    /// Empty when the RTA has nothing to emit (no usable command or no own state).
    std::optional<RtaDecision> step(const RtaStepInput& in);
    const std::optional<ControlCommand>& memory() const { return memory_; }

private:
    RtaConfig cfg_;
    RtaMitigations mit_;
    SafetyConstraintSet constraints_;
    plant::PlantConfig plant_;
    double reasonable_speed_;
    double reasonable_slack_;
    std::optional<ControlCommand> memory_;
    std::optional<AircraftState> last_good_own_;
    bool was_enabled_ = true;
};

}  // namespace mumt::rta
