#pragma once

// Primary controller slot (signal W1). The shipped implementation is a
// scripted proportional rejoin controller standing in for a learned policy.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mumt/core.hpp"
#include "mumt/rng.hpp"

namespace mumt::controllers {

struct RejoinGoal {
    Vec3 rejoin_point{-150.0, 300.0, 0.0};  // lead body frame (forward, right, down)
    double capture_radius = 30.0;           // m

    void validate() const {
        if (!(capture_radius > 0.0)) throw ConfigError("rejoin capture_radius must be > 0");
    }
};

/// What the wingman currently believes about the lead.
struct LeadEstimate {
    Vec3 position;
    Vec3 velocity;
    double staleness = 0.0;  // s since the underlying report was sampled
};

struct Gains {
    double k_position = 0.08;   // 1/s, position error -> velocity correction
    double max_correction = 30.0;  // m/s
    double k_heading = 1.0;     // 1/s
    double k_speed = 0.5;       // 1/s
    double k_altitude = 0.2;    // 1/s
    double deadband = 1e-4;     // per component
};

enum class Mode { nominal, faulted };

struct PrimaryControllerStatus {
    Mode mode = Mode::nominal;
    std::optional<ControlCommand> last_output;
    bool ever_had_lead = false;
};

/// Behaviour of the stand-in. Anything but `nominal` deliberately ignores
/// safety so the RTA has something to catch.
enum class Behavior { nominal, random, ram, fence, weave };
Behavior behavior_from_name(const std::string& name);
std::string behavior_name(Behavior b);

struct ControllerConfig {
    Behavior behavior = Behavior::nominal;
    Gains gains;
    CommandEnvelope envelope;
    bool default_on_fault = true;  // false: faulted NNCS emits its fault output
    bool alert_on_fault = true;
    ControlCommand fault_output{0.6, 40.0, 12.0, {}};  // what a faulted, unmitigated NNCS emits
    double segment_s = 2.0;                              // adversarial re-draw period
};

struct StepResult {
    ControlCommand command;
    PrimaryControllerStatus status;
    std::vector<std::string> alerts;  // routed to the pilot on W13
};

/// Proportional guidance to the rejoin point of the estimated lead.
ControlCommand rejoin_guidance(const AircraftState& own, const LeadEstimate& lead, const RejoinGoal& goal,
                               const Gains& g, const CommandEnvelope& env);

/// Interface behind which a learned controller could be registered.
class PrimaryController {
public:
    virtual ~PrimaryController() = default;
    virtual StepResult step(const AircraftState& own, const std::optional<LeadEstimate>& lead,
                            const RejoinGoal& goal, const PrimaryControllerStatus& status, FrameStamp stamp) = 0;
};

class ScriptedRejoinController final : public PrimaryController {
public:
    ScriptedRejoinController(ControllerConfig cfg, std::uint64_t seed, const GeofenceConstraint& fence);
    StepResult step(const AircraftState& own, const std::optional<LeadEstimate>& lead, const RejoinGoal& goal,
                    const PrimaryControllerStatus& status, FrameStamp stamp) override;

private:
    ControlCommand adversarial(const AircraftState& own, const std::optional<LeadEstimate>& lead, FrameStamp stamp);

    ControllerConfig cfg_;
    RngStream rng_;
    GeofenceConstraint fence_;
    ControlCommand segment_cmd_;
    std::int64_t segment_end_ = -1;
    std::optional<LeadEstimate> last_lead_;
};

using ControllerFactory =
    std::function<std::unique_ptr<PrimaryController>(const ControllerConfig&, std::uint64_t, const GeofenceConstraint&)>;

/// Registry keyed by name; "scripted_rejoin" is always present.
void register_controller(const std::string& name, ControllerFactory f);
std::unique_ptr<PrimaryController> make_controller(const std::string& name, const ControllerConfig& cfg,
                                                    std::uint64_t seed, const GeofenceConstraint& fence);

}  // namespace mumt::controllers
