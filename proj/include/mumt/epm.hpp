#pragma once

// Envelope protection monitor (signals W6, W8, W9).

#include <optional>
#include <string>
#include <vector>

#include "mumt/core.hpp"

namespace mumt::epm {

enum class SwitchCommand { none, to_pilot };

struct EpmState {
    bool engaged = true;  // autonomy path allowed
    bool faulted = false;
    int hysteresis_counter = 0;
};

struct EpmConfig {
    EnvelopeLimits limits;
    int hysteresis_frames = 3;
    bool fail_safe_on_fault = true;  // faulted -> to_pilot
    bool report_faults = true;       // fault visible in the status report
};

struct EpmStatusReport {
    bool engaged = true;
    bool faulted = false;
    std::string reason;  // empty, "limit:<name>", "pilot_request", "fault"
    std::vector<std::string> violations;
};

struct EpmOutput {
    SwitchCommand command = SwitchCommand::none;
    EpmStatusReport status;
    EpmState state;
};

/// One frame. `state.faulted` is set by fault injection before the call.
EpmOutput epm_step(const AircraftState& state, const EpmConfig& cfg, bool pilot_switch_request, const EpmState& s);

}  // namespace mumt::epm
