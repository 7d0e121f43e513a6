#include "mumt/epm.hpp"

namespace mumt::epm {

EpmOutput epm_step(const AircraftState& state, const EpmConfig& cfg, bool pilot_switch_request, const EpmState& s) {
    EpmOutput out;
    out.state = s;
    if (state_invariant_violation(state)) out.state.faulted = true;

    out.status.violations = cfg.limits.violations(state);
    out.state.hysteresis_counter = out.status.violations.empty() ? 0 : s.hysteresis_counter + 1;

    if (out.state.faulted) {
        if (cfg.fail_safe_on_fault) {
            out.command = SwitchCommand::to_pilot;
            out.status.reason = "fault";
        }
    } else if (pilot_switch_request) {
        out.command = SwitchCommand::to_pilot;
        out.status.reason = "pilot_request";
    } else if (out.state.hysteresis_counter >= std::max(1, cfg.hysteresis_frames)) {
        out.command = SwitchCommand::to_pilot;
        out.status.reason = "limit:" + out.status.violations.front();
    }
    if (out.command == SwitchCommand::to_pilot) out.state.engaged = false;
    out.status.engaged = out.state.engaged;
    out.status.faulted = out.state.faulted && cfg.report_faults;
    return out;
}

}  // namespace mumt::epm
