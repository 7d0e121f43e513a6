#include "mumt/selector.hpp"

namespace mumt::selector {

std::string source_name(Source s) { return s == Source::autonomy ? "autonomy" : "pilot"; }

SelectOutput select(const std::optional<AutonomySignal>& rta_cmd, const std::optional<ControlCommand>& pilot_cmd,
                    epm::SwitchCommand epm_switch, bool pilot_takeover, const SelectorState& s,
                    const SelectorConfig& cfg, FrameStamp stamp) {
    SelectOutput out;
    out.state = s;
    auto& st = out.state;

    if (st.faulted && !cfg.pilot_on_fault) {
        // A faulted selector without the default switch is stuck on its last output.
        out.command = st.last_output.value_or(ControlCommand::maintain(stamp));
        out.command.stamp = stamp;
        return out;
    }

    st.frames_since_autonomy_signal = rta_cmd ? 0 : st.frames_since_autonomy_signal + 1;
    if (!rta_cmd && cfg.alert_on_missing) out.alerts.emplace_back("no_rta_signal");

    auto to_pilot = [&](const char* why) {
        if (st.source == Source::autonomy) st.switch_reason = why;
        st.source = Source::pilot;
    };
    if (st.faulted) to_pilot("cs_fault");
    if (cfg.honor_epm && epm_switch == epm::SwitchCommand::to_pilot) to_pilot("epm_switch");
    if (pilot_takeover) to_pilot("pilot_takeover");
    if (rta_cmd && rta_cmd->failed) to_pilot("rta_failed");
    if (!rta_cmd && cfg.pilot_on_missing) to_pilot("no_rta_signal");

    if (st.source == Source::autonomy) {
        if (rta_cmd) out.command = rta_cmd->output;
        else out.command = st.last_output.value_or(ControlCommand::maintain(stamp));
    } else if (pilot_cmd) {
        out.command = *pilot_cmd;
    } else {
        out.command = ControlCommand::maintain(stamp);
        out.alerts.emplace_back("no_command_source");
    }
    out.command.stamp = stamp;
    st.last_output = out.command;
    return out;
}

SelectorState reengage(const SelectorState& s) {
    SelectorState r = s;
    if (!r.faulted) {
        r.source = Source::autonomy;
        r.switch_reason.clear();
    }
    return r;
}

}  // namespace mumt::selector
