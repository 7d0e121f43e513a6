#pragma once

// Control selector (signal W3): autonomy path versus safety-pilot path.

#include <optional>
#include <string>
#include <vector>

#include "mumt/core.hpp"
#include "mumt/epm.hpp"

namespace mumt::selector {

enum class Source { autonomy, pilot };
std::string source_name(Source s);

struct SelectorState {
    Source source = Source::autonomy;
    bool faulted = false;
    int frames_since_autonomy_signal = 0;
    std::optional<ControlCommand> last_output;
    std::string switch_reason;
};

struct SelectorConfig {
    bool pilot_on_fault = true;    // faulted selector defaults to the pilot
    bool pilot_on_missing = true;  // absent autonomy signal defaults to the pilot
    bool alert_on_missing = true;  // W14 alert when no autonomy signal arrives
    bool honor_epm = true;         // act on EPM switch commands
};

struct AutonomySignal {
    ControlCommand output;
    bool failed = false;
};

struct SelectOutput {
    ControlCommand command;
    std::vector<std::string> alerts;  // W14
    SelectorState state;
};

SelectOutput select(const std::optional<AutonomySignal>& rta_cmd, const std::optional<ControlCommand>& pilot_cmd,
                    epm::SwitchCommand epm_switch, bool pilot_takeover, const SelectorState& s,
                    const SelectorConfig& cfg, FrameStamp stamp);

/// Explicit test-engineer re-engagement; the only way back to autonomy.
SelectorState reengage(const SelectorState& s);

/// The safety-dominance predicate the selector must satisfy every frame.
inline bool must_be_pilot(bool epm_switch, bool pilot_takeover, bool cs_fault, bool autonomy_present) {
    return epm_switch || pilot_takeover || cs_fault || !autonomy_present;
}

}  // namespace mumt::selector
