#pragma once

// Lead -> wingman position report (signal L1.5): binary encoding, field-level
// validation with reasonableness checks, and the lossy channel model.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mumt/core.hpp"
#include "mumt/rng.hpp"

namespace mumt::datalink {

/// Observation groups of a position report. Each can be individually absent.
enum class Field : std::uint32_t {
    position = 1u << 0,
    velocity = 1u << 1,
    acceleration = 1u << 2,
    normal_acceleration = 1u << 3,
    attitude = 1u << 4,  // roll, pitch
    heading = 1u << 5,   // yaw
    orientation_rates = 1u << 6,
    true_airspeed = 1u << 7,
    calibrated_airspeed = 1u << 8,
    wind_velocity = 1u << 9,
    fuel_remaining = 1u << 10,
    power_lever_angle = 1u << 11,
    angle_of_attack = 1u << 12,
    test_point_id = 1u << 13,
    invalid_flag = 1u << 14,
    timestamp = 1u << 15,
};

using FieldMask = std::uint32_t;
inline constexpr FieldMask kAllFields = (1u << 16) - 1;
inline constexpr FieldMask bit(Field f) { return static_cast<FieldMask>(f); }

/// The state-carrying observation groups, in canonical order.
const std::vector<Field>& state_fields();
std::string_view field_name(Field f);
std::optional<Field> field_from_name(std::string_view name);
/// AircraftState scalars belonging to a group ("position" -> position.north, ...).
std::vector<std::string> field_scalars(Field f);

struct InvalidDetail {
    std::string field;
    std::string reason;
    bool operator==(const InvalidDetail&) const = default;
};

struct PositionReport {
    AircraftState lead_state;
    std::string test_point_id;
    std::optional<Vec3> commanded_rejoin_point;  // lead body frame (forward, right, down)
    bool invalid = false;
    std::vector<InvalidDetail> invalid_details;
    std::optional<FrameStamp> report_timestamp;
    FieldMask present = kAllFields;

    bool has(Field f) const { return (present & bit(f)) != 0; }
    void drop(Field f) { present &= ~bit(f); }
    /// Sets the invalid flag consistently with the details list.
    void add_invalid(std::string field, std::string reason);
    bool satisfies_invariants() const { return invalid == !invalid_details.empty(); }
};

/// Bit-exact comparison (NaN payloads compare by representation).
bool bit_equal(const PositionReport& a, const PositionReport& b);

/// Canonical little-endian, length-prefixed encoding in field-listing order.
std::vector<std::uint8_t> encode_report(const PositionReport& r);
/// Empty on malformed input.
std::optional<PositionReport> decode_report(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Validation

struct ReasonablenessBounds {
    double dt = 0.02;
    double v_max = 350.0;     // m/s
    double a_max = 90.0;      // m/s^2
    int stale_frames = 25;
    double slack = 5.0;       // m
    FieldMask required = kAllFields;  // groups whose absence invalidates the report
    bool kinematic_checks = true;
};

enum class Verdict { valid, invalid, unreasonable };
std::string_view verdict_name(Verdict v);

struct Reason {
    std::string field;
    std::string rule_id;
    std::string detail;
    bool operator==(const Reason&) const = default;
};

struct ValidationResult {
    Verdict verdict = Verdict::valid;
    std::vector<Reason> reasons;
    bool has_rule(std::string_view rule_prefix) const;
};

/// `history` holds previously accepted reports sorted by stamp (most recent last).
ValidationResult validate_report(const PositionReport& r, std::span<const PositionReport> history,
                                 const ReasonablenessBounds& bounds, std::int64_t now_frame);

// ---------------------------------------------------------------------------
// Channel

struct Perturbation {
    std::string field;  // AircraftState scalar name
    double delta = 0.0;
};

struct ChannelConfig {
    double dropout_probability = 0.0;
    int max_delay_frames = 0;
    std::optional<Perturbation> corruption;

    void validate() const;
};

struct DeliveryOutcome {
    bool delivered = false;
    int delay_frames = 0;
    PositionReport report;  // meaningful only when delivered
};

/// Consumes exactly two draws from the stream per call, so the outcome is a
/// pure function of (report, config, stream position).
DeliveryOutcome transmit(const PositionReport& r, const ChannelConfig& ch, RngStream& rng);

/// Holds delayed deliveries until their arrival frame.
class DatalinkChannel {
public:
    void send(const DeliveryOutcome& outcome, std::int64_t frame);
    /// Reports arriving at `frame`, in send order.
    std::vector<std::pair<PositionReport, int>> receive(std::int64_t frame);
    std::size_t pending() const { return queue_.size(); }

private:
    struct InFlight {
        std::int64_t arrival;
        int delay;
        PositionReport report;
    };
    std::vector<InFlight> queue_;
};

// ---------------------------------------------------------------------------
// Voice coordination

struct VoiceMessage {
    enum class Kind { coordination, safety_concern };
    Kind kind = Kind::coordination;
    std::string payload;
    FrameStamp stamp;
    double window_start = 0.0;  // s
    double window_end = 0.0;    // s

    bool too_early() const { return stamp.sim_time < window_start; }
    bool too_late() const { return stamp.sim_time > window_end; }
};

}  // namespace mumt::datalink
