#include "mumt/datalink.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace mumt::datalink {

namespace {

struct FieldInfo {
    Field field;
    std::string_view name;
    std::vector<std::string> scalars;
};

const std::vector<FieldInfo>& field_table() {
    static const std::vector<FieldInfo> t = {
        {Field::position, "position", {"position.north", "position.east", "position.down"}},
        {Field::velocity, "velocity", {"velocity.north", "velocity.east", "velocity.down"}},
        {Field::acceleration, "acceleration", {"acceleration.north", "acceleration.east", "acceleration.down"}},
        {Field::normal_acceleration, "normal_acceleration", {"normal_acceleration"}},
        {Field::attitude, "attitude", {"roll", "pitch"}},
        {Field::heading, "heading", {"yaw"}},
        {Field::orientation_rates, "orientation_rates", {"p", "q", "r"}},
        {Field::true_airspeed, "true_airspeed", {"true_airspeed"}},
        {Field::calibrated_airspeed, "calibrated_airspeed", {"calibrated_airspeed"}},
        {Field::wind_velocity, "wind_velocity", {"wind.north", "wind.east", "wind.down"}},
        {Field::fuel_remaining, "fuel_remaining", {"fuel_remaining"}},
        {Field::power_lever_angle, "power_lever_angle", {"power_lever_angle"}},
        {Field::angle_of_attack, "angle_of_attack", {"angle_of_attack"}},
        {Field::test_point_id, "test_point_id", {}},
        {Field::invalid_flag, "invalid_flag", {}},
        {Field::timestamp, "timestamp", {}},
    };
    return t;
}

// Plausible physical ranges for single scalars, checked on every report.
struct Range {
    std::string_view scalar;
    double lo, hi;
};
constexpr std::array kRanges = {
    Range{"normal_acceleration", -10.0, 15.0}, Range{"roll", -kPi, kPi},     Range{"pitch", -kPi / 2, kPi / 2},
    Range{"yaw", -kPi, kPi},                    Range{"true_airspeed", 0.0, 1e9}, Range{"calibrated_airspeed", 0.0, 1e9},
    Range{"fuel_remaining", 0.0, 1e9},          Range{"power_lever_angle", 0.0, 1.0},
    Range{"angle_of_attack", -kPi / 2, kPi / 2},
};

// ---- little-endian writer / reader

class Writer {
public:
    void u8(std::uint8_t v) { out.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) {
        std::uint64_t b;
        std::memcpy(&b, &v, 8);
        u64(b);
    }
    void vec(const Vec3& v) {
        f64(v.north);
        f64(v.east);
        f64(v.down);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
    void stamp(const FrameStamp& s) {
        i64(s.frame_index);
        f64(s.sim_time);
    }
    std::vector<std::uint8_t> out;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
    bool ok() const { return ok_; }
    bool done() const { return pos_ == b_.size(); }

    std::uint8_t u8() { return need(1) ? b_[pos_++] : 0; }
    std::uint32_t u32() {
        if (!need(4)) return 0;
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        if (!need(8)) return 0;
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() {
        const std::uint64_t b = u64();
        double v;
        std::memcpy(&v, &b, 8);
        return v;
    }
    Vec3 vec() {
        Vec3 v;
        v.north = f64();
        v.east = f64();
        v.down = f64();
        return v;
    }
    std::string str() {
        const auto n = u32();
        if (!need(n)) return {};
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    FrameStamp stamp() {
        FrameStamp s;
        s.frame_index = i64();
        s.sim_time = f64();
        return s;
    }
    bool flag() {
        const auto v = u8();
        if (v > 1) ok_ = false;
        return v == 1;
    }

private:
    bool need(std::size_t n) {
        if (!ok_ || b_.size() - pos_ < n) {
            ok_ = false;
            return false;
        }
        return true;
    }
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
    bool ok_ = true;
};

void write_state(Writer& w, const AircraftState& s) {
    w.vec(s.position);
    w.vec(s.velocity);
    w.vec(s.acceleration);
    w.f64(s.normal_acceleration);
    w.f64(s.orientation.roll);
    w.f64(s.orientation.pitch);
    w.f64(s.orientation.yaw);
    w.f64(s.orientation_rates.p);
    w.f64(s.orientation_rates.q);
    w.f64(s.orientation_rates.r);
    w.f64(s.true_airspeed);
    w.f64(s.calibrated_airspeed);
    w.vec(s.wind_velocity);
    w.f64(s.fuel_remaining);
    w.f64(s.power_lever_angle);
    w.f64(s.angle_of_attack);
    w.stamp(s.timestamp);
}

AircraftState read_state(Reader& r) {
    AircraftState s;
    s.position = r.vec();
    s.velocity = r.vec();
    s.acceleration = r.vec();
    s.normal_acceleration = r.f64();
    s.orientation.roll = r.f64();
    s.orientation.pitch = r.f64();
    s.orientation.yaw = r.f64();
    s.orientation_rates.p = r.f64();
    s.orientation_rates.q = r.f64();
    s.orientation_rates.r = r.f64();
    s.true_airspeed = r.f64();
    s.calibrated_airspeed = r.f64();
    s.wind_velocity = r.vec();
    s.fuel_remaining = r.f64();
    s.power_lever_angle = r.f64();
    s.angle_of_attack = r.f64();
    s.timestamp = r.stamp();
    return s;
}

constexpr std::uint32_t kMagic = 0x31524d4d;  // "MMR1"

}  // namespace

const std::vector<Field>& state_fields() {
    static const std::vector<Field> f = {
        Field::position,          Field::velocity,         Field::acceleration,        Field::normal_acceleration,
        Field::attitude,          Field::heading,          Field::orientation_rates,   Field::true_airspeed,
        Field::calibrated_airspeed, Field::wind_velocity, Field::fuel_remaining,      Field::power_lever_angle,
        Field::angle_of_attack,
    };
    return f;
}

std::string_view field_name(Field f) {
    for (const auto& i : field_table())
        if (i.field == f) return i.name;
    return "?";
}

std::optional<Field> field_from_name(std::string_view name) {
    for (const auto& i : field_table())
        if (i.name == name) return i.field;
    return std::nullopt;
}

std::vector<std::string> field_scalars(Field f) {
    for (const auto& i : field_table())
        if (i.field == f) return i.scalars;
    return {};
}

void PositionReport::add_invalid(std::string field, std::string reason) {
    invalid_details.push_back({std::move(field), std::move(reason)});
    invalid = true;
}

bool bit_equal(const PositionReport& a, const PositionReport& b) {
    return encode_report(a) == encode_report(b);
}

std::vector<std::uint8_t> encode_report(const PositionReport& r) {
    Writer w;
    w.u32(0);  // length placeholder
    w.u32(kMagic);
    w.u32(r.present);
    write_state(w, r.lead_state);
    w.str(r.test_point_id);
    w.u8(r.commanded_rejoin_point ? 1 : 0);
    if (r.commanded_rejoin_point) w.vec(*r.commanded_rejoin_point);
    w.u8(r.invalid ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(r.invalid_details.size()));
    for (const auto& d : r.invalid_details) {
        w.str(d.field);
        w.str(d.reason);
    }
    w.u8(r.report_timestamp ? 1 : 0);
    if (r.report_timestamp) w.stamp(*r.report_timestamp);
    const auto len = static_cast<std::uint32_t>(w.out.size() - 4);
    for (int i = 0; i < 4; ++i) w.out[i] = static_cast<std::uint8_t>(len >> (8 * i));
    return std::move(w.out);
}

std::optional<PositionReport> decode_report(std::span<const std::uint8_t> bytes) {
    Reader rd(bytes);
    const auto len = rd.u32();
    if (!rd.ok() || len != bytes.size() - 4) return std::nullopt;
    if (rd.u32() != kMagic) return std::nullopt;
    PositionReport r;
    r.present = rd.u32();
    if (r.present & ~kAllFields) return std::nullopt;
    r.lead_state = read_state(rd);
    r.test_point_id = rd.str();
    if (rd.flag()) r.commanded_rejoin_point = rd.vec();
    r.invalid = rd.flag();
    const auto n = rd.u32();
    if (n > bytes.size()) return std::nullopt;
    for (std::uint32_t i = 0; i < n && rd.ok(); ++i) {
        InvalidDetail d;
        d.field = rd.str();
        d.reason = rd.str();
        r.invalid_details.push_back(std::move(d));
    }
    if (rd.flag()) r.report_timestamp = rd.stamp();
    if (!rd.ok() || !rd.done()) return std::nullopt;
    return r;
}

// ---------------------------------------------------------------------------

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::valid: return "valid";
        case Verdict::invalid: return "invalid";
        case Verdict::unreasonable: return "unreasonable";
    }
    return "?";
}

bool ValidationResult::has_rule(std::string_view prefix) const {
    return std::any_of(reasons.begin(), reasons.end(),
                       [&](const Reason& r) { return r.rule_id.compare(0, prefix.size(), prefix) == 0; });
}

ValidationResult validate_report(const PositionReport& r, std::span<const PositionReport> history,
                                 const ReasonablenessBounds& b, std::int64_t now_frame) {
    std::vector<Reason> invalid;
    std::vector<Reason> unreasonable;

    if (!r.report_timestamp || !r.has(Field::timestamp))
        invalid.push_back({"timestamp", "required.timestamp", "missing timestamp"});

    auto copy = r.lead_state;
    for (Field f : state_fields()) {
        const auto name = std::string(field_name(f));
        if (!r.has(f)) {
            if (b.required & bit(f)) invalid.push_back({name, "required." + name, "missing"});
            continue;
        }
        for (const auto& s : field_scalars(f)) {
            const double v = *scalar_field(copy, s);
            if (!std::isfinite(v)) {
                invalid.push_back({name, "required." + name, s + " not finite"});
                break;
            }
            for (const auto& rg : kRanges)
                if (rg.scalar == s && (v < rg.lo || v > rg.hi))
                    invalid.push_back({name, "range." + name, s + " out of range"});
        }
    }
    if ((b.required & bit(Field::test_point_id)) && !r.has(Field::test_point_id))
        invalid.push_back({"test_point_id", "required.test_point_id", "missing"});
    if ((b.required & bit(Field::invalid_flag)) && !r.has(Field::invalid_flag))
        invalid.push_back({"invalid_flag", "required.invalid_flag", "missing"});
    if (r.has(Field::invalid_flag) && r.invalid) {
        if (r.invalid_details.empty()) invalid.push_back({"invalid_flag", "sender_invalid", "flag set"});
        for (const auto& d : r.invalid_details) invalid.push_back({d.field, "sender_invalid", d.reason});
    }

    if (b.kinematic_checks) {
        const auto& s = r.lead_state;
        if (r.has(Field::velocity) && s.velocity.finite() && s.velocity.norm() > b.v_max)
            unreasonable.push_back({"velocity", "kinematic.speed", "speed exceeds v_max"});
        if (r.has(Field::acceleration) && s.acceleration.finite() && s.acceleration.norm() > b.a_max)
            unreasonable.push_back({"acceleration", "kinematic.accel", "acceleration exceeds a_max"});
        if (r.report_timestamp) {
            const auto k = r.report_timestamp->frame_index;
            if (now_frame - k > b.stale_frames)
                unreasonable.push_back({"timestamp", "timestamp.stale", "older than stale_frames"});
            if (!history.empty() && history.back().report_timestamp) {
                const auto& prev = history.back();
                const auto kp = prev.report_timestamp->frame_index;
                if (k <= kp) {
                    unreasonable.push_back({"timestamp", "timestamp.monotone", "not after previous report"});
                } else if (r.has(Field::position) && prev.has(Field::position) && s.position.finite()) {
                    const double dt = static_cast<double>(k - kp) * b.dt;
                    if (distance(s.position, prev.lead_state.position) > b.v_max * dt + b.slack)
                        unreasonable.push_back({"position", "kinematic.position", "jump exceeds v_max*dt+slack"});
                }
            }
        }
    }

    ValidationResult out;
    if (!invalid.empty()) {
        out.verdict = Verdict::invalid;
        out.reasons = std::move(invalid);
        out.reasons.insert(out.reasons.end(), unreasonable.begin(), unreasonable.end());
    } else if (!unreasonable.empty()) {
        out.verdict = Verdict::unreasonable;
        out.reasons = std::move(unreasonable);
    }
    return out;
}

// ---------------------------------------------------------------------------

void ChannelConfig::validate() const {
    if (!(dropout_probability >= 0.0 && dropout_probability <= 1.0))
        throw ConfigError("channel dropout_probability must be in [0, 1]");
    if (max_delay_frames < 0) throw ConfigError("channel max_delay_frames must be >= 0");
    if (corruption) {
        AircraftState probe;
        if (!scalar_field(probe, corruption->field))
            throw ConfigError("unknown corruption field '" + corruption->field + "'");
    }
}

DeliveryOutcome transmit(const PositionReport& r, const ChannelConfig& ch, RngStream& rng) {
    const double u_drop = rng.uniform();
    const std::uint64_t u_delay = rng.next_u64();
    DeliveryOutcome out;
    if (u_drop < ch.dropout_probability) return out;
    out.delivered = true;
    out.delay_frames =
        ch.max_delay_frames > 0 ? static_cast<int>(u_delay % static_cast<std::uint64_t>(ch.max_delay_frames + 1)) : 0;
    out.report = r;
    if (ch.corruption) {
        if (double* f = scalar_field(out.report.lead_state, ch.corruption->field)) *f += ch.corruption->delta;
    }
    return out;
}

void DatalinkChannel::send(const DeliveryOutcome& o, std::int64_t frame) {
    if (!o.delivered) return;
    queue_.push_back({frame + o.delay_frames, o.delay_frames, o.report});
}

std::vector<std::pair<PositionReport, int>> DatalinkChannel::receive(std::int64_t frame) {
    std::vector<std::pair<PositionReport, int>> out;
    auto it = std::stable_partition(queue_.begin(), queue_.end(), [&](const InFlight& f) { return f.arrival > frame; });
    for (auto j = it; j != queue_.end(); ++j) out.emplace_back(std::move(j->report), j->delay);
    queue_.erase(it, queue_.end());
    return out;
}

}  // namespace mumt::datalink
