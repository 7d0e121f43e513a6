#include "doctest.h"

#include <cstring>

#include "mumt/datalink.hpp"
#include "mumt/plant.hpp"

using namespace mumt;
using namespace mumt::datalink;

namespace {

PositionReport sample_report(std::int64_t frame, const Vec3& pos = {0, 0, -4000}) {
    plant::PlantConfig cfg;
    PositionReport r;
    r.lead_state = plant::make_state(pos, 0.0, 150, 0, 1000, {}, cfg, FrameStamp::at(frame, 0.02));
    r.test_point_id = "TP-1";
    r.commanded_rejoin_point = Vec3{-150, 300, 0};
    r.report_timestamp = FrameStamp::at(frame, 0.02);
    return r;
}

PositionReport random_report(RngStream& rng) {
    PositionReport r;
    for (const auto& f : state_scalar_fields()) *scalar_field(r.lead_state, f) = rng.uniform(-1e3, 1e3);
    if (rng.bernoulli(0.05)) {
        // A NaN with a non-default payload must survive the round trip.
        const std::uint64_t bits = 0x7ff8000000000000ULL | (rng.next_u64() & 0xfffffULL);
        std::memcpy(&r.lead_state.orientation.roll, &bits, 8);
    }
    r.lead_state.timestamp = {static_cast<std::int64_t>(rng.next_u64() >> 20), rng.uniform(0, 1e5)};
    const int n = static_cast<int>(rng.next_u64() % 12);
    for (int i = 0; i < n; ++i) r.test_point_id.push_back(static_cast<char>(rng.next_u64() % 256));
    if (rng.bernoulli(0.5)) r.commanded_rejoin_point = Vec3{rng.uniform(-500, 500), rng.uniform(-500, 500), 0};
    if (rng.bernoulli(0.3)) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 3);
        for (int i = 0; i < k; ++i) r.add_invalid("field" + std::to_string(i), "reason");
    }
    if (rng.bernoulli(0.8)) r.report_timestamp = r.lead_state.timestamp;
    r.present = static_cast<FieldMask>(rng.next_u64()) & kAllFields;
    return r;
}

}  // namespace

TEST_CASE("round trip nominal and optional-absent") {
    auto r = sample_report(10);
    auto bytes = encode_report(r);
    auto back = decode_report(bytes);
    REQUIRE(back.has_value());
    CHECK(bit_equal(*back, r));
    CHECK(back->lead_state == r.lead_state);

    r.commanded_rejoin_point.reset();
    const auto without = encode_report(r);
    // length prefix (4) + magic (4) + mask (4) + 24 doubles + stamp (16) + string (4 + 4)
    const std::size_t flag_at = 4 + 4 + 4 + 24 * 8 + 16 + 4 + r.test_point_id.size();
    CHECK(without[flag_at] == 0);
    CHECK(bytes[flag_at] == 1);
    CHECK(bit_equal(*decode_report(without), r));
}

TEST_CASE("round trip fuzz") {
    RngStream rng(77, "test.roundtrip");
    for (int i = 0; i < 1000; ++i) {
        const auto r = random_report(rng);
        const auto bytes = encode_report(r);
        const auto back = decode_report(bytes);
        REQUIRE(back.has_value());
        CHECK(encode_report(*back) == bytes);
        CHECK(back->present == r.present);
        CHECK(back->invalid_details == r.invalid_details);
        CHECK(back->test_point_id == r.test_point_id);
    }
}

TEST_CASE("decode rejects malformed input") {
    auto bytes = encode_report(sample_report(3));
    CHECK_FALSE(decode_report(std::span(bytes.data(), bytes.size() - 1)).has_value());
    bytes[5] ^= 0xff;
    CHECK_FALSE(decode_report(bytes).has_value());
    CHECK_FALSE(decode_report(std::vector<std::uint8_t>{}).has_value());
}

TEST_CASE("validation verdicts") {
    ReasonablenessBounds b;
    std::vector<PositionReport> hist{sample_report(9)};
    auto r = sample_report(10, {3.0, 0, -4000});
    auto v = validate_report(r, hist, b, 10);
    CHECK(v.verdict == Verdict::valid);
    CHECK(v.reasons.empty());

    // 10 * v_max implied between consecutive frames
    auto jump = sample_report(10, {10 * b.v_max * b.dt, 0, -4000});
    v = validate_report(jump, hist, b, 10);
    CHECK(v.verdict == Verdict::unreasonable);
    CHECK(v.reasons.at(0).field == "position");
    CHECK(v.reasons.at(0).rule_id == "kinematic.position");

    auto inv = sample_report(10, {3.0, 0, -4000});
    inv.add_invalid("attitude", "roll disagrees with INS");
    v = validate_report(inv, hist, b, 10);
    CHECK(v.verdict == Verdict::invalid);
    REQUIRE(v.reasons.size() == 1);
    CHECK(v.reasons[0].field == "attitude");
    CHECK(v.reasons[0].detail == "roll disagrees with INS");

    auto nostamp = sample_report(10);
    nostamp.report_timestamp.reset();
    v = validate_report(nostamp, hist, b, 10);
    CHECK(v.verdict == Verdict::invalid);
    CHECK(v.has_rule("required.timestamp"));

    auto stale = sample_report(10);
    v = validate_report(stale, hist, b, 10 + b.stale_frames + 1);
    CHECK(v.verdict == Verdict::unreasonable);
    CHECK(v.has_rule("timestamp.stale"));

    v = validate_report(sample_report(9), hist, b, 10);
    CHECK(v.has_rule("timestamp.monotone"));
}

TEST_CASE("missing required field is never valid") {
    ReasonablenessBounds b;
    for (Field f : state_fields()) {
        auto r = sample_report(5);
        r.drop(f);
        CHECK(validate_report(r, {}, b, 5).verdict == Verdict::invalid);
    }
    auto r = sample_report(5);
    r.lead_state.fuel_remaining = std::nan("");
    CHECK(validate_report(r, {}, b, 5).verdict == Verdict::invalid);
}

TEST_CASE("out-of-range scalars are invalid") {
    ReasonablenessBounds b;
    auto roll = sample_report(5);
    roll.lead_state.orientation.roll = 4.0;
    auto v = validate_report(roll, {}, b, 5);
    CHECK(v.verdict == Verdict::invalid);
    CHECK(v.has_rule("range."));

    auto pla = sample_report(5);
    pla.lead_state.power_lever_angle = 1.2;
    CHECK(validate_report(pla, {}, b, 5).verdict == Verdict::invalid);

    auto fuel = sample_report(5);
    fuel.lead_state.fuel_remaining = -1.0;
    CHECK(validate_report(fuel, {}, b, 5).verdict == Verdict::invalid);

    auto edge = sample_report(5);
    edge.lead_state.power_lever_angle = 1.0;
    CHECK(validate_report(edge, {}, b, 5).verdict == Verdict::valid);
}

TEST_CASE("transmit") {
    const auto r = sample_report(1);
    RngStream rng(1, "chan");
    ChannelConfig perfect;
    auto o = transmit(r, perfect, rng);
    CHECK(o.delivered);
    CHECK(o.delay_frames == 0);
    CHECK(bit_equal(o.report, r));

    ChannelConfig dead;
    dead.dropout_probability = 1.0;
    CHECK_FALSE(transmit(r, dead, rng).delivered);

    ChannelConfig lossy;
    lossy.dropout_probability = 0.1;
    RngStream s(2024, "chan.l15");
    int dropped = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) dropped += !transmit(r, lossy, s).delivered;
    const double rate = static_cast<double>(dropped) / n;
    CHECK(rate >= 0.09);
    CHECK(rate <= 0.11);

    ChannelConfig delayed;
    delayed.max_delay_frames = 4;
    delayed.corruption = Perturbation{"position.east", 25.0};
    RngStream a(5, "x"), bb(5, "x");
    for (int i = 0; i < 200; ++i) {
        const auto o1 = transmit(r, delayed, a);
        const auto o2 = transmit(r, delayed, bb);
        CHECK(o1.delay_frames == o2.delay_frames);
        CHECK(o1.delay_frames <= 4);
        CHECK(o1.report.lead_state.position.east == r.lead_state.position.east + 25.0);
    }
}

TEST_CASE("channel queue releases reports at their arrival frame") {
    DatalinkChannel ch;
    DeliveryOutcome o{true, 2, sample_report(0)};
    ch.send(o, 0);
    ch.send({true, 0, sample_report(1)}, 1);
    CHECK(ch.receive(0).empty());
    auto got = ch.receive(1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].second == 0);
    got = ch.receive(2);
    REQUIRE(got.size() == 1);
    CHECK(got[0].second == 2);
    CHECK(ch.pending() == 0);
}
