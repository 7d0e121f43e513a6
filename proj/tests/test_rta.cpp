#include "doctest.h"

#include <algorithm>

#include "mumt/rng.hpp"
#include "mumt/rta.hpp"

using namespace mumt;
using namespace mumt::rta;

namespace {

struct Rig {
    SafetyConstraintSet constraints;
    RtaConfig cfg;
    plant::PlantConfig plant;

    Rig() { constraints.geofence = rectangular_fence(-20000, 20000, -20000, 20000, 500, 9000); }
    Context ctx() const { return {&constraints, &cfg, &plant}; }
    AircraftState own(const Vec3& p, double heading, double v = 150.0) const {
        return plant::make_state(p, heading, v, 0.0, 1000.0, {}, plant, FrameStamp::at(0, plant.dt));
    }
};

// Independent hold-rollout: straight application of the plant, checked with
// the raw constraint functions.
bool naive_violates(const ControlCommand& c, AircraftState s, const std::optional<LeadTrack>& lead, const Rig& r) {
    plant::PlantConfig p = r.plant;
    p.dt = r.cfg.prediction_dt;
    const int n = static_cast<int>(std::lround(r.cfg.horizon / p.dt));
    Vec3 lp = lead ? lead->position : Vec3{};
    for (int i = 0; i <= n; ++i) {
        if (!check_geofence(s.position, r.constraints.geofence).inside) return true;
        if (lead && distance(s.position, lp) < r.constraints.separation.d_min + lead->extra_radius) return true;
        s = plant::plant_step(s, c, {}, p);
        if (lead) lp = lp + lead->velocity * p.dt;
    }
    return false;
}

}  // namespace

TEST_CASE("safe command passes through bit-identical") {
    Rig r;
    const auto own = r.own({0, 0, -3000}, 0.0);
    const LeadTrack lead{{0, 2000, -3000}, {150, 0, 0}, 10};
    const ControlCommand c{0.01, 1.0, 0.2, FrameStamp::at(0, 0.02)};
    const auto res = assure(c, own, lead, r.ctx());
    CHECK_FALSE(res.intervened);
    CHECK(res.ok);
    CHECK(res.output == c);
    CHECK(res.policy.empty());
}

TEST_CASE("converging on the lead triggers a separation intervention") {
    Rig r;
    const auto own = r.own({0, 0, -3000}, 0.0);
    const LeadTrack lead{{800, 0, -3000}, {0, 0, 0}, 10};
    const auto c = ControlCommand::maintain(FrameStamp::at(0, 0.02));
    REQUIRE(naive_violates(c, own, lead, r));
    const auto res = assure(c, own, lead, r.ctx());
    CHECK(res.intervened);
    CHECK(res.ok);
    REQUIRE(res.reason);
    CHECK(res.reason->kind == Reason::Kind::separation);
    CHECK(res.reason->time > 0.0);
    CHECK_FALSE(res.candidate_clean);
}

TEST_CASE("heading for the fence triggers a geofence intervention") {
    Rig r;
    const auto own = r.own({19000, 0, -3000}, 0.0);
    const auto c = ControlCommand::maintain(FrameStamp::at(0, 0.02));
    REQUIRE(naive_violates(c, own, std::nullopt, r));
    const auto res = assure(c, own, std::nullopt, r.ctx());
    CHECK(res.intervened);
    REQUIRE(res.reason);
    CHECK(res.reason->kind == Reason::Kind::geofence);
}

TEST_CASE("intervention happens exactly when the hold rollout violates") {
    Rig r;
    RngStream rng(11, "rta-test");
    int intervened = 0;
    for (int i = 0; i < 200; ++i) {
        const auto own = r.own({rng.uniform(-19000, 19000), rng.uniform(-19000, 19000), -rng.uniform(1000, 8000)},
                               rng.uniform(-kPi, kPi), rng.uniform(100, 250));
        const LeadTrack lead{own.position + Vec3{rng.uniform(-2000, 2000), rng.uniform(-2000, 2000), 0},
                             {rng.uniform(-150, 150), rng.uniform(-150, 150), 0}, 10};
        const ControlCommand c{rng.uniform(-0.05, 0.05), rng.uniform(-5, 5), 0.0, own.timestamp};
        const auto res = assure(c, own, lead, r.ctx());
        if (!res.candidate_within_epm) continue;
        CAPTURE(i);
        CHECK(res.intervened == naive_violates(c, own, lead, r));
        if (res.intervened) ++intervened;
    }
    CHECK(intervened > 0);
}

TEST_CASE("EPM clamp bounds roll at the margin") {
    Rig r;
    const auto own = r.own({0, 0, -3000}, 0.0);
    const ControlCommand hard{0.6, 0.0, 0.0, own.timestamp};
    const auto lim = r.constraints.epm_envelope;
    REQUIRE(epm_command_violation(hard, own, lim, r.cfg.epm_margin, r.plant));
    const auto c = epm_clamp(hard, own, lim, r.cfg.epm_margin, r.plant);
    CHECK(c.turn_rate <= plant::max_turn_rate_for_roll(own.true_airspeed, r.cfg.epm_margin * lim.max_roll) + 1e-12);
    CHECK_FALSE(epm_command_violation(c, own, lim, r.cfg.epm_margin, r.plant));
    const auto next = plant::plant_step(own, c, {}, r.plant);
    CHECK(std::abs(next.orientation.roll) <= r.cfg.epm_margin * lim.max_roll + 1e-9);
}

TEST_CASE("filter candidate selection: primary, memory, maintain") {
    Rig r;
    RtaFilter f(r.cfg, {}, r.constraints, r.plant);
    RtaStepInput in;
    in.own = r.own({0, 0, -3000}, 0.0);
    in.lead = LeadTrack{{0, 2000, -3000}, {150, 0, 0}, 10};

    auto d = f.step(in);
    REQUIRE(d);
    CHECK(d->candidate_source == "maintain");

    in.primary = ControlCommand{0.02, 0, 0, {}};
    d = f.step(in);
    CHECK(d->candidate_source == "primary");
    CHECK(d->output.turn_rate == 0.02);

    in.primary.reset();
    d = f.step(in);
    CHECK(d->candidate_source == "memory");
    CHECK(d->candidate.turn_rate == 0.02);

    RtaMitigations m;
    m.use_memory = false;
    m.assume_maintain = false;
    RtaFilter bare(r.cfg, m, r.constraints, r.plant);
    RtaStepInput none = in;
    CHECK_FALSE(bare.step(none));
}

TEST_CASE("filter failure alerts") {
    Rig r;
    RtaStepInput in;
    in.own = r.own({0, 0, -3000}, 0.0);
    in.primary = ControlCommand::maintain({});

    SUBCASE("lane mismatch") {
        RtaFilter f(r.cfg, {}, r.constraints, r.plant);
        in.lane_b_turn_offset = 0.1;
        const auto d = f.step(in);
        CHECK_FALSE(d->lanes_agree);
        CHECK(d->status == Status::failed);
        CHECK(std::find(d->alerts.begin(), d->alerts.end(), "rta_failed:lane_mismatch") != d->alerts.end());
    }
    SUBCASE("solver fault") {
        RtaFilter f(r.cfg, {}, r.constraints, r.plant);
        in.solver_fault = true;
        const auto d = f.step(in);
        CHECK(d->status == Status::failed);
        CHECK(std::find(d->alerts.begin(), d->alerts.end(), "rta_failed:no_safe_command") != d->alerts.end());
    }
    SUBCASE("overrun") {
        RtaFilter f(r.cfg, {}, r.constraints, r.plant);
        in.overrun_excess = 1.0;
        const auto d = f.step(in);
        CHECK(d->overrun);
        CHECK(d->compute_cost > d->budget);
    }
    SUBCASE("unreasonable own-state jump") {
        RtaFilter f(r.cfg, {}, r.constraints, r.plant);
        REQUIRE(f.step(in)->status == Status::ok);
        in.own->position.east += 800;
        in.stamp = FrameStamp::at(1, 0.02);
        const auto d = f.step(in);
        CHECK(std::find(d->alerts.begin(), d->alerts.end(), "rta_failed:unreasonable_input") != d->alerts.end());
    }
}

TEST_CASE("disabled filter passes the candidate and guards re-enable") {
    Rig r;
    r.constraints.geofence = rectangular_fence(-20000, 20000, -20000, 20000, 500, 2000);
    RtaFilter f(r.cfg, {}, r.constraints, r.plant);
    RtaStepInput in;
    in.own = r.own({0, 0, -3000}, 0.0);
    in.primary = ControlCommand{0.3, 0, 0, {}};
    in.enabled = false;
    auto d = f.step(in);
    CHECK(d->output.turn_rate == 0.3);
    CHECK_FALSE(d->intervened);
    CHECK(std::find(d->alerts.begin(), d->alerts.end(), "rta_off_violation_predicted") != d->alerts.end());

    in.enabled = true;
    d = f.step(in);
    CHECK(std::find(d->alerts.begin(), d->alerts.end(), "reenable_while_violating") != d->alerts.end());
}

TEST_CASE("rta config validation") {
    RtaConfig c;
    CHECK_NOTHROW(c.validate(0.02));
    c.epm_margin = 1.5;
    CHECK_THROWS_AS(c.validate(0.02), ConfigError);
    c = {};
    c.horizon = -1;
    CHECK_THROWS_AS(c.validate(0.02), ConfigError);
}
