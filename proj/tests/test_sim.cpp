#include "doctest.h"

#include <map>
#include <sstream>

#include "mumt/sim.hpp"

using namespace mumt;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(MUMT_DATA_DIR) / "scenarios";

const monitors::Catalog& catalog() {
    static const auto c = monitors::Catalog::load(monitors::default_catalog_path());
    return c;
}

sim::Scenario short_nominal(std::int64_t frames = 300) {
    auto s = sim::load_scenario(kScenarios / "nominal.scn");
    s.duration_frames = frames;
    return s;
}

}  // namespace

TEST_CASE("same seed gives the same trace") {
    const auto s = short_nominal();
    const auto a = sim::run(s);
    const auto b = sim::run(s);
    CHECK(a.summary.trace_hash == b.summary.trace_hash);
    CHECK(a.summary.config_hash == b.summary.config_hash);
    CHECK(sim::trace_text(a.trace) == sim::trace_text(b.trace));

    sim::RunOptions other;
    other.seed = s.seed + 1;
    CHECK(sim::run(s, other).summary.config_hash != a.summary.config_hash);
}

TEST_CASE("every channel is recorded exactly once per frame") {
    const auto r = sim::run(short_nominal(200));
    std::map<std::pair<std::int64_t, std::string>, int> count;
    for (const auto& rec : r.trace.records) {
        ++count[{rec.frame.frame_index, rec.channel}];
    }
    for (std::int64_t k = 0; k < 200; ++k)
        for (const auto& ch : monitors::channel_ids()) {
            CAPTURE(k);
            CAPTURE(ch);
            CHECK(count[{k, ch}] == 1);
        }
    CHECK(count.size() == 200 * monitors::channel_ids().size());
}

TEST_CASE("nominal scenario is clean") {
    sim::RunOptions opt;
    opt.catalog = &catalog();
    const auto r = sim::run(short_nominal(1000), opt);
    CHECK(r.summary.hazard_violations == 0);
    CHECK(r.summary.requirement_violations == 0);
    CHECK(r.summary.final_source == "autonomy");
}

TEST_CASE("selector fault hands control to the pilot at the fault frame") {
    sim::RunOptions opt;
    opt.catalog = &catalog();
    const auto r = sim::run(sim::load_scenario(kScenarios / "w3_fault.scn"), opt);
    for (const auto& rec : r.trace.records) {
        if (rec.channel != "W3") continue;
        CAPTURE(rec.frame.frame_index);
        CHECK((rec.payload.at("source") == "pilot") == (rec.frame.frame_index >= 500));
    }
    CHECK(r.summary.hazard_violations == 0);
    CHECK(r.summary.final_source == "pilot");
}

TEST_CASE("re-evaluating a written trace reproduces the run verdicts") {
    sim::RunOptions opt;
    opt.catalog = &catalog();
    const auto r = sim::run(sim::load_scenario(kScenarios / "recorder_fault.scn"), opt);
    std::stringstream ss;
    r.trace.write(ss);
    const auto back = monitors::Trace::read(ss);
    const auto again = monitors::evaluate(back, catalog().monitors());
    REQUIRE(again.size() == r.verdicts.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CAPTURE(again[i].id);
        CHECK(again[i].violations.size() == r.verdicts[i].violations.size());
    }
    REQUIRE(r.verdict("H5"));
    CHECK(r.verdict("H5")->violations.size() == 10);
}

TEST_CASE("scenario documents are validated") {
    const auto base = kScenarios;
    CHECK_THROWS_AS(sim::parse_scenario({{"id", "x"}, {"duration_frames", -5}}, base), ConfigError);
    CHECK_THROWS_AS(sim::parse_scenario({{"id", "x"}, {"dt", 0.0}}, base), ConfigError);
    CHECK_THROWS_AS(sim::parse_scenario({{"id", "x"}, {"faults", {{{"kind", "gremlins"}}}}}, base), ConfigError);
    CHECK_THROWS_AS(sim::parse_scenario({{"id", "x"}, {"extends", "no_such_file.json"}}, base), ConfigError);
    CHECK_THROWS_AS(sim::load_scenario(base / "missing.scn"), ConfigError);
    CHECK_NOTHROW(sim::parse_scenario({{"id", "x"}}, base));
}

TEST_CASE("mitigation lists") {
    CHECK(sim::parse_mitigation_list("none").empty());
    CHECK(sim::parse_mitigation_list("all") == sim::toggleable_mitigations());
    CHECK(sim::parse_mitigation_list("RL2.W3.1,RL2.W3.2") == std::set<std::string>{"RL2.W3.1", "RL2.W3.2"});
    CHECK_THROWS_AS(sim::parse_mitigation_list("RL9.9"), ConfigError);
    CHECK(sim::toggleable_mitigations().size() == 79);
    for (const auto& id : sim::construction_enforced()) CHECK(sim::toggleable_mitigations().count(id) == 0);
}

TEST_CASE("paired run on a UCA scenario is mitigated") {
    const auto s = sim::load_scenario(kScenarios / "uca" / "uca_w3_1.scn");
    const auto p = sim::run_paired(s, s.mitigation, catalog());
    CHECK(p.status == "mitigated");
    CHECK(p.off_target_violations >= 1);
    CHECK(p.on_target_violations == 0);
    CHECK(p.on_hazard_violations == 0);
}
