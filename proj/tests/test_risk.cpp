#include "doctest.h"

#include "mumt/risk.hpp"

using namespace mumt;
using namespace mumt::risk;

TEST_CASE("severity rows: the most severe criterion wins") {
    CHECK(severity_level({}) == 4);

    SeverityAssessment s;
    s.monetary_loss = 99'999;
    CHECK(severity_level(s) == 4);
    s.monetary_loss = 100'000;
    CHECK(severity_level(s) == 3);
    s.monetary_loss = 999'999;
    CHECK(severity_level(s) == 3);
    s.monetary_loss = 1'000'000;
    CHECK(severity_level(s) == 2);
    s.monetary_loss = 9'999'999;
    CHECK(severity_level(s) == 2);
    s.monetary_loss = 10'000'000;
    CHECK(severity_level(s) == 1);

    SeverityAssessment lw;
    lw.lost_workday = true;
    CHECK(severity_level(lw) == 3);
    SeverityAssessment hosp;
    hosp.hospitalization_3plus = true;
    CHECK(severity_level(hosp) == 2);
    SeverityAssessment death;
    death.death_or_total_disability = true;
    CHECK(severity_level(death) == 1);

    const std::pair<Environmental, int> env[] = {{Environmental::minimal, 4},
                                                 {Environmental::reversible_moderate, 3},
                                                 {Environmental::reversible_significant, 2},
                                                 {Environmental::irreversible_significant, 1}};
    for (const auto& [e, lvl] : env) {
        SeverityAssessment a;
        a.environmental = e;
        CHECK(severity_level(a) == lvl);
        a.lost_workday = true;
        CHECK(severity_level(a) == std::min(lvl, 3));
    }
}

TEST_CASE("NASA probability bands") {
    CHECK(nasa_probability_level(1.0).level == 5);
    CHECK(nasa_probability_level(0.81).level == 5);
    CHECK(nasa_probability_level(0.8).level == 4);
    CHECK(nasa_probability_level(0.61).level == 4);
    CHECK(nasa_probability_level(0.6).level == 3);
    CHECK(nasa_probability_level(0.5).level == 3);
    CHECK(nasa_probability_level(0.4).level == 2);
    CHECK(nasa_probability_level(0.21).level == 2);
    CHECK(nasa_probability_level(0.2).level == 1);
    CHECK(nasa_probability_level(0.01).level == 1);
    CHECK(nasa_probability_level(0.01).note.empty());
    const auto zero = nasa_probability_level(0.0);
    CHECK(zero.level == 1);
    CHECK_FALSE(zero.note.empty());
    CHECK_THROWS_AS(nasa_probability_level(-0.1), ConfigError);
    CHECK_THROWS_AS(nasa_probability_level(1.5), ConfigError);
    CHECK_THROWS_AS(nasa_probability_level(std::nan("")), ConfigError);
}

TEST_CASE("MIL probability letters") {
    CHECK(mil_probability_description('A') == "Frequent");
    CHECK(mil_probability_description('B') == "Probable");
    CHECK(mil_probability_description('C') == "Occasional");
    CHECK(mil_probability_description('D') == "Remote");
    CHECK(mil_probability_description('E') == "Improbable");
    CHECK(mil_probability_description('F').find("incapable of occurrence") != std::string::npos);
    CHECK_THROWS_AS(mil_probability_level('G'), ConfigError);
    CHECK_THROWS_AS(mil_probability_level('a'), ConfigError);
}

TEST_CASE("shipped matrix is complete and classifies assessments") {
    const auto m = RiskMatrixConfig::load(default_matrix_path());
    for (auto scheme : {Scheme::mil882e, Scheme::nasa_s3001}) {
        const auto& g = m.grids.at(scheme);
        for (int sev = 1; sev <= 4; ++sev)
            for (const auto& p : g.probability_levels) CHECK_FALSE(risk_category(sev, p, scheme, m).empty());
    }
    CHECK(m.grids.at(Scheme::mil882e).probability_levels.size() == 6);
    CHECK(m.grids.at(Scheme::nasa_s3001).probability_levels.size() == 5);

    const auto c = classify({{"severity", {{"monetary_loss", 2e6}}},
                             {"probability", {{"scheme", "nasa_s3001"}, {"nasa_probability", 0.9}}}},
                            m);
    CHECK(c.severity == 2);
    CHECK(c.probability == "5");
    CHECK(c.category == risk_category(2, "5", Scheme::nasa_s3001, m));

    const auto e = classify({{"severity", {{"death_or_total_disability", true}}},
                             {"probability", {{"scheme", "mil882e"}, {"mil_level", "F"}}}},
                            m);
    CHECK(e.severity == 1);
    CHECK(e.probability == "F");
    CHECK(e.category == "Eliminated");
}

TEST_CASE("malformed assessments and matrices are rejected") {
    const auto m = RiskMatrixConfig::load(default_matrix_path());
    CHECK_THROWS_AS(classify({{"severity", json::object()},
                              {"probability", {{"scheme", "mil882e"}, {"nasa_probability", 0.5}}}},
                             m),
                    ConfigError);
    CHECK_THROWS_AS(classify({{"severity", json::object()}, {"probability", {{"scheme", "other"}}}}, m), ConfigError);
    CHECK_THROWS_AS(classify({{"severity", {{"environmental", "huge"}}},
                              {"probability", {{"scheme", "mil882e"}, {"mil_level", "A"}}}},
                             m),
                    ConfigError);
    CHECK_THROWS_AS(classify(json::object(), m), ConfigError);

    json partial = {{"mil882e", {{"probability_levels", {"A"}}, {"cells", {{"1", {{"A", "High"}}}}}}}};
    CHECK_THROWS_AS(RiskMatrixConfig::from_json(partial), ConfigError);
}
