#pragma once

// Internals shared by the scheduler and the datalink endpoints.

#include <deque>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mumt/sim.hpp"

namespace mumt::sim::detail {

class Faults {
public:
    explicit Faults(const std::vector<FaultSpec>& f) : faults_(&f) {}
    /// First fault of `kind` active at frame k whose target matches (empty matches any).
    const FaultSpec* find(FaultSpec::Kind kind, std::string_view target, std::int64_t k) const;
    std::vector<const FaultSpec*> all(FaultSpec::Kind kind, std::string_view target, std::int64_t k) const;
    bool any(FaultSpec::Kind kind, std::string_view target, std::int64_t k) const { return find(kind, target, k); }
    /// Sum of `value` over active matching faults.
    double sum(FaultSpec::Kind kind, std::string_view target, std::int64_t k) const;

private:
    const std::vector<FaultSpec>* faults_;
};

class Mitigations {
public:
    explicit Mitigations(std::set<std::string> on) : on_(std::move(on)) {}
    bool operator()(const std::string& id) const { return on_.count(id) != 0; }

private:
    std::set<std::string> on_;
};

struct PlanTestPoint {
    std::string id;
    std::optional<Vec3> rejoin;
    std::int64_t from = 0;
    std::int64_t to = 0;  // inclusive
};

struct VoiceEvent {
    std::int64_t frame = 0;
    std::string payload;
    std::int64_t window_start = 0;
    std::int64_t window_end = 0;
};

/// The flight plan both aircraft share, derived from the test card.
struct Plan {
    std::vector<PlanTestPoint> test_points;
    std::vector<std::pair<std::int64_t, Vec3>> rejoin_points;
    std::vector<VoiceEvent> voice;

    static Plan from(const Scenario& s);
    const PlanTestPoint* test_point_at(std::int64_t k) const;
    std::optional<Vec3> rejoin_at(std::int64_t k) const;
};

struct LeadReport {
    datalink::PositionReport report;
    json payload;
};

/// Lead-side report generation (instrument errors, sampling, flags, encoding).
LeadReport build_lead_report(const Scenario& s, const Faults& f, const Mitigations& m, const Plan& plan,
                             std::int64_t k, const std::vector<AircraftState>& lead_truth);

/// Wingman-side report handling: validation, estimation and the lead estimate.
class WingLink {
public:
    WingLink(const Scenario& s, const Mitigations& m);

    struct Out {
        json payload;
        std::optional<controllers::LeadEstimate> estimate;
        std::optional<rta::LeadTrack> track;
        std::vector<std::string> alerts;  // W13
        std::string test_point;
        std::optional<Vec3> commanded_rejoin;
    };

    Out step(std::int64_t k, const std::vector<std::pair<datalink::PositionReport, int>>& arrivals,
             const std::vector<AircraftState>& lead_truth, const Plan& plan, const Faults& f);

private:
    const Scenario* s_;
    const Mitigations* m_;
    std::deque<datalink::PositionReport> history_;
    std::optional<datalink::PositionReport> last_;
    std::optional<std::int64_t> last_arrival_;
    std::string last_test_point_;
    std::optional<Vec3> last_rejoin_;
    std::vector<VoiceEvent> held_;
    std::set<std::size_t> delivered_voice_;
};

}  // namespace mumt::sim::detail
