#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "mumt/sim.hpp"

namespace mumt::sim {

namespace {

std::size_t violations_of(const std::vector<monitors::MonitorVerdict>& v, const std::string& id) {
    for (const auto& x : v)
        if (x.id == id) return x.violations.size();
    return 0;
}

std::size_t hazard_violations(const std::vector<monitors::MonitorVerdict>& v) {
    std::size_t n = 0;
    for (const auto& x : v)
        if (x.severity == monitors::Severity::hazard) n += x.violations.size();
    return n;
}

}  // namespace

PairedResult run_paired(const Scenario& s, const std::string& mitigation_id, const monitors::Catalog& catalog) {
    PairedResult p;
    p.scenario = s.id;
    p.mitigation = mitigation_id;
    p.target = s.target.empty() ? mitigation_id : s.target;

    if (construction_enforced().count(mitigation_id)) {
        p.status = "enforced-by-construction";
        return p;
    }
    if (!toggleable_mitigations().count(mitigation_id)) {
        p.status = "not-toggleable";
        return p;
    }

    std::set<std::string> on = s.mitigations;
    on.insert(mitigation_id);
    std::set<std::string> off = on;
    off.erase(mitigation_id);

    RunOptions o;
    o.catalog = &catalog;
    o.mitigations = off;
    p.off_verdicts = run(s, o).verdicts;
    o.mitigations = on;
    p.on_verdicts = run(s, o).verdicts;

    p.off_target_violations = violations_of(p.off_verdicts, p.target);
    p.on_target_violations = violations_of(p.on_verdicts, p.target);
    p.off_hazard_violations = hazard_violations(p.off_verdicts);
    p.on_hazard_violations = hazard_violations(p.on_verdicts);
    const bool ok = p.off_target_violations >= 1 && p.on_target_violations == 0 && p.on_hazard_violations == 0;
    p.status = ok ? "mitigated" : "not-mitigated";
    return p;
}

unsigned default_workers() {
    if (const char* e = std::getenv("MUMT_WORKERS")) {
        const int n = std::atoi(e);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<PairedResult> suite(const std::filesystem::path& dir, const monitors::Catalog& catalog, unsigned workers,
                                const std::optional<std::set<std::string>>& base) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("scenario directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".scn") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<Scenario> scenarios;
    for (const auto& p : files) {
        auto s = load_scenario(p);
        if (base) s.mitigations = *base;
        s.validate(&catalog);
        if (s.mitigation.empty()) throw ConfigError("scenario " + s.id + " names no mitigation");
        scenarios.push_back(std::move(s));
    }

    std::vector<PairedResult> out(scenarios.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    auto work = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            try {
                out[i] = run_paired(scenarios[i], scenarios[i].mitigation, catalog);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(scenarios.size())));
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    std::sort(out.begin(), out.end(), [](const PairedResult& a, const PairedResult& b) { return a.scenario < b.scenario; });
    return out;
}

}  // namespace mumt::sim
