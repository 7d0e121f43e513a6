// mumt: run scenarios and suites, check traces, classify risk, print the
// traceability matrix.
//
// Exit codes: 0 all monitors pass, 1 requirement violations only,
// 2 hazard violations, 3 configuration error, 4 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mumt/monitors.hpp"
#include "mumt/risk.hpp"
#include "mumt/sim.hpp"

namespace fs = std::filesystem;
using namespace mumt;

namespace {

int exit_code(const std::vector<monitors::MonitorVerdict>& v) {
    bool hazard = false;
    bool req = false;
    for (const auto& x : v) {
        if (x.pass()) continue;
        (x.severity == monitors::Severity::hazard ? hazard : req) = true;
    }
    return hazard ? 2 : req ? 1 : 0;
}

void print_verdicts(const std::vector<monitors::MonitorVerdict>& v, bool failures_only) {
    for (const auto& x : v) {
        if (failures_only && x.pass()) continue;
        std::printf("  %-10s %-11s %s", x.id.c_str(), monitors::severity_name(x.severity).c_str(),
                    x.pass() ? "pass" : "FAIL");
        if (!x.pass())
            std::printf("  %zu violations, first at frame %lld", x.violations.size(),
                        static_cast<long long>(x.violations.front().frame));
        std::printf("\n");
    }
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << j.dump(2) << "\n";
}

fs::path prepare_out(const std::string& out) {
    fs::path p(out);
    fs::create_directories(p);
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MUMT wingman run-time assurance simulator"};
    app.require_subcommand(1);

    std::string catalog_path = monitors::default_catalog_path();
    std::string out_dir;
    std::string mitigations;
    std::optional<std::uint64_t> seed;
    bool quiet = false;

    std::string scenario_path;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario");
    run_cmd->add_option("scenario", scenario_path)->required();

    std::string suite_dir;
    unsigned workers = sim::default_workers();
    auto* suite_cmd = app.add_subcommand("suite", "Paired off/on runs for every scenario in a directory");
    suite_cmd->add_option("dir", suite_dir)->required();
    suite_cmd->add_option("--workers", workers, "Worker threads (default MUMT_WORKERS or hardware)");

    std::string trace_path;
    std::string check_catalog;
    auto* check_cmd = app.add_subcommand("check", "Re-evaluate a recorded trace");
    check_cmd->add_option("trace", trace_path)->required();
    check_cmd->add_option("catalog_file", check_catalog, "Catalog (default: shipped catalog)");

    std::string assessment_path;
    std::string matrix_path = risk::default_matrix_path();
    auto* risk_cmd = app.add_subcommand("risk", "Hazard risk classification");
    risk_cmd->require_subcommand(1);
    auto* classify_cmd = risk_cmd->add_subcommand("classify", "Classify an assessment record");
    classify_cmd->add_option("assessment", assessment_path)->required();
    classify_cmd->add_option("--matrix", matrix_path, "Risk matrix configuration");

    auto* matrix_cmd = app.add_subcommand("trace-matrix", "Requirement traceability report");

    for (auto* sub : {run_cmd, suite_cmd, check_cmd, matrix_cmd}) {
        sub->add_option("--catalog", catalog_path, "Monitor catalog");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--mitigations", mitigations, "all | none | ids");
        sub->add_option("--seed", seed, "Root seed override");
        sub->add_flag("--quiet", quiet, "Only print the summary line");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (*run_cmd) {
            const auto catalog = monitors::Catalog::load(catalog_path);
            auto s = sim::load_scenario(scenario_path);
            s.validate(&catalog);
            sim::RunOptions o;
            o.catalog = &catalog;
            o.seed = seed;
            if (!mitigations.empty()) o.mitigations = sim::parse_mitigation_list(mitigations);
            if (o.mitigations) {
                s.mitigations = *o.mitigations;
                s.validate(&catalog);
            }
            const auto r = sim::run(s, o);
            if (!out_dir.empty()) {
                const auto dir = prepare_out(out_dir);
                sim::write_trace(r.trace, dir / (s.id + ".trace"));
                json v = monitors::verdicts_to_json(r.verdicts);
                json doc = {{"scenario", s.id},
                            {"seed", r.trace.header["seed"]},
                            {"trace_hash", r.summary.trace_hash},
                            {"config_hash", r.summary.config_hash},
                            {"interventions", r.summary.interventions},
                            {"pilot_frames", r.summary.pilot_frames},
                            {"final_source", r.summary.final_source},
                            {"verdicts", v}};
                write_json(dir / (s.id + ".verdicts.json"), doc);
            }
            if (!quiet) print_verdicts(r.verdicts, true);
            std::printf("%s frames=%lld interventions=%lld pilot_frames=%lld source=%s hazards=%zu requirements=%zu trace=%s\n",
                        s.id.c_str(), static_cast<long long>(r.summary.frames),
                        static_cast<long long>(r.summary.interventions), static_cast<long long>(r.summary.pilot_frames),
                        r.summary.final_source.c_str(), r.summary.hazard_violations, r.summary.requirement_violations,
                        r.summary.trace_hash.c_str());
            return exit_code(r.verdicts);
        }
        if (*suite_cmd) {
            const auto catalog = monitors::Catalog::load(catalog_path);
            std::optional<std::set<std::string>> base;
            if (!mitigations.empty()) base = sim::parse_mitigation_list(mitigations);
            const auto results = sim::suite(suite_dir, catalog, workers, base);
            int rc = 0;
            std::size_t mitigated = 0;
            json rows = json::array();
            std::printf("%-28s %-12s %-26s %8s %8s %8s\n", "scenario", "mitigation", "status", "off_tgt", "on_tgt",
                        "on_haz");
            for (const auto& p : results) {
                const bool ok = p.status == "mitigated" || p.status == "enforced-by-construction";
                if (ok) ++mitigated;
                if (p.on_hazard_violations > 0) rc = 2;
                else if (!ok && rc == 0) rc = 1;
                if (!quiet || !ok)
                    std::printf("%-28s %-12s %-26s %8zu %8zu %8zu\n", p.scenario.c_str(), p.mitigation.c_str(),
                                p.status.c_str(), p.off_target_violations, p.on_target_violations,
                                p.on_hazard_violations);
                rows.push_back({{"scenario", p.scenario},
                                {"mitigation", p.mitigation},
                                {"target", p.target},
                                {"status", p.status},
                                {"off_target_violations", p.off_target_violations},
                                {"on_target_violations", p.on_target_violations},
                                {"on_hazard_violations", p.on_hazard_violations},
                                {"off_hazard_violations", p.off_hazard_violations}});
            }
            std::printf("suite: %zu/%zu mitigated\n", mitigated, results.size());
            if (!out_dir.empty()) write_json(prepare_out(out_dir) / "suite.json", rows);
            return rc;
        }
        if (*check_cmd) {
            const auto catalog = monitors::Catalog::load(check_catalog.empty() ? catalog_path : check_catalog);
            std::ifstream f(trace_path);
            if (!f) throw ConfigError("cannot open trace " + trace_path);
            const auto t = monitors::Trace::read(f);
            const auto v = monitors::evaluate(t, catalog.monitors());
            if (!quiet) print_verdicts(v, true);
            const int rc = exit_code(v);
            std::printf("check: %s exit=%d\n", trace_path.c_str(), rc);
            if (!out_dir.empty())
                write_json(prepare_out(out_dir) / (fs::path(trace_path).stem().string() + ".verdicts.json"),
                           monitors::verdicts_to_json(v));
            return rc;
        }
        if (*classify_cmd) {
            const auto m = risk::RiskMatrixConfig::load(matrix_path);
            std::ifstream f(assessment_path);
            if (!f) throw ConfigError("cannot open assessment " + assessment_path);
            json a;
            try {
                a = json::parse(f);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("assessment: ") + e.what());
            }
            const auto c = risk::classify(a, m);
            std::printf("severity=%d probability=%s category=%s", c.severity, c.probability.c_str(), c.category.c_str());
            if (!c.note.empty()) std::printf(" note=\"%s\"", c.note.c_str());
            std::printf("\n");
            return 0;
        }
        if (*matrix_cmd) {
            const auto catalog = monitors::Catalog::load(catalog_path);
            const auto report = monitors::traceability_report(catalog);
            std::fputs(report.c_str(), stdout);
            if (!out_dir.empty()) {
                std::ofstream f(prepare_out(out_dir) / "trace-matrix.txt");
                f << report;
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
    return 4;
}
