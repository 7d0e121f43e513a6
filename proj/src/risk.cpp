#include "mumt/risk.hpp"

#include <cmath>
#include <fstream>

namespace mumt::risk {

std::string scheme_name(Scheme s) { return s == Scheme::mil882e ? "mil882e" : "nasa_s3001"; }

Scheme scheme_from_name(const std::string& n) {
    if (n == "mil882e") return Scheme::mil882e;
    if (n == "nasa_s3001") return Scheme::nasa_s3001;
    throw ConfigError("unknown probability scheme '" + n + "'");
}

Environmental environmental_from_name(const std::string& n) {
    if (n == "irreversible_significant") return Environmental::irreversible_significant;
    if (n == "reversible_significant") return Environmental::reversible_significant;
    if (n == "reversible_moderate") return Environmental::reversible_moderate;
    if (n == "minimal") return Environmental::minimal;
    throw ConfigError("unknown environmental impact '" + n + "'");
}

void SeverityAssessment::validate() const {
    if (!(monetary_loss >= 0.0) || !std::isfinite(monetary_loss)) throw ConfigError("monetary_loss must be >= 0");
}

int severity_level(const SeverityAssessment& s) {
    if (s.death_or_total_disability || s.environmental == Environmental::irreversible_significant ||
        s.monetary_loss >= 10e6)
        return 1;
    if (s.hospitalization_3plus || s.environmental == Environmental::reversible_significant || s.monetary_loss >= 1e6)
        return 2;
    if (s.lost_workday || s.environmental == Environmental::reversible_moderate || s.monetary_loss >= 100e3) return 3;
    return 4;
}

NasaLevel nasa_probability_level(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probability must be in [0, 1]");
    if (p > 0.8) return {5, ""};
    if (p > 0.6) return {4, ""};
    if (p > 0.4) return {3, ""};
    if (p > 0.2) return {2, ""};
    if (p > 0.0) return {1, ""};
    return {1, "not likely: p = 0 is below the lowest band"};
}

char mil_probability_level(char letter) {
    if (letter < 'A' || letter > 'F') throw ConfigError(std::string("MIL-STD-882E level must be A-F, got '") + letter + "'");
    return letter;
}

std::string mil_probability_description(char letter) {
    switch (mil_probability_level(letter)) {
        case 'A': return "Frequent";
        case 'B': return "Probable";
        case 'C': return "Occasional";
        case 'D': return "Remote";
        case 'E': return "Improbable";
        default: return "Eliminated (incapable of occurrence)";
    }
}

void ProbabilityAssessment::validate() const {
    if (mil_level.has_value() == nasa_probability.has_value())
        throw ConfigError("probability assessment needs exactly one of mil_level / nasa_probability");
    if (scheme == Scheme::mil882e && !mil_level) throw ConfigError("mil882e assessment needs mil_level");
    if (scheme == Scheme::nasa_s3001 && !nasa_probability) throw ConfigError("nasa_s3001 assessment needs nasa_probability");
    if (mil_level) mil_probability_level(*mil_level);
    if (nasa_probability) nasa_probability_level(*nasa_probability);
}

std::string ProbabilityAssessment::level_key() const {
    validate();
    if (mil_level) return std::string(1, *mil_level);
    return std::to_string(nasa_probability_level(*nasa_probability).level);
}

RiskMatrixConfig RiskMatrixConfig::from_json(const json& j) {
    RiskMatrixConfig m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const Scheme s = scheme_from_name(it.key());
        Grid g;
        for (const auto& lv : it->at("probability_levels")) g.probability_levels.push_back(lv.get<std::string>());
        if (g.probability_levels.empty()) throw ConfigError(it.key() + ": no probability levels");
        const auto& cells = it->at("cells");
        for (int sev = 1; sev <= 4; ++sev) {
            const auto key = std::to_string(sev);
            if (!cells.contains(key)) throw ConfigError(it.key() + ": missing severity row " + key);
            for (const auto& lv : g.probability_levels) {
                if (!cells[key].contains(lv))
                    throw ConfigError(it.key() + ": missing cell (" + key + ", " + lv + ")");
                g.cells[{sev, lv}] = cells[key][lv].get<std::string>();
            }
        }
        m.grids[s] = std::move(g);
    }
    if (m.grids.empty()) throw ConfigError("risk matrix config has no schemes");
    return m;
}

RiskMatrixConfig RiskMatrixConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open risk matrix " + path);
    try {
        return from_json(json::parse(f));
    } catch (const json::exception& e) {
        throw ConfigError("risk matrix " + path + ": " + e.what());
    }
}

std::string default_matrix_path() { return std::string(MUMT_DATA_DIR) + "/risk_matrix.json"; }

std::string risk_category(int severity, const std::string& key, Scheme scheme, const RiskMatrixConfig& m) {
    const auto g = m.grids.find(scheme);
    if (g == m.grids.end()) throw ConfigError("risk matrix has no " + scheme_name(scheme) + " grid");
    const auto c = g->second.cells.find({severity, key});
    if (c == g->second.cells.end())
        throw ConfigError("risk matrix has no cell (" + std::to_string(severity) + ", " + key + ")");
    return c->second;
}

Classification classify(const json& a, const RiskMatrixConfig& m) {
    try {
        SeverityAssessment s;
        const auto& sj = a.at("severity");
        s.death_or_total_disability = sj.value("death_or_total_disability", false);
        s.hospitalization_3plus = sj.value("hospitalization_3plus", false);
        s.lost_workday = sj.value("lost_workday", false);
        s.environmental = environmental_from_name(sj.value("environmental", std::string("minimal")));
        s.monetary_loss = sj.value("monetary_loss", 0.0);
        s.validate();

        ProbabilityAssessment p;
        const auto& pj = a.at("probability");
        p.scheme = scheme_from_name(pj.at("scheme").get<std::string>());
        if (pj.contains("mil_level")) {
            const auto l = pj["mil_level"].get<std::string>();
            if (l.size() != 1) throw ConfigError("mil_level must be a single letter");
            p.mil_level = l[0];
        }
        if (pj.contains("nasa_probability")) p.nasa_probability = pj["nasa_probability"].get<double>();
        p.validate();

        Classification c;
        c.severity = severity_level(s);
        c.probability = p.level_key();
        if (p.nasa_probability) c.note = nasa_probability_level(*p.nasa_probability).note;
        else c.note = mil_probability_description(*p.mil_level);
        c.category = risk_category(c.severity, c.probability, p.scheme, m);
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("assessment: ") + e.what());
    }
}

}  // namespace mumt::risk
