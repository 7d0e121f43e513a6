#pragma once

// Hazard risk classification: severity level, probability level and a
// configurable matrix lookup (MIL-STD-882E and NASA S3001 schemes).

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mumt/serialize.hpp"

namespace mumt::risk {

enum class Scheme { mil882e, nasa_s3001 };
std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& n);

enum class Environmental { irreversible_significant, reversible_significant, reversible_moderate, minimal };
Environmental environmental_from_name(const std::string& n);

struct SeverityAssessment {
    bool death_or_total_disability = false;
    bool hospitalization_3plus = false;  // three or more personnel
    bool lost_workday = false;
    Environmental environmental = Environmental::minimal;
    double monetary_loss = 0.0;  // currency units

    void validate() const;
};

/// 1 catastrophic .. 4 negligible; the most severe criterion wins.
int severity_level(const SeverityAssessment& s);

struct NasaLevel {
    int level = 1;
    std::string note;
};

/// p in [0, 1]; band edges belong to the lower band; p == 0 maps to 1 with a note.
NasaLevel nasa_probability_level(double p);

/// Validates and returns the MIL-STD-882E letter (A frequent .. F eliminated).
char mil_probability_level(char letter);
std::string mil_probability_description(char letter);

struct ProbabilityAssessment {
    Scheme scheme = Scheme::mil882e;
    std::optional<char> mil_level;
    std::optional<double> nasa_probability;

    void validate() const;
    /// Column key in the matrix: the letter, or the NASA level as a digit.
    std::string level_key() const;
};

struct RiskMatrixConfig {
    struct Grid {
        std::vector<std::string> probability_levels;
        std::map<std::pair<int, std::string>, std::string> cells;
    };
    std::map<Scheme, Grid> grids;

    /// Throws ConfigError unless every (severity 1..4, probability level) cell is present.
    static RiskMatrixConfig from_json(const json& j);
    static RiskMatrixConfig load(const std::string& path);
};

std::string default_matrix_path();

std::string risk_category(int severity, const std::string& probability_key, Scheme scheme, const RiskMatrixConfig& m);

struct Classification {
    int severity = 4;
    std::string probability;
    std::string note;
    std::string category;
};

/// Reads {"severity":{..},"probability":{"scheme":..,"mil_level"|"nasa_probability":..}}.
Classification classify(const json& assessment, const RiskMatrixConfig& m);

}  // namespace mumt::risk
