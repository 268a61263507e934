#pragma once

#include "salab/families.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace salab {

inline constexpr int kSchemaVersion = 1;

/// Declarative family description: a kind tag plus its parameters.
struct FamilySpec {
    std::string kind;
    nlohmann::json params = nlohmann::json::object();

    bool operator==(const FamilySpec&) const = default;
};

struct OutputSpec {
    std::string kind; ///< "json" or "csv"
    std::string path;

    bool operator==(const OutputSpec&) const = default;
};

/// One experiment. The file format is JSON with a mandatory schema_version.
struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string id = "experiment";
    FamilySpec family;
    std::optional<FamilySpec> perturbation;
    std::vector<double> epsilon_grid;
    int grid_size = 65;
    double tol = 1e-10;
    int q_max = 12;
    double gap_floor = 0.5;
    std::uint64_t seed = 7;
    std::vector<OutputSpec> outputs;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates; errors carry the line/column or the field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);
std::string serialize_config(const ExperimentConfig& config);

/// Throws Config errors naming the offending field.
void validate(const ExperimentConfig& config);

GeneratorFamily build_family(const FamilySpec& spec);

/// Matrices in configs are arrays of rows; each entry is a number or [re, im].
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json matrix_to_json(const Matrix& m);
Complex complex_from_json(const nlohmann::json& j, const std::string& field);

} // namespace salab
