#pragma once

#include "json.hpp"

#include <string>
#include <vector>

namespace salab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;

    nlohmann::json to_json() const;
    /// "PASS [3] name: detail (1.2 s)"
    std::string line() const;
};

inline constexpr int kCriterionCount = 9;

/// Runs one criterion (1..9). Numerical failures inside a check are reported
/// as a failed criterion, not thrown.
CriterionResult run_criterion(int id);

/// Runs the given criteria in order; empty means all.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {});

} // namespace salab
