#pragma once

#include "json.hpp"

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace salab {

enum class GrowthModel {
    FactorialGeometric, ///< b q! (eps / (e g))^q, fitted over q at fixed eps
    ExpInverseEps,      ///< C exp(-kappa / eps)
    StretchedExp,       ///< c eps^{-p} exp(d / eps^beta)
    PowerLaw,           ///< c eps^{-p}
};

std::string_view to_string(GrowthModel model);
GrowthModel parse_growth_model(std::string_view tag);

/// One observation v = value * exp(log_scale) at a given epsilon.
struct SeriesPoint {
    double epsilon = 0.0;
    double value = 0.0;
    double log_scale = 0.0;

    double log() const;
};

struct GrowthFit {
    GrowthModel model = GrowthModel::ExpInverseEps;
    std::map<std::string, double> params;
    double r_squared = 0.0;
    bool bounded = false; ///< set by the growth helpers when the data show no growth
    int points = 0;

    double param(const std::string& name) const;
    nlohmann::json to_json() const;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
LinearFit linear_regression(std::span<const double> x, std::span<const double> y);

/// Least squares in the log domain. StretchedExp scans beta over
/// [0.05, 0.95] in steps of 0.01 and refines by golden section; with five or
/// more points it also carries the power prefactor eps^{-p}.
GrowthFit fit(std::span<const SeriesPoint> series, GrowthModel model);

/// Fits deltas[q] (q = 1, 2, ...) at fixed eps to b q! (eps / (e g))^q.
GrowthFit fit_factorial(std::span<const double> deltas, double epsilon, int first_q = 1);

/// StretchedExp fit that first checks for boundedness: when the magnitudes
/// vary by less than 10% across the grid, returns d = 0 with bounded = true.
GrowthFit fit_growth_law(std::span<const SeriesPoint> series);

} // namespace salab
