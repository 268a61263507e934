#pragma once

#include "salab/config.hpp"
#include "salab/fitting.hpp"

#include "json.hpp"

#include <functional>
#include <string>
#include <vector>

namespace salab {

inline constexpr int kReportSchemaVersion = 1;

/// Runtime knobs that are not part of an experiment. Reports never depend on
/// the worker count.
struct RunOptions {
    int workers = 1;
    std::optional<double> tol; ///< overrides config.tol when set
};

/// RunOptions from SALAB_WORKERS and SALAB_TOL; unset variables keep defaults.
RunOptions options_from_environment();

/// Runs fn(0..count-1) on up to `workers` threads and returns the results in
/// index order. The first exception (lowest index) is rethrown.
template <typename T>
std::vector<T> parallel_map(int count, int workers, const std::function<T(int)>& fn);

nlohmann::json run_decompose(const ExperimentConfig& config, const RunOptions& options = {});
nlohmann::json run_evolve(const ExperimentConfig& config, const RunOptions& options = {});
nlohmann::json run_superadiabatic_scan(const ExperimentConfig& config, const RunOptions& options = {});
nlohmann::json run_nilpotent_scan(const ExperimentConfig& config, const RunOptions& options = {});
nlohmann::json run_intro_example(const ExperimentConfig& config, const RunOptions& options = {});

/// CSV view of a superadiabatic report:
/// epsilon,q,delta,error_q0,error_qstar,kappa_fit_r2 with %.17g numbers.
std::string scan_csv(const nlohmann::json& report);

/// Generic CSV of a report's records (flat numeric and string fields only).
std::string records_csv(const nlohmann::json& report);

/// Writes every output listed in the config. CSV outputs of a superadiabatic
/// report use scan_csv, others use records_csv.
void write_outputs(const ExperimentConfig& config, const nlohmann::json& report);

/// Reads "epsilon,value[,log_scale]" rows (optional header) for `fit`.
std::vector<SeriesPoint> read_series_csv(const std::string& text);

/// Replaces non-finite numbers by null so reports stay valid JSON.
nlohmann::json sanitize(nlohmann::json j);

std::string format_number(double x);

} // namespace salab

#include "salab/harness_impl.hpp"
