#include "salab/acceptance.hpp"
#include "salab/config.hpp"
#include "salab/errors.hpp"
#include "salab/fitting.hpp"
#include "salab/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        salab::fail(salab::ErrorKind::Config, "cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const nlohmann::json& report, const salab::ExperimentConfig& config, bool csv) {
    salab::write_outputs(config, report);
    if (csv) {
        std::cout << (report.value("command", "") == "superadiabatic" ? salab::scan_csv(report)
                                                                       : salab::records_csv(report));
    } else {
        std::cout << report.dump(2) << "\n";
    }
}

void error_line(const std::string& kind, const std::string& message) {
    nlohmann::json j = {{"error", kind}, {"message", message}};
    std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superadiabatic evolution lab"};
    app.require_subcommand(1);

    double tol = 0.0;
    std::uint64_t seed = 0;
    app.add_option("--tol", tol, "integrator tolerance, overrides config and SALAB_TOL");
    app.add_option("--seed", seed, "random seed, overrides config");

    std::string config_path;
    bool csv = false;
    std::vector<CLI::App*> runners;
    for (const char* name : {"decompose", "evolve", "superadiabatic", "nilpotent", "example"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("config", config_path, "experiment config (JSON)")->required();
        sub->add_flag("--csv", csv, "print CSV instead of the JSON report");
        runners.push_back(sub);
    }
    runners[0]->description("eigenvalue groups, gaps and omega over the time grid");
    runners[1]->description("propagate U(1, 0) for each epsilon");
    runners[2]->description("superadiabatic ladder, q_star and error scan");
    runners[3]->description("nilpotent growth fit and boundedness verdict");
    runners[4]->description("introductory 3x3 model against its closed form");

    auto* fit_cmd = app.add_subcommand("fit", "fit a growth law to epsilon,value[,log_scale] rows");
    std::string series_path;
    std::string model = "exp_inverse_eps";
    fit_cmd->add_option("series", series_path, "CSV file, '-' for stdin")->required();
    fit_cmd->add_option("--model", model, "factorial_geometric | exp_inverse_eps | stretched_exp | power_law");

    auto* acc_cmd = app.add_subcommand("acceptance", "run the acceptance criteria");
    std::vector<int> ids;
    bool as_json = false;
    acc_cmd->add_option("--only", ids, "criterion ids (1..9), comma separated")->delimiter(',')->check(CLI::Range(1, 9));
    acc_cmd->add_flag("--json", as_json, "print a JSON array instead of PASS/FAIL lines");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        salab::RunOptions options = salab::options_from_environment();
        if (app.count("--tol")) {
            if (!(tol > 0.0 && tol < 1.0)) {
                salab::fail(salab::ErrorKind::Config, "--tol must lie in (0, 1)");
            }
            options.tol = tol;
        }

        if (fit_cmd->parsed()) {
            const std::string text = series_path == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                                        : read_file(series_path);
            const auto series = salab::read_series_csv(text);
            const auto m = salab::parse_growth_model(model);
            salab::GrowthFit f;
            if (m == salab::GrowthModel::FactorialGeometric) {
                // Rows are (epsilon, delta_q) at q = 1, 2, ... for one epsilon.
                std::vector<double> deltas;
                for (const auto& p : series) {
                    deltas.push_back(std::exp(p.log()));
                }
                f = salab::fit_factorial(deltas, series.empty() ? 0.0 : series.front().epsilon);
            } else {
                f = salab::fit(series, m);
            }
            std::cout << salab::sanitize(f.to_json()).dump(2) << "\n";
            return 0;
        }

        if (acc_cmd->parsed()) {
            const auto results = salab::run_acceptance(ids);
            bool all = true;
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& r : results) {
                all = all && r.passed;
                if (as_json) {
                    arr.push_back(r.to_json());
                } else {
                    std::cout << r.line() << std::endl;
                }
            }
            if (as_json) {
                std::cout << arr.dump(2) << "\n";
            }
            return all ? 0 : 1;
        }

        salab::ExperimentConfig config = salab::load_config(config_path);
        if (app.count("--seed")) {
            config.seed = seed;
        }
        const std::string cmd = app.get_subcommands().front()->get_name();
        nlohmann::json report;
        if (cmd == "decompose") {
            report = salab::run_decompose(config, options);
        } else if (cmd == "evolve") {
            report = salab::run_evolve(config, options);
        } else if (cmd == "superadiabatic") {
            report = salab::run_superadiabatic_scan(config, options);
        } else if (cmd == "nilpotent") {
            report = salab::run_nilpotent_scan(config, options);
        } else {
            report = salab::run_intro_example(config, options);
        }
        emit(report, config, csv);
        return 0;
    } catch (const salab::Error& e) {
        error_line(std::string(salab::to_string(e.kind())), e.what());
        return e.kind() == salab::ErrorKind::Config ? kExitConfig : kExitNumerical;
    } catch (const std::exception& e) {
        error_line("Internal", e.what());
        return kExitNumerical;
    }
}
