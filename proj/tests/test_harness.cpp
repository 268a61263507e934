#include "salab/errors.hpp"
#include "salab/harness.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace salab;
using nlohmann::json;

namespace {

std::string data(const std::string& name) {
    const char* dir = std::getenv("SALAB_TEST_DATA");
    return std::string(dir ? dir : "tests/data") + "/" + name;
}

ExperimentConfig config(const std::string& text) {
    return parse_config(text);
}

} // namespace

TEST_CASE("decompose report on the intro model") {
    const json r = run_decompose(load_config(data("intro_decompose.json")));
    CHECK(r["schema_version"] == kReportSchemaVersion);
    CHECK(r["summary"]["group_count"] == 2);
    CHECK(r["summary"]["multiplicities"] == json::array({2, 1}));
    CHECK(r["summary"]["min_gap"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r["records"].size() == 33);
    CHECK(r["records"][0]["omega"].get<double>() <= 1e-12);
}

TEST_CASE("decompose report on two level and zero families") {
    const json tl = run_decompose(config(
        R"({"schema_version": 1, "family": {"kind": "two_level", "params": {"delta": 0.2, "coupling": 1.0}}})"));
    CHECK(tl["summary"]["min_gap"].get<double>() >= 1.0 - 1e-12);
    const json z = run_decompose(config(R"({"schema_version": 1, "family": {"kind": "zero", "params": {"dim": 2}}})"));
    CHECK(z["summary"]["group_count"] == 1);
    CHECK(z["summary"]["min_gap"].is_null());
    CHECK(z["records"][3]["groups"][0]["nilpotent_norm"].get<double>() == 0.0);
}

TEST_CASE("decompose fails fast on a closing gap and names the time") {
    try {
        run_decompose(load_config(data("closing_gap.json")));
        FAIL("expected GapViolation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::GapViolation);
        CHECK(std::string(e.what()).find("t = ") != std::string::npos);
    }
}

TEST_CASE("superadiabatic scan of a constant family converges trivially") {
    const json r = run_superadiabatic_scan(load_config(data("constant_scan.json")));
    for (const auto& rec : r["records"]) {
        CHECK(rec["trivially_converged"] == true);
        CHECK(rec["q_star"] == 0);
        CHECK(rec["deltas"] == json::array({0.0}));
        CHECK(rec["error_q0"].get<double>() <= 1e-8);
    }
    CHECK(r["fits"]["delta_decay"].is_null());
}

TEST_CASE("gap closing becomes a structured row") {
    const json r = run_superadiabatic_scan(config(R"({"schema_version": 1,
        "family": {"kind": "two_level", "params": {"delta": 0.2, "coupling": 0.6}},
        "epsilon_grid": [1.0, 0.05], "grid_size": 129, "q_max": 3})"));
    REQUIRE(r["records"].size() == 2);
    CHECK(r["records"][0]["status"] == "gap_closed");
    CHECK(r["records"][0]["error_kind"] == "GapClosed");
    CHECK(r["records"][1]["status"] == "ok");
    CHECK(r["largest_working_epsilon"].get<double>() == 0.05);
    const std::string csv = scan_csv(r);
    CHECK(csv.find("\n1,-1,nan,nan,nan,") != std::string::npos);
}

TEST_CASE("two level scan: fits, csv and determinism") {
    const ExperimentConfig c = load_config(data("two_level_scan.json"));
    const json a = run_superadiabatic_scan(c);
    CHECK(a["fits"]["delta_decay"]["r_squared"].get<double>() >= 0.97);
    CHECK(a["fits"]["delta_decay"]["params"]["kappa"].get<double>() > 0.0);
    RunOptions two;
    two.workers = 2;
    const json b = run_superadiabatic_scan(c, two);
    CHECK(a.dump() == b.dump());
    const std::string csv = scan_csv(a);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "epsilon,q,delta,error_q0,error_qstar,kappa_fit_r2");
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("0.10000000000000001,0,", 0) == 0);
    CHECK(csv.find('"') == std::string::npos);
}

TEST_CASE("nilpotent scans") {
    const json ex = run_nilpotent_scan(load_config(data("nilpotent_example.json")));
    CHECK(ex["verdict"] == "unbounded");
    CHECK(std::abs(ex["fits"]["growth"]["params"]["beta"].get<double>() - 0.5) <= 0.03);
    for (const auto& rec : ex["records"]) {
        CHECK(rec["closed_form_rel_error"].get<double>() <= 1e-7);
    }
    const json zero = run_nilpotent_scan(load_config(data("zero_nilpotent.json")));
    CHECK(zero["verdict"] == "bounded");
    CHECK(zero["fits"]["growth"]["bounded"] == true);
    CHECK(zero["fits"]["growth"]["params"]["d"].get<double>() == 0.0);
    const json cn = run_nilpotent_scan(load_config(data("constant_nilpotent.json")));
    CHECK(cn["fits"]["power_law"]["params"]["p"].get<double>() == doctest::Approx(1.0).epsilon(0.05));
    CHECK(cn["records"][0]["closed_form_rel_error"].is_null());
}

TEST_CASE("intro example report") {
    const json r = run_intro_example(load_config(data("intro_example.json")));
    REQUIRE(r["records"].size() == 3);
    const json& last = r["records"][2];
    CHECK(last["closed_form_transition"]["log_scale"].get<double>() == doctest::Approx(10.0));
    CHECK(last["transition_rel_error"].get<double>() <= 0.05);
    for (const auto& c : last["intertwining"]) {
        CHECK(c["starred_residual"].get<double>() <= 1e-6);
    }
    CHECK(std::abs(r["fits"]["transition_exponent"]["slope"].get<double>() - 1.0) <= 0.05);
    CHECK_THROWS_AS(run_intro_example(load_config(data("nilpotent_example.json"))), Error);
}

TEST_CASE("evolve report") {
    const json r = run_evolve(config(R"({"schema_version": 1,
        "family": {"kind": "constant", "params": {"matrix": [[[0, 0.5], 0], [0, 1]]}}, "epsilon_grid": [0.1, 0.05]})"));
    REQUIRE(r["records"].size() == 2);
    CHECK(r["records"][0]["log_scale"].get<double>() == doctest::Approx(5.0));
    CHECK(r["records"][1]["log_scale"].get<double>() == doctest::Approx(10.0));
    CHECK(r["records"][1]["norm"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(run_evolve(config(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"}})")), Error);
}

TEST_CASE("outputs are written") {
    ExperimentConfig c = load_config(data("intro_decompose.json"));
    const std::string base = "harness_test_output";
    c.outputs = {{"json", base + ".json"}, {"csv", base + ".csv"}};
    const json r = run_decompose(c);
    write_outputs(c, r);
    std::ifstream j(base + ".json");
    CHECK(json::parse(j) == r);
    std::ifstream csv(base + ".csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header.find("group_count") != std::string::npos);
    std::remove((base + ".json").c_str());
    std::remove((base + ".csv").c_str());
}

TEST_CASE("worker pool keeps order and rethrows the first failure") {
    const auto out = parallel_map<int>(10, 3, [](int i) { return i * i; });
    for (int i = 0; i < 10; ++i) {
        CHECK(out[static_cast<std::size_t>(i)] == i * i);
    }
    CHECK_THROWS_WITH(parallel_map<int>(5, 2,
                                        [](int i) -> int {
                                            if (i >= 2) {
                                                throw std::runtime_error("item " + std::to_string(i));
                                            }
                                            return i;
                                        }),
                      "item 2");
    CHECK(parallel_map<int>(0, 4, [](int) { return 1; }).empty());
}

TEST_CASE("environment overrides") {
    ::setenv("SALAB_WORKERS", "3", 1);
    ::setenv("SALAB_TOL", "1e-8", 1);
    const RunOptions o = options_from_environment();
    CHECK(o.workers == 3);
    REQUIRE(o.tol);
    CHECK(*o.tol == 1e-8);
    ::setenv("SALAB_WORKERS", "zero", 1);
    CHECK_THROWS_AS(options_from_environment(), Error);
    ::unsetenv("SALAB_WORKERS");
    ::unsetenv("SALAB_TOL");
    CHECK_FALSE(options_from_environment().tol);
}

TEST_CASE("series csv reader and number format") {
    const auto s = read_series_csv("epsilon,value,log_scale\n0.1,2.5,-3\n\n0.05,1e-3\n");
    REQUIRE(s.size() == 2);
    CHECK(s[0].log_scale == -3.0);
    CHECK(s[1].value == 1e-3);
    CHECK_THROWS_AS(read_series_csv("0.1,2\nx,y\n"), Error);
    CHECK_THROWS_AS(read_series_csv("0.1\n"), Error);
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(sanitize(json{{"x", std::numeric_limits<double>::infinity()}})["x"].is_null());
}
