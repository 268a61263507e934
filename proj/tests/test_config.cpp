#include "salab/config.hpp"
#include "salab/errors.hpp"

#include "doctest.h"

#include <string>

using namespace salab;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    FAIL("expected a config error");
    return {};
}

const char* kValid = R"({
  "schema_version": 1,
  "id": "scan",
  "family": {"kind": "two_level", "params": {"delta": 0.2, "coupling": 1.0}},
  "epsilon_grid": [0.1, 0.05, 0.025],
  "grid_size": 65,
  "tol": 1e-9,
  "q_max": 6,
  "gap_floor": 0.4,
  "seed": 11,
  "outputs": [{"kind": "csv", "path": "out.csv"}]
})";

} // namespace

TEST_CASE("valid config parses with every field") {
    const ExperimentConfig c = parse_config(kValid);
    CHECK(c.id == "scan");
    CHECK(c.family.kind == "two_level");
    CHECK(c.epsilon_grid.size() == 3);
    CHECK(c.grid_size == 65);
    CHECK(c.tol == 1e-9);
    CHECK(c.q_max == 6);
    CHECK(c.gap_floor == 0.4);
    CHECK(c.seed == 11);
    REQUIRE(c.outputs.size() == 1);
    CHECK(c.outputs[0].kind == "csv");
    CHECK_FALSE(c.perturbation);
}

TEST_CASE("parse, serialize, parse is the identity") {
    const ExperimentConfig a = parse_config(kValid);
    const std::string text = serialize_config(a);
    const ExperimentConfig b = parse_config(text);
    CHECK(a == b);
    CHECK(serialize_config(b) == text);
    const ExperimentConfig m = parse_config(R"({"schema_version": 1, "family": {"kind": "zero", "params": {"dim": 2}},
        "perturbation": {"kind": "constant", "params": {"matrix": [[0, [1, 0.5]], [-1, 0]]}}})");
    CHECK(parse_config(serialize_config(m)) == m);
}

TEST_CASE("defaults for optional fields") {
    const ExperimentConfig c = parse_config(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"}})");
    CHECK(c.grid_size == 65);
    CHECK(c.epsilon_grid.empty());
    CHECK(c.outputs.empty());
}

TEST_CASE("syntax errors report line and column") {
    const std::string msg = error_of("{\n  \"schema_version\": 1,\n  \"family\" {}\n}");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
}

TEST_CASE("semantic errors name the field") {
    CHECK(error_of(R"({"family": {"kind": "zero", "params": {"dim": 2}}})").find("schema_version") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 2, "family": {"kind": "nilpotent_example"}})").find("schema_version") !=
          std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"}, "epsilon_grid": [0.1, 0.2]})")
              .find("epsilon_grid/1") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"}, "epsilon_grid": [0.1, 0.1]})")
              .find("epsilon_grid/1") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"}, "epsilon_grid": [1.5]})")
              .find("epsilon_grid/0") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"}, "grid_size": 64})")
              .find("grid_size") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"}, "grid_size": 31})")
              .find("grid_size") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "spline"}})").find("family/kind") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "two_level", "params": {}}})")
              .find("family/params/delta") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "constant", "params": {"matrix": [[1, 2], [3]]}}})")
              .find("family/params/matrix/1") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"}, "tol": "small"})")
              .find("tol") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"},
        "outputs": [{"kind": "xml", "path": "a"}]})")
              .find("outputs/0/kind") != std::string::npos);
    CHECK(error_of(R"({"schema_version": 1, "family": {"kind": "nilpotent_example"},
        "perturbation": {"kind": "zero", "params": {"dim": 3}}})")
              .find("perturbation") != std::string::npos);
    CHECK(error_of("[1, 2]").find("(root)") != std::string::npos);
}

TEST_CASE("families build from specs") {
    CHECK(build_family({"intro_example", {{"a", 1.0}, {"k", -1.0}}}).dim() == 3);
    CHECK(build_family({"nilpotent_example", nlohmann::json::object()}).dim() == 2);
    CHECK(build_family({"two_level", {{"delta", 0.2}}}).dim() == 2);
    CHECK(build_family({"zero", {{"dim", 4}}}).dim() == 4);
    const GeneratorFamily p = build_family({"polynomial", {{"coeffs", {{{0, 1}, {0, 0}}, {{1, 0}, {0, 1}}}}}});
    CHECK(std::abs(p.eval(0.5)(0, 0) - 0.5) <= 1e-15);
    const GeneratorFamily r = build_family(
        {"rotated_constant", {{"h0", {{1, 0}, {0, 0}}}, {"l", {{0, {0, -1}}, {{0, 1}, 0}}}}});
    CHECK(r.dim() == 2);
    const GeneratorFamily c = build_family({"constant", {{"matrix", {{{0, 1}, 0}, {0, 0}}}}});
    CHECK(c.eval(0.3)(0, 0) == Complex(0.0, 1.0));
    CHECK_THROWS_AS(build_family({"rotated_constant", {{"h0", {{1}}}, {"l", {{0, 1}, {1, 0}}}}}), Error);
}

TEST_CASE("matrix json round trip") {
    Matrix m(2, 2);
    m << Complex(1, 2), 3, Complex(0, -1), 0.25;
    CHECK(matrix_from_json(matrix_to_json(m), "m") == m);
    CHECK_THROWS_AS(complex_from_json("x", "z"), Error);
}

TEST_CASE("missing config file") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("unknown top-level fields are rejected") {
    try {
        salab::parse_config(R"({"schema_version": 1, "family": {"kind": "zero", "params": {"dim": 2}}, "bogus": 1})");
        FAIL("expected a config error");
    } catch (const salab::Error& e) {
        CHECK(e.kind() == salab::ErrorKind::Config);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
}
