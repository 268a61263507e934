#include "salab/config.hpp"

#include "salab/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace salab {

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
    fail(ErrorKind::Config, field + ": " + message);
}

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <typename T>
T get(const nlohmann::json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) {
        config_error(path + key, "missing field");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        config_error(path + key, "wrong type");
    }
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback, const std::string& path) {
    return j.contains(key) ? get<T>(j, key, path) : fallback;
}

FamilySpec family_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) {
        config_error(path, "expected an object");
    }
    FamilySpec f;
    f.kind = get<std::string>(j, "kind", path + "/");
    if (j.contains("params")) {
        if (!j.at("params").is_object()) {
            config_error(path + "/params", "expected an object");
        }
        f.params = j.at("params");
    }
    return f;
}

nlohmann::json family_to_json(const FamilySpec& f) {
    return {{"kind", f.kind}, {"params", f.params}};
}

} // namespace

Complex complex_from_json(const nlohmann::json& j, const std::string& field) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    config_error(field, "expected a number or [re, im]");
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) {
        config_error(field, "expected a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    Matrix m(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
            config_error(field + "/" + std::to_string(r), "rows must have length " + std::to_string(rows));
        }
        for (Eigen::Index c = 0; c < rows; ++c) {
            m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)],
                                        field + "/" + std::to_string(r) + "/" + std::to_string(c));
        }
    }
    return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(row);
    }
    return rows;
}

GeneratorFamily build_family(const FamilySpec& spec) {
    const auto& p = spec.params;
    const std::string path = "family/params/";
    if (spec.kind == "intro_example") {
        const Complex a = complex_from_json(p.value("a", nlohmann::json(1.0)), path + "a");
        const Complex k = complex_from_json(p.value("k", nlohmann::json(-1.0)), path + "k");
        if (a == 0.0 || k == 0.0) {
            config_error(path + "a", "a and k must be nonzero");
        }
        return intro_example(a, k);
    }
    if (spec.kind == "nilpotent_example") {
        return nilpotent_example();
    }
    if (spec.kind == "two_level") {
        const double delta = get<double>(p, "delta", path);
        const double coupling = get_or<double>(p, "coupling", 1.0, path);
        if (!(delta > 0.0)) {
            config_error(path + "delta", "must be positive");
        }
        return two_level(delta, coupling);
    }
    if (spec.kind == "polynomial") {
        if (!p.contains("coeffs") || !p.at("coeffs").is_array() || p.at("coeffs").empty()) {
            config_error(path + "coeffs", "expected a non-empty array of matrices");
        }
        std::vector<Matrix> coeffs;
        for (std::size_t i = 0; i < p.at("coeffs").size(); ++i) {
            coeffs.push_back(matrix_from_json(p.at("coeffs")[i], path + "coeffs/" + std::to_string(i)));
        }
        return polynomial_family(std::move(coeffs));
    }
    if (spec.kind == "rotated_constant") {
        const Matrix h0 = matrix_from_json(p.contains("h0") ? p.at("h0") : nlohmann::json(), path + "h0");
        const Matrix l = matrix_from_json(p.contains("l") ? p.at("l") : nlohmann::json(), path + "l");
        if (h0.rows() != l.rows()) {
            config_error(path + "l", "dimension differs from h0");
        }
        return rotated_constant(h0, l);
    }
    if (spec.kind == "constant") {
        return constant_family(matrix_from_json(p.contains("matrix") ? p.at("matrix") : nlohmann::json(),
                                                path + "matrix"));
    }
    if (spec.kind == "zero") {
        const int dim = get<int>(p, "dim", path);
        if (dim <= 0) {
            config_error(path + "dim", "must be positive");
        }
        return zero_family(dim);
    }
    config_error("family/kind", "unknown family kind '" + spec.kind + "'");
}

void validate(const ExperimentConfig& c) {
    if (c.schema_version != kSchemaVersion) {
        config_error("schema_version", "unsupported version " + std::to_string(c.schema_version));
    }
    for (std::size_t i = 0; i < c.epsilon_grid.size(); ++i) {
        const double e = c.epsilon_grid[i];
        if (!(e > 0.0 && e <= 1.0)) {
            config_error("epsilon_grid/" + std::to_string(i), "must lie in (0, 1]");
        }
        if (i > 0 && !(e < c.epsilon_grid[i - 1])) {
            config_error("epsilon_grid/" + std::to_string(i), "values must be distinct and descending");
        }
    }
    if (c.grid_size < 33 || c.grid_size % 2 == 0) {
        config_error("grid_size", "must be odd and at least 33");
    }
    if (!(c.tol > 0.0 && c.tol < 1.0)) {
        config_error("tol", "must lie in (0, 1)");
    }
    if (c.q_max < 0) {
        config_error("q_max", "must be non-negative");
    }
    if (!(c.gap_floor > 0.0)) {
        config_error("gap_floor", "must be positive");
    }
    for (std::size_t i = 0; i < c.outputs.size(); ++i) {
        if (c.outputs[i].kind != "json" && c.outputs[i].kind != "csv") {
            config_error("outputs/" + std::to_string(i) + "/kind", "must be 'json' or 'csv'");
        }
    }
    // Building the family checks kind and parameters.
    const GeneratorFamily f = build_family(c.family);
    if (c.perturbation && build_family(*c.perturbation).dim() != f.dim()) {
        config_error("perturbation", "dimension differs from family");
    }
}

ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::Config, "parse error at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
    }
    if (!j.is_object()) {
        config_error("(root)", "expected an object");
    }
    static const std::set<std::string> known = {"schema_version", "id",     "family",    "perturbation",
                                                "epsilon_grid",   "grid_size", "tol",    "q_max",
                                                "gap_floor",      "seed",   "outputs"};
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) {
            config_error(item.key(), "unknown field");
        }
    }
    ExperimentConfig c;
    c.schema_version = get<int>(j, "schema_version", "");
    c.id = get_or<std::string>(j, "id", c.id, "");
    if (!j.contains("family")) {
        config_error("family", "missing field");
    }
    c.family = family_from_json(j.at("family"), "family");
    if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
        c.perturbation = family_from_json(j.at("perturbation"), "perturbation");
    }
    c.epsilon_grid = get_or<std::vector<double>>(j, "epsilon_grid", {}, "");
    c.grid_size = get_or<int>(j, "grid_size", c.grid_size, "");
    c.tol = get_or<double>(j, "tol", c.tol, "");
    c.q_max = get_or<int>(j, "q_max", c.q_max, "");
    c.gap_floor = get_or<double>(j, "gap_floor", c.gap_floor, "");
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "");
    if (j.contains("outputs")) {
        if (!j.at("outputs").is_array()) {
            config_error("outputs", "expected an array");
        }
        for (std::size_t i = 0; i < j.at("outputs").size(); ++i) {
            const auto& o = j.at("outputs")[i];
            const std::string p = "outputs/" + std::to_string(i) + "/";
            c.outputs.push_back({get<std::string>(o, "kind", p), get<std::string>(o, "path", p)});
        }
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::Config, "cannot open config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["schema_version"] = c.schema_version;
    j["id"] = c.id;
    j["family"] = family_to_json(c.family);
    if (c.perturbation) {
        j["perturbation"] = family_to_json(*c.perturbation);
    }
    j["epsilon_grid"] = c.epsilon_grid;
    j["grid_size"] = c.grid_size;
    j["tol"] = c.tol;
    j["q_max"] = c.q_max;
    j["gap_floor"] = c.gap_floor;
    j["seed"] = c.seed;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& o : c.outputs) {
        outs.push_back({{"kind", o.kind}, {"path", o.path}});
    }
    j["outputs"] = outs;
    return j;
}

std::string serialize_config(const ExperimentConfig& c) {
    return to_json(c).dump(2) + "\n";
}

} // namespace salab
