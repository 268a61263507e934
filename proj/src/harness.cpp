#include "salab/harness.hpp"

#include "salab/approximation.hpp"
#include "salab/errors.hpp"
#include "salab/hierarchy.hpp"
#include "salab/intro_example.hpp"
#include "salab/nilpotent.hpp"
#include "salab/propagator.hpp"
#include "salab/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace salab {

namespace {

using nlohmann::json;

double effective_tol(const ExperimentConfig& c, const RunOptions& o) {
    return o.tol ? *o.tol : c.tol;
}

json complex_json(Complex z) {
    return json::array({z.real(), z.imag()});
}

json scaled_json(const ScaledValue& v) {
    return {{"value", v.value}, {"log_scale", v.log_scale}};
}

json make_report(const std::string& command, const ExperimentConfig& c, const RunOptions& o) {
    json r;
    r["schema_version"] = kReportSchemaVersion;
    r["id"] = c.id;
    r["command"] = command;
    r["config"] = to_json(c);
    r["environment"] = {{"tol", effective_tol(c, o)},
                        {"grid_size", c.grid_size},
                        {"q_max", c.q_max},
                        {"gap_floor", c.gap_floor},
                        {"seed", c.seed},
                        {"library", "salab"},
                        {"version", "0.1.0"}};
    r["records"] = json::array();
    r["fits"] = json::object();
    return r;
}

GeneratorFamily perturbed_family(const ExperimentConfig& c, double epsilon) {
    GeneratorFamily f = build_family(c.family);
    if (c.perturbation) {
        f = linear_combination(1.0, f, epsilon, build_family(*c.perturbation));
    }
    return f;
}

void require_grid(const ExperimentConfig& c) {
    if (c.epsilon_grid.empty()) {
        fail(ErrorKind::Config, "epsilon_grid: at least one value is required");
    }
}

IntroParams intro_params(const ExperimentConfig& c) {
    if (c.family.kind != "intro_example") {
        fail(ErrorKind::Config, "family/kind: the example command needs 'intro_example'");
    }
    IntroParams p;
    const auto& j = c.family.params;
    p.a = complex_from_json(j.value("a", json(1.0)), "family/params/a");
    p.k = complex_from_json(j.value("k", json(-1.0)), "family/params/k");
    return p;
}

} // namespace

std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RunOptions options_from_environment() {
    RunOptions o;
    if (const char* w = std::getenv("SALAB_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(w, &end, 10);
        if (end == w || *end != '\0' || v < 1 || v > 256) {
            fail(ErrorKind::Config, "SALAB_WORKERS must be an integer in [1, 256]");
        }
        o.workers = static_cast<int>(v);
    }
    if (const char* t = std::getenv("SALAB_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(t, &end);
        if (end == t || *end != '\0' || !(v > 0.0 && v < 1.0)) {
            fail(ErrorKind::Config, "SALAB_TOL must be a number in (0, 1)");
        }
        o.tol = v;
    }
    return o;
}

json sanitize(json j) {
    if (j.is_number_float() && !std::isfinite(j.get<double>())) {
        return nullptr;
    }
    if (j.is_structured()) {
        for (auto& v : j) {
            v = sanitize(std::move(v));
        }
    }
    return j;
}

json run_decompose(const ExperimentConfig& c, const RunOptions& o) {
    json report = make_report("decompose", c, o);
    const GeneratorFamily f = build_family(c.family);
    const TimeGrid grid(c.grid_size);
    const OmegaProfile omega = OmegaProfile::from_family(f, c.grid_size);
    std::vector<SpectralDecomposition> ds;
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        try {
            ds.push_back(decompose(f.eval(t), c.gap_floor));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::GapViolation) {
                fail(ErrorKind::GapViolation, "at t = " + format_number(t) + ": " + e.what());
            }
            throw;
        }
    }
    double min_gap = std::numeric_limits<double>::infinity();
    std::vector<int> multiplicities;
    for (int i = 0; i < grid.size(); ++i) {
        const auto& d = ds[static_cast<std::size_t>(i)];
        const double t = grid.node(i);
        std::vector<int> m;
        json groups = json::array();
        for (const auto& g : d.groups) {
            m.push_back(g.multiplicity);
            groups.push_back({{"eigenvalue", complex_json(g.eigenvalue)},
                              {"multiplicity", g.multiplicity},
                              {"nilpotent_norm", operator_norm(g.nilpotent)}});
        }
        if (i == 0) {
            multiplicities = m;
        } else if (m != multiplicities) {
            fail(ErrorKind::GapViolation, "group structure changes at t = " + format_number(t));
        }
        min_gap = std::min(min_gap, d.min_gap);
        json rec = {{"t", t},
                    {"groups", groups},
                    {"group_count", static_cast<int>(d.size())},
                    {"omega", omega(t)}};
        rec["min_gap"] = std::isfinite(d.min_gap) ? json(d.min_gap) : json(nullptr);
        report["records"].push_back(rec);
    }
    report["summary"] = {{"group_count", multiplicities.size()}, {"multiplicities", multiplicities}};
    report["summary"]["min_gap"] = std::isfinite(min_gap) ? json(min_gap) : json(nullptr);
    return sanitize(report);
}

json run_evolve(const ExperimentConfig& c, const RunOptions& o) {
    require_grid(c);
    json report = make_report("evolve", c, o);
    const double tol = effective_tol(c, o);
    const auto results = parallel_map<json>(static_cast<int>(c.epsilon_grid.size()), o.workers, [&](int i) {
        const double eps = c.epsilon_grid[static_cast<std::size_t>(i)];
        const GeneratorFamily f = perturbed_family(c, eps);
        const EvolutionResult u = evolve(f, eps, 0.0, 1.0, OmegaProfile::from_family(f, c.grid_size), tol);
        return json{{"epsilon", eps},
                    {"norm", operator_norm(u.matrix)},
                    {"log_scale", u.log_scale},
                    {"steps", u.steps},
                    {"est_error", u.est_error},
                    {"matrix", matrix_to_json(u.matrix)}};
    });
    for (const auto& r : results) {
        report["records"].push_back(r);
    }
    return sanitize(report);
}

json run_superadiabatic_scan(const ExperimentConfig& c, const RunOptions& o) {
    require_grid(c);
    json report = make_report("superadiabatic", c, o);
    const double tol = effective_tol(c, o);
    const GeneratorFamily f = build_family(c.family);
    struct Entry {
        std::optional<Hierarchy> h;
        json record;
    };
    auto entries = parallel_map<Entry>(static_cast<int>(c.epsilon_grid.size()), o.workers, [&](int i) {
        const double eps = c.epsilon_grid[static_cast<std::size_t>(i)];
        Entry e;
        try {
            Hierarchy h = build_hierarchy(f, eps, c.gap_floor, TimeGrid(c.grid_size), c.q_max);
            const ApproximationBundle b0 = build_approximation(h, 0, tol);
            const double err_star =
                h.q_star == 0 ? b0.total_error : build_approximation(h, h.q_star, tol).total_error;
            e.record = {{"epsilon", eps},
                        {"status", "ok"},
                        {"q_star", h.q_star},
                        {"trivially_converged", h.trivially_converged},
                        {"deltas", h.deltas},
                        {"delta_qstar", h.deltas[static_cast<std::size_t>(h.q_star)]},
                        {"error_q0", b0.total_error},
                        {"error_qstar", err_star},
                        {"grid_size", h.grid.size()}};
            e.record["factorial_fit"] = h.fit ? h.fit->to_json() : json(nullptr);
            e.h = std::move(h);
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::GapClosed && err.kind() != ErrorKind::GapViolation) {
                throw Error(err.kind(), "epsilon = " + format_number(eps) + ": " + err.what());
            }
            e.record = {{"epsilon", eps},
                        {"status", "gap_closed"},
                        {"error_kind", std::string(to_string(err.kind()))},
                        {"message", err.what()}};
        }
        return e;
    });

    std::vector<Hierarchy> ok;
    std::vector<SeriesPoint> errors;
    json largest = nullptr;
    bool trivial = false;
    for (auto& e : entries) {
        report["records"].push_back(e.record);
        if (e.h) {
            if (largest.is_null()) {
                largest = e.h->epsilon;
            }
            trivial = trivial || e.h->trivially_converged;
            errors.push_back({e.h->epsilon, e.record["error_qstar"].get<double>(), 0.0});
            ok.push_back(std::move(*e.h));
        }
    }
    report["largest_working_epsilon"] = largest;
    json& fits = report["fits"];
    fits["delta_decay"] = nullptr;
    fits["error_decay"] = nullptr;
    if (trivial) {
        fits["note"] = "scheme trivially converged at q = 0";
    } else if (ok.size() >= 4) {
        try {
            fits["delta_decay"] = fit_delta_decay(ok).to_json();
        } catch (const Error& err) {
            fits["delta_decay_error"] = err.what();
        }
        try {
            fits["error_decay"] = fit(errors, GrowthModel::ExpInverseEps).to_json();
        } catch (const Error& err) {
            fits["error_decay_error"] = err.what();
        }
    } else {
        fits["note"] = "fewer than 4 working epsilon values; no cross-epsilon fits";
    }
    return sanitize(report);
}

json run_nilpotent_scan(const ExperimentConfig& c, const RunOptions& o) {
    require_grid(c);
    json report = make_report("nilpotent", c, o);
    const double tol = effective_tol(c, o);
    std::optional<GeneratorFamily> pert;
    if (c.perturbation) {
        pert = build_family(*c.perturbation);
    }
    const NilpotentFamily nf = make_nilpotent_family(build_family(c.family), pert);
    const bool closed_form = c.family.kind == "nilpotent_example" && !c.perturbation;
    const DichotomyResult dich = boundedness_dichotomy(nf, c.epsilon_grid, 0.0, 1.0, tol);
    std::optional<GrowthReport> growth;
    if (c.epsilon_grid.size() >= 5) {
        growth = growth_exponent(nf, c.epsilon_grid, tol);
    }
    const auto residuals =
        parallel_map<double>(static_cast<int>(c.epsilon_grid.size()), o.workers, [&](int i) {
            if (!closed_form) {
                return std::numeric_limits<double>::quiet_NaN();
            }
            const double eps = c.epsilon_grid[static_cast<std::size_t>(i)];
            const Matrix y = evolve_nilpotent(nf, eps, 0.0, 1.0, tol).raw();
            const Matrix ref = example_nilpotent_solution(eps, 1.0);
            double worst = 0.0;
            for (Eigen::Index r = 0; r < 2; ++r) {
                for (Eigen::Index col = 0; col < 2; ++col) {
                    worst = std::max(worst, std::abs(y(r, col) - ref(r, col)) / std::abs(ref(r, col)));
                }
            }
            return worst;
        });
    for (std::size_t i = 0; i < c.epsilon_grid.size(); ++i) {
        json rec = {{"epsilon", c.epsilon_grid[i]}, {"norm_y10", dich.norms[i]}};
        if (growth) {
            rec["sup_value"] = growth->series[i].value;
            rec["sup_log_scale"] = growth->series[i].log_scale;
            rec["argmax_s"] = growth->argmax_s[i];
            rec["argmax_t"] = growth->argmax_t[i];
        }
        rec["closed_form_rel_error"] = closed_form ? json(residuals[i]) : json(nullptr);
        report["records"].push_back(rec);
    }
    report["nilpotency_index"] = nf.index;
    report["verdict"] = std::string(to_string(dich.verdict));
    report["ratio"] = dich.ratio;
    report["sup_n"] = dich.sup_n;
    json& fits = report["fits"];
    fits["growth"] = growth ? growth->fit.to_json() : json(nullptr);
    fits["power_law"] = growth && growth->power ? growth->power->to_json() : json(nullptr);
    if (!growth) {
        fits["note"] = "growth fits need at least 5 epsilon values";
    }
    return sanitize(report);
}

json run_intro_example(const ExperimentConfig& c, const RunOptions& o) {
    require_grid(c);
    json report = make_report("example", c, o);
    const double tol = effective_tol(c, o);
    const IntroParams p = intro_params(c);
    const Complex ak = p.a * p.k;
    const bool formula = ak.real() < 0.0 && std::abs(ak.imag()) <= 1e-14 * std::abs(ak);
    const auto records = parallel_map<json>(static_cast<int>(c.epsilon_grid.size()), o.workers, [&](int i) {
        const double eps = c.epsilon_grid[static_cast<std::size_t>(i)];
        json rec = {{"epsilon", eps}};
        const ScaledValue num = numerical_transition(p, eps, 1.0, tol);
        rec["transition"] = scaled_json(num);
        if (formula) {
            const ScaledValue cf = closed_form_transition(p, eps, 1.0);
            rec["closed_form_transition"] = scaled_json(cf);
            rec["transition_rel_error"] = std::abs(std::exp(num.log() - cf.log()) - 1.0);
            rec["prefactor"] = transition_prefactor(p, eps);
        }
        rec["omega_norm"] = scaled_json(closed_form_omega(p, eps, 1.0).norm());
        json checks = json::array();
        for (double t : {0.3, 0.7, 1.0}) {
            for (int j : {0, 1}) {
                const IntertwiningCheck ic = starred_projector_intertwining(p, eps, t, j, tol);
                checks.push_back({{"t", t},
                                  {"j", j},
                                  {"starred_residual", ic.starred},
                                  {"instantaneous_residual", ic.instantaneous},
                                  {"u_norm", ic.u_norm}});
            }
        }
        rec["intertwining"] = checks;
        return rec;
    });
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& r : records) {
        report["records"].push_back(r);
        if (formula) {
            const double eps = r["epsilon"].get<double>();
            const ScaledValue v{r["transition"]["value"].get<double>(), r["transition"]["log_scale"].get<double>()};
            x.push_back(1.0 / std::sqrt(eps));
            y.push_back(v.log() - std::log(r["prefactor"].get<double>()));
        }
    }
    if (x.size() >= 3) {
        const LinearFit lf = linear_regression(x, y);
        report["fits"]["transition_exponent"] = {
            {"slope", lf.slope}, {"intercept", lf.intercept}, {"r_squared", lf.r_squared}};
    } else {
        report["fits"]["transition_exponent"] = nullptr;
    }
    return sanitize(report);
}

std::string scan_csv(const json& report) {
    std::ostringstream out;
    out << "epsilon,q,delta,error_q0,error_qstar,kappa_fit_r2\n";
    double r2 = std::numeric_limits<double>::quiet_NaN();
    const json& fits = report.at("fits");
    if (fits.contains("delta_decay") && fits["delta_decay"].is_object()) {
        r2 = fits["delta_decay"].value("r_squared", r2);
    }
    const auto num = [](const json& j) {
        return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
    };
    for (const auto& rec : report.at("records")) {
        const std::string eps = format_number(rec.at("epsilon").get<double>());
        if (rec.value("status", "ok") != "ok") {
            out << eps << ",-1,nan,nan,nan," << format_number(r2) << "\n";
            continue;
        }
        const auto& deltas = rec.at("deltas");
        for (std::size_t q = 0; q < deltas.size(); ++q) {
            out << eps << ',' << q << ',' << format_number(num(deltas[q])) << ','
                << format_number(num(rec.at("error_q0"))) << ',' << format_number(num(rec.at("error_qstar")))
                << ',' << format_number(r2) << "\n";
        }
    }
    return out.str();
}

std::string records_csv(const json& report) {
    std::vector<std::string> keys;
    std::set<std::string> seen;
    for (const auto& rec : report.at("records")) {
        for (auto it = rec.begin(); it != rec.end(); ++it) {
            if ((it->is_primitive()) && seen.insert(it.key()).second) {
                keys.push_back(it.key());
            }
        }
    }
    std::ostringstream out;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        out << (k ? "," : "") << keys[k];
    }
    out << "\n";
    for (const auto& rec : report.at("records")) {
        for (std::size_t k = 0; k < keys.size(); ++k) {
            out << (k ? "," : "");
            if (!rec.contains(keys[k])) {
                continue;
            }
            const json& v = rec.at(keys[k]);
            if (v.is_number_float()) {
                out << format_number(v.get<double>());
            } else if (v.is_string()) {
                // Bare identifiers only; messages with separators are dropped.
                const auto s = v.get<std::string>();
                out << (s.find_first_of(",\n\" ") == std::string::npos ? s : "");
            } else if (v.is_null()) {
                out << "nan";
            } else {
                out << v.dump();
            }
        }
        out << "\n";
    }
    return out.str();
}

void write_outputs(const ExperimentConfig& c, const json& report) {
    for (const auto& o : c.outputs) {
        std::ofstream f(o.path, std::ios::binary);
        if (!f) {
            fail(ErrorKind::Config, "cannot write output '" + o.path + "'");
        }
        if (o.kind == "json") {
            f << report.dump(2) << "\n";
        } else if (report.value("command", "") == "superadiabatic") {
            f << scan_csv(report);
        } else {
            f << records_csv(report);
        }
    }
}

std::vector<SeriesPoint> read_series_csv(const std::string& text) {
    std::vector<SeriesPoint> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        std::vector<double> v;
        bool numeric = true;
        for (const auto& s : cells) {
            char* end = nullptr;
            const double x = std::strtod(s.c_str(), &end);
            if (end == s.c_str() || *end != '\0') {
                numeric = false;
                break;
            }
            v.push_back(x);
        }
        if (!numeric) {
            if (out.empty() && lineno == 1) {
                continue; // header
            }
            fail(ErrorKind::Config, "series line " + std::to_string(lineno) + ": non-numeric cell");
        }
        if (v.size() < 2 || v.size() > 3) {
            fail(ErrorKind::Config, "series line " + std::to_string(lineno) + ": expected epsilon,value[,log_scale]");
        }
        out.push_back({v[0], v[1], v.size() == 3 ? v[2] : 0.0});
    }
    return out;
}

} // namespace salab
