#include "salab/nilpotent.hpp"

#include "salab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace salab {

std::string_view to_string(Verdict v) {
    return v == Verdict::Bounded ? "bounded" : "unbounded";
}

int nilpotency_index(const Matrix& n, double rel_tol) {
    const double norm = operator_norm(n);
    if (norm == 0.0) {
        return 0;
    }
    Matrix power = n;
    for (int d = 1; d <= n.rows(); ++d) {
        if (operator_norm(power) <= rel_tol * std::pow(norm, d)) {
            return d;
        }
        power = power * n;
    }
    fail(ErrorKind::NotNilpotent, "no power up to the dimension vanishes");
}

NilpotentFamily make_nilpotent_family(const GeneratorFamily& n, std::optional<GeneratorFamily> perturbation) {
    if (perturbation && perturbation->dim() != n.dim()) {
        fail(ErrorKind::DimensionMismatch, "perturbation and nilpotent family differ in dimension");
    }
    int index = 0;
    constexpr int samples = 50;
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / (samples - 1);
        const Matrix m = n.eval(t);
        const int d = nilpotency_index(m);
        if (d == 0) {
            continue;
        }
        // Require the family-wide index to annihilate every sample.
        index = std::max(index, d);
    }
    return {n, index, std::move(perturbation)};
}

EvolutionResult evolve_nilpotent(const NilpotentFamily& nf, double epsilon, double s, double t, double tol) {
    require(epsilon > 0.0, "evolve_nilpotent: epsilon must be positive");
    require(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0, "evolve_nilpotent: times must lie in [0, 1]");
    // i eps Y' = i (N + eps A) Y is eps Y' = (N + eps A) Y.
    GeneratorFamily::Fn generator;
    if (nf.perturbation) {
        generator = [&nf, epsilon](double u) {
            return Matrix(I_unit * (nf.family.eval(u) + epsilon * nf.perturbation->eval(u)));
        };
    } else {
        generator = [&nf](double u) { return Matrix(I_unit * nf.family.eval(u)); };
    }
    const double times[] = {t};
    return propagate(generator, epsilon, s, times, OmegaProfile::zero(), tol).front();
}

Matrix example_nilpotent_solution(double epsilon, double t) {
    require(epsilon > 0.0, "example_nilpotent_solution: epsilon must be positive");
    const double r = std::sqrt(epsilon);
    const double c = std::cosh(t / r);
    const double sh = std::sinh(t / r);
    Matrix y(2, 2);
    y << c, -sh / r, t * c - r * sh, c - t / r * sh;
    return y;
}

namespace {

struct SupPoint {
    double value = 0.0;
    double s = 0.0;
    double t = 0.0;
};

// Norms of Y(t, s) for one s and a set of t values on either side of s.
void scan_from(const NilpotentFamily& nf, double eps, double s, const std::vector<double>& ts, double tol,
               SupPoint& best) {
    std::vector<double> forward, backward;
    for (const double t : ts) {
        (t >= s ? forward : backward).push_back(t);
    }
    std::sort(forward.begin(), forward.end());
    std::sort(backward.begin(), backward.end(), std::greater<>());
    GeneratorFamily::Fn generator = [&nf, eps](double u) {
        Matrix g = nf.family.eval(u);
        if (nf.perturbation) {
            g += eps * nf.perturbation->eval(u);
        }
        return Matrix(I_unit * g);
    };
    for (const auto* list : {&forward, &backward}) {
        if (list->empty()) {
            continue;
        }
        const auto results = propagate(generator, eps, s, *list, OmegaProfile::zero(), tol);
        for (std::size_t i = 0; i < results.size(); ++i) {
            const double v = operator_norm(results[i].matrix);
            if (v > best.value) {
                best = {v, s, (*list)[i]};
            }
        }
    }
}

std::vector<double> around(double centre, double step) {
    std::vector<double> out;
    for (int k = -2; k <= 2; ++k) {
        out.push_back(std::clamp(centre + k * step, 0.0, 1.0));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

GrowthReport growth_exponent(const NilpotentFamily& nf, std::span<const double> epsilon_grid, double tol) {
    if (epsilon_grid.size() < 5) {
        fail(ErrorKind::InsufficientData, "growth_exponent: need at least 5 epsilon values");
    }
    GrowthReport report;
    std::vector<double> coarse;
    for (int i = 0; i < 9; ++i) {
        coarse.push_back(i / 8.0);
    }
    for (const double eps : epsilon_grid) {
        SupPoint best;
        for (const double s : coarse) {
            scan_from(nf, eps, s, coarse, tol, best);
        }
        const double step = 1.0 / 32.0;
        const auto ts = around(best.t, step);
        for (const double s : around(best.s, step)) {
            scan_from(nf, eps, s, ts, tol, best);
        }
        report.series.push_back({eps, best.value, 0.0});
        report.argmax_s.push_back(best.s);
        report.argmax_t.push_back(best.t);
    }
    report.fit = fit_growth_law(report.series);
    if (!report.fit.bounded) {
        report.power = fit(report.series, GrowthModel::PowerLaw);
    }
    return report;
}

DichotomyResult boundedness_dichotomy(const NilpotentFamily& nf, std::span<const double> epsilon_grid, double s,
                                      double t, double tol) {
    if (epsilon_grid.size() < 2) {
        fail(ErrorKind::InsufficientData, "boundedness_dichotomy: need at least 2 epsilon values");
    }
    DichotomyResult r;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const double eps : epsilon_grid) {
        const double v = operator_norm(evolve_nilpotent(nf, eps, s, t, tol).matrix);
        r.epsilons.push_back(eps);
        r.norms.push_back(v);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    r.ratio = hi / lo;
    const double a = std::min(s, t);
    const double b = std::max(s, t);
    constexpr int fine = 401;
    for (int i = 0; i < fine; ++i) {
        r.sup_n = std::max(r.sup_n, operator_norm(nf.family.eval(a + (b - a) * i / (fine - 1))));
    }
    const bool numeric_bounded = r.ratio < 10.0;
    const bool symbolic_bounded = r.sup_n < 1e-12;
    if (numeric_bounded != symbolic_bounded) {
        fail(ErrorKind::VerdictConflict,
             std::string("numerical scan says ") + (numeric_bounded ? "bounded" : "unbounded") +
                 " but N is " + (symbolic_bounded ? "identically zero" : "nonzero") +
                 " on the interval; extend the epsilon grid towards smaller values");
    }
    r.verdict = numeric_bounded ? Verdict::Bounded : Verdict::Unbounded;
    return r;
}

double shifted_nilpotent_bound(const Matrix& n, double delta) {
    require(delta > 0.0 && delta <= 1.0, "shifted_nilpotent_bound: delta must lie in (0, 1]");
    const int d = nilpotency_index(n);
    const Eigen::Index dim = n.rows();
    // exp(N s) is the finite sum over powers below d.
    std::vector<Matrix> powers{identity(dim)};
    for (int m = 1; m < d; ++m) {
        powers.push_back(powers.back() * n / static_cast<double>(m));
    }
    auto value = [&](double s) {
        Matrix e = Matrix::Zero(dim, dim);
        double sp = 1.0;
        for (const auto& p : powers) {
            e += sp * p;
            sp *= s;
        }
        return std::exp(-delta * s) * operator_norm(e);
    };
    const double end = 50.0 / delta;
    constexpr int samples = 4001;
    double best_s = 0.0;
    double best = value(0.0);
    for (int i = 1; i < samples; ++i) {
        const double s = end * i / (samples - 1);
        const double v = value(s);
        if (v > best) {
            best = v;
            best_s = s;
        }
    }
    // Golden-section refinement on the neighbouring sample interval.
    const double h = end / (samples - 1);
    double lo = std::max(0.0, best_s - h);
    double hi = std::min(end, best_s + h);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80 && hi - lo > 1e-12 * end; ++it) {
        const double x1 = hi - phi * (hi - lo);
        const double x2 = lo + phi * (hi - lo);
        if (value(x1) > value(x2)) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    return std::max(best, value(0.5 * (lo + hi)));
}

} // namespace salab
