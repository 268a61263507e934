#include "salab/hierarchy.hpp"

#include "salab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace salab {

namespace {

struct LevelZero {
    std::vector<std::vector<Complex>> eigenvalues;
    std::vector<std::vector<Matrix>> projectors; // [group][node], complement last
    std::vector<std::vector<Matrix>> nilpotents;
    std::vector<std::vector<Contour>> contours;
    std::vector<int> multiplicities;
};

std::string at_time(double t) {
    std::ostringstream os;
    os.precision(6);
    os << "t = " << t;
    return os.str();
}

// Decompose H at every node and order the groups so that each eigenvalue
// branch is continuous across nodes (nearest match to the previous node).
LevelZero level_zero(const GeneratorFamily& family, double gap_floor, const TimeGrid& grid) {
    LevelZero z;
    const int points = grid.size();
    std::vector<int> order;
    for (int i = 0; i < points; ++i) {
        const double t = grid.node(i);
        const Matrix h = family.eval(t);
        SpectralDecomposition d;
        try {
            d = decompose(h, gap_floor);
        } catch (const Error& e) {
            fail(e.kind(), std::string(e.what()) + " at " + at_time(t));
        }
        const std::size_t n = d.size();
        if (i == 0) {
            z.eigenvalues.assign(n, {});
            z.projectors.assign(n + 1, {});
            z.nilpotents.assign(n, {});
            z.contours.assign(n, {});
            for (const auto& g : d.groups) {
                z.multiplicities.push_back(g.multiplicity);
            }
            order.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                order[k] = static_cast<int>(k);
            }
        } else {
            if (n != z.multiplicities.size()) {
                fail(ErrorKind::GapViolation, "number of eigenvalue groups changes at " + at_time(t));
            }
            std::vector<bool> used(n, false);
            for (std::size_t k = 0; k < n; ++k) {
                const Complex prev = z.eigenvalues[k].back();
                double best = std::numeric_limits<double>::infinity();
                double second = best;
                int pick = -1;
                for (std::size_t m = 0; m < n; ++m) {
                    if (used[m]) {
                        continue;
                    }
                    const double dist = std::abs(d.groups[m].eigenvalue - prev);
                    if (dist < best) {
                        second = best;
                        best = dist;
                        pick = static_cast<int>(m);
                    } else {
                        second = std::min(second, dist);
                    }
                }
                if (second - best < 1e-10) {
                    fail(ErrorKind::GapViolation, "ambiguous eigenvalue continuation at " + at_time(t));
                }
                used[static_cast<std::size_t>(pick)] = true;
                order[k] = pick;
            }
        }
        const double norm = operator_norm(h);
        for (std::size_t k = 0; k < n; ++k) {
            const auto idx = static_cast<std::size_t>(order[k]);
            const EigenGroup& g = d.groups[idx];
            if (g.multiplicity != z.multiplicities[k]) {
                fail(ErrorKind::GapViolation, "multiplicity changes at " + at_time(t));
            }
            z.eigenvalues[k].push_back(g.eigenvalue);
            z.projectors[k].push_back(g.projector);
            z.nilpotents[k].push_back(g.nilpotent);
            z.contours[k].push_back(default_contour(d, idx, norm));
        }
        z.projectors[n].push_back(d.complement_projector);
    }
    return z;
}

std::vector<Matrix> connection(const TimeGrid& grid, const std::vector<std::vector<Matrix>>& projectors) {
    const std::size_t points = projectors.front().size();
    const Eigen::Index dim = projectors.front().front().rows();
    std::vector<Matrix> k(points, Matrix::Zero(dim, dim));
    for (const auto& p : projectors) {
        const auto dp = grid.differentiate(p);
        for (std::size_t i = 0; i < points; ++i) {
            k[i] += I_unit * (dp[i] * p[i]);
        }
    }
    return k;
}

double sup_distance(const std::vector<Matrix>& a, const std::vector<Matrix>* b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s = std::max(s, operator_norm(b ? Matrix(a[i] - (*b)[i]) : a[i]));
    }
    return s;
}

// Circle around group k re-fitted to the spectrum of H^q: eigenvalues are
// assigned to the nearest level-0 centre and the radius splits the inside
// and outside sets.
std::optional<Contour> resolve_contour(const Matrix& hq, const std::vector<Complex>& centres, std::size_t k,
                                       int multiplicity) {
    const auto ev = spectrum(hq);
    double inside = 0.0;
    double outside = std::numeric_limits<double>::infinity();
    int count = 0;
    for (const Complex z : ev) {
        std::size_t nearest = 0;
        for (std::size_t m = 1; m < centres.size(); ++m) {
            if (std::abs(z - centres[m]) < std::abs(z - centres[nearest])) {
                nearest = m;
            }
        }
        const double dist = std::abs(z - centres[k]);
        if (nearest == k) {
            inside = std::max(inside, dist);
            ++count;
        } else {
            outside = std::min(outside, dist);
        }
    }
    if (count != multiplicity || !(outside > inside * 1.2)) {
        return std::nullopt;
    }
    Contour c;
    c.center = centres[k];
    c.radius = std::isfinite(outside) ? 0.5 * (inside + outside) : std::max(2.0 * inside, 0.5);
    return c;
}

Hierarchy build_on_grid(const GeneratorFamily& family, double epsilon, double gap_floor, const TimeGrid& grid,
                        int q_max, const HierarchyOptions& options) {
    Hierarchy h{family, epsilon, gap_floor, grid, {}, {}, 0, false, std::nullopt, {}, {}, {}, {}};
    LevelZero z = level_zero(family, gap_floor, grid);
    const int points = grid.size();
    const std::size_t groups = z.multiplicities.size();
    const Eigen::Index dim = family.dim();

    HierarchyLevel l0;
    for (int i = 0; i < points; ++i) {
        l0.generator.push_back(family.eval(grid.node(i)));
    }
    l0.projectors = z.projectors;
    l0.connection = connection(grid, l0.projectors);

    const double k0_sup = sup_distance(l0.connection, nullptr);
    if (k0_sup > options.trivial_tol) {
        const double residual = differentiation_self_test(grid, l0.connection);
        if (residual > options.self_test_tol * std::max(1.0, k0_sup)) {
            fail(ErrorKind::GridTooCoarse, "K^0 not resolved on " + std::to_string(points) +
                                               " nodes (self-test residual " + std::to_string(residual) + ")");
        }
        // The round trip is exact for any interpolant, so resolution itself is
        // judged by the trailing Chebyshev coefficients.
        const double tail = grid.tail_ratio(l0.connection);
        if (tail > options.tail_tol) {
            fail(ErrorKind::GridTooCoarse, "K^0 not resolved on " + std::to_string(points) +
                                               " nodes (trailing coefficient ratio " + std::to_string(tail) + ")");
        }
    }
    h.levels.push_back(std::move(l0));
    h.deltas.push_back(k0_sup);
    h.eigenvalues = std::move(z.eigenvalues);
    h.nilpotents = std::move(z.nilpotents);
    h.contours = std::move(z.contours);
    h.multiplicities = z.multiplicities;

    if (k0_sup <= options.trivial_tol) {
        h.trivially_converged = true;
        h.deltas.front() = 0.0;
        h.q_star = 0;
        return h;
    }

    int increases = 0;
    for (int q = 1; q <= q_max; ++q) {
        const HierarchyLevel& prev = h.levels.back();
        HierarchyLevel lvl;
        lvl.projectors.assign(groups + 1, {});
        for (int i = 0; i < points; ++i) {
            const double t = grid.node(i);
            const Matrix hq = h.levels.front().generator[static_cast<std::size_t>(i)] -
                              epsilon * prev.connection[static_cast<std::size_t>(i)];
            if (!all_finite(hq)) {
                fail(ErrorKind::NonFinite, "H^" + std::to_string(q) + " not finite at " + at_time(t));
            }
            Matrix total = Matrix::Zero(dim, dim);
            std::vector<Complex> centres;
            for (std::size_t k = 0; k < groups; ++k) {
                centres.push_back(h.contours[k][static_cast<std::size_t>(i)].center);
            }
            for (std::size_t k = 0; k < groups; ++k) {
                const int m = h.multiplicities[k];
                auto attempt = [&](const Contour& c) -> std::optional<Matrix> {
                    try {
                        Matrix p = contour_projector(hq, c);
                        if (std::abs(p.trace() - static_cast<double>(m)) > 1e-6) {
                            return std::nullopt;
                        }
                        return p;
                    } catch (const Error& e) {
                        if (e.kind() == ErrorKind::ContourTooClose || e.kind() == ErrorKind::NearSingular) {
                            return std::nullopt;
                        }
                        throw;
                    }
                };
                std::optional<Matrix> p = attempt(h.contours[k][static_cast<std::size_t>(i)]);
                if (!p) {
                    if (const auto c = resolve_contour(hq, centres, k, m)) {
                        p = attempt(*c);
                    }
                }
                if (!p) {
                    fail(ErrorKind::GapClosed, "level q = " + std::to_string(q) + " at " + at_time(t) +
                                                   ": eigenvalues of H^q leave the contour of group " +
                                                   std::to_string(k));
                }
                total += *p;
                lvl.projectors[k].push_back(std::move(*p));
            }
            lvl.projectors[groups].push_back(identity(dim) - total);
            lvl.generator.push_back(hq);
        }
        lvl.connection = connection(grid, lvl.projectors);
        const double delta = sup_distance(lvl.connection, &prev.connection);
        if (!std::isfinite(delta)) {
            fail(ErrorKind::NonFinite, "delta at level " + std::to_string(q) + " is not finite");
        }
        increases = (delta > h.deltas.back()) ? increases + 1 : 0;
        h.levels.push_back(std::move(lvl));
        h.deltas.push_back(delta);
        if (increases >= options.stop_after_increases) {
            break;
        }
    }

    const auto best = std::min_element(h.deltas.begin(), h.deltas.end());
    h.q_star = static_cast<int>(best - h.deltas.begin());
    if (h.deltas.size() >= 4) {
        try {
            h.fit = fit_factorial(std::span<const double>(h.deltas).subspan(1), epsilon, 1);
        } catch (const Error&) {
            h.fit.reset();
        }
    }
    return h;
}

} // namespace

Matrix Hierarchy::connection_at(int q, double t) const {
    require(q >= 0 && q <= max_level(), "hierarchy level out of range");
    return grid.interpolate(levels[static_cast<std::size_t>(q)].connection, t);
}

Matrix Hierarchy::generator_at(int q, double t) const {
    require(q >= 0 && q <= max_level(), "hierarchy level out of range");
    if (q == 0) {
        return family.eval(t);
    }
    return family.eval(t) - epsilon * connection_at(q - 1, t);
}

Matrix Hierarchy::approximation_generator_at(int q, double t) const {
    return generator_at(q, t) + epsilon * connection_at(q, t);
}

Matrix Hierarchy::projector_at(int q, std::size_t group, double t) const {
    require(q >= 0 && q <= max_level(), "hierarchy level out of range");
    const auto& p = levels[static_cast<std::size_t>(q)].projectors;
    require(group < p.size(), "projector group out of range");
    return grid.interpolate(p[group], t);
}

double differentiation_self_test(const TimeGrid& grid, const std::vector<Matrix>& samples) {
    const auto roundtrip = grid.integrate(grid.differentiate(samples));
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        worst = std::max(worst, operator_norm(roundtrip[i] - (samples[i] - samples.front())));
    }
    return worst;
}

Hierarchy build_hierarchy(const GeneratorFamily& family, double epsilon, double gap_floor, const TimeGrid& grid,
                          int q_max, const HierarchyOptions& options) {
    require(epsilon > 0.0 && epsilon <= 1.0, "build_hierarchy: epsilon must lie in (0, 1]");
    require(gap_floor > 0.0, "build_hierarchy: gap_floor must be positive");
    require(q_max >= 0, "build_hierarchy: q_max must be non-negative");
    try {
        return build_on_grid(family, epsilon, gap_floor, grid, q_max, options);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::GridTooCoarse || !options.allow_regrid) {
            throw;
        }
    }
    return build_on_grid(family, epsilon, gap_floor, TimeGrid(2 * grid.size() - 1), q_max, options);
}

GrowthFit fit_delta_decay(std::span<const Hierarchy> hierarchies) {
    if (hierarchies.size() < 4) {
        fail(ErrorKind::InsufficientData, "fit_delta_decay: need at least 4 epsilon values");
    }
    std::vector<SeriesPoint> series;
    std::vector<double> inv_eps, qs;
    for (const auto& h : hierarchies) {
        series.push_back({h.epsilon, h.deltas[static_cast<std::size_t>(h.q_star)], 0.0});
        inv_eps.push_back(1.0 / h.epsilon);
        qs.push_back(h.q_star);
    }
    GrowthFit f = fit(series, GrowthModel::ExpInverseEps);
    const auto [lo, hi] = std::minmax_element(qs.begin(), qs.end());
    if (*hi > *lo) {
        const LinearFit g = linear_regression(inv_eps, qs);
        f.params["g"] = g.slope;
        f.params["g_r_squared"] = g.r_squared;
    } else {
        f.params["g"] = 0.0;
        f.params["g_r_squared"] = 0.0;
    }
    return f;
}

EffectiveGenerator effective_generator(const Hierarchy& h, int q, std::size_t group, int node) {
    require(q >= 0 && q <= h.max_level(), "effective_generator: level out of range");
    require(group < h.group_count(), "effective_generator: group out of range");
    require(node >= 0 && node < h.grid.size(), "effective_generator: node out of range");
    const auto i = static_cast<std::size_t>(node);
    const HierarchyLevel& lvl = h.levels[static_cast<std::size_t>(q)];
    EffectiveGenerator g;
    g.epsilon = h.epsilon;
    g.lambda = h.eigenvalues[group][i];
    g.projector = lvl.projectors[group][i];
    g.d_part = g.projector * h.nilpotents[group][i] * g.projector;
    const Matrix full = lvl.generator[i] * g.projector;
    g.j_part = (full - g.lambda * g.projector - g.d_part) / h.epsilon;
    return g;
}

} // namespace salab
