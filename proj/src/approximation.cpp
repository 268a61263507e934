#include "salab/approximation.hpp"

#include "salab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace salab {

Intertwiner build_intertwiner(const Hierarchy& h, int q, double tol) {
    require(q >= 0 && q <= h.max_level(), "build_intertwiner: level out of range");
    Intertwiner w;
    w.q = q;
    w.epsilon = h.epsilon;
    w.times = h.grid.nodes();
    const auto& kq = h.levels[static_cast<std::size_t>(q)].connection;
    const TimeGrid& grid = h.grid;

    const auto forward =
        propagate([&](double t) { return grid.interpolate(kq, t); }, 1.0, 0.0, w.times, OmegaProfile::zero(), tol);
    const auto adjoint = propagate([&](double t) { return Matrix(grid.interpolate(kq, t).adjoint()); }, 1.0, 0.0,
                                   w.times, OmegaProfile::zero(), tol);
    const Eigen::Index dim = h.family.dim();
    const auto& projectors = h.levels[static_cast<std::size_t>(q)].projectors;
    w.residuals.assign(projectors.size(), 0.0);
    for (std::size_t i = 0; i < w.times.size(); ++i) {
        w.w.push_back(forward[i].matrix);
        w.w_inverse.push_back(adjoint[i].matrix.adjoint());
        const Matrix& wi = w.w.back();
        w.inverse_residual = std::max(w.inverse_residual, operator_norm(wi * w.w_inverse.back() - identity(dim)));
        w.sup_norm = std::max(w.sup_norm, operator_norm(wi));
        w.sup_inverse_norm = std::max(w.sup_inverse_norm, operator_norm(w.w_inverse.back()));
        for (std::size_t k = 0; k < projectors.size(); ++k) {
            const Matrix r = wi * projectors[k].front() - projectors[k][i] * wi;
            w.residuals[k] = std::max(w.residuals[k], operator_norm(r));
        }
    }
    return w;
}

ScaledValue ApproximationBundle::psi_sup(std::size_t group) const {
    require(group < psi.size(), "psi_sup: group out of range");
    ScaledValue best{0.0, 0.0};
    double best_log = -std::numeric_limits<double>::infinity();
    for (const auto& m : psi[group]) {
        const ScaledValue n = m.norm();
        if (n.log() > best_log) {
            best_log = n.log();
            best = n;
        }
    }
    return best;
}

ApproximationBundle build_approximation(const Hierarchy& h, int q, double tol) {
    require(q >= 0 && q <= h.max_level(), "build_approximation: level out of range");
    ApproximationBundle b;
    b.epsilon = h.epsilon;
    b.q = q;
    b.times = h.grid.nodes();
    const double eps = h.epsilon;

    const OmegaProfile omega = OmegaProfile::from_family(h.family, h.grid.size());
    for (const double t : b.times) {
        b.omega.push_back(omega(t));
    }
    b.u = evolve_sampled(h.family, eps, 0.0, b.times, omega, tol);
    b.v = propagate([&](double t) { return h.approximation_generator_at(q, t); }, eps, 0.0, b.times, omega, tol);
    b.intertwiner = build_intertwiner(h, q, std::min(tol, 1e-12));

    const auto& projectors = h.levels[static_cast<std::size_t>(q)].projectors;
    const std::size_t groups = h.group_count();
    b.error_vs_u.assign(projectors.size(), 0.0);
    b.psi.assign(groups, {});

    // Dynamical phases from the tracked level-0 eigenvalue branches.
    std::vector<std::vector<Complex>> phase(groups);
    for (std::size_t j = 0; j < groups; ++j) {
        phase[j] = h.grid.integrate(h.eigenvalues[j]);
    }

    for (std::size_t i = 0; i < b.times.size(); ++i) {
        const Matrix& u = b.u[i].matrix;
        const Matrix& v = b.v[i].matrix;
        const Matrix diff = u - v;
        const double err = operator_norm(diff);
        b.error_profile.push_back(err);
        b.total_error = std::max(b.total_error, err);
        b.v_scale = std::max(b.v_scale, operator_norm(v));
        const Matrix phi = b.intertwiner.w_inverse[i] * v;
        for (std::size_t k = 0; k < projectors.size(); ++k) {
            const Matrix& p0 = projectors[k].front();
            b.error_vs_u[k] = std::max(b.error_vs_u[k], operator_norm(diff * p0));
            b.intertwining_residual =
                std::max(b.intertwining_residual, operator_norm(v * p0 - projectors[k][i] * v));
            b.block_residual = std::max(b.block_residual, operator_norm(phi * p0 - p0 * phi));
        }
        for (std::size_t j = 0; j < groups; ++j) {
            // exp(i int lambda / eps) = exp(i Re / eps) exp(-Im / eps)
            const Complex integral = phase[j][i];
            const Complex rotation = std::exp(I_unit * (integral.real() / eps));
            const double log_scale = b.v[i].log_scale - integral.imag() / eps;
            b.psi[j].push_back({rotation * (phi * projectors[j].front()), log_scale});
        }
        b.phi.push_back(phi);
    }
    return b;
}

ScaledValue transition_amplitude(const EvolutionResult& u, const Matrix& p_t, const Matrix& p_s) {
    return {operator_norm(p_t * u.matrix * p_s), u.log_scale};
}

ScaledValue transition_amplitude(const EvolutionResult& u, const SpectralDecomposition& at_t,
                                 const SpectralDecomposition& at_s, std::size_t j, std::size_t k) {
    require(j < at_t.size() && k < at_s.size(), "transition_amplitude: group index out of range");
    return transition_amplitude(u, at_t.groups[j].projector, at_s.groups[k].projector);
}

GrowthFit dephased_growth(std::span<const ApproximationBundle> bundles, std::size_t group) {
    std::vector<SeriesPoint> series;
    for (const auto& b : bundles) {
        const ScaledValue s = b.psi_sup(group);
        series.push_back({b.epsilon, s.value, s.log_scale});
    }
    return fit_growth_law(series);
}

double psi_generator_remainder(const ApproximationBundle& bundle, const Hierarchy& h, std::size_t group) {
    require(group < bundle.psi.size(), "psi_generator_remainder: group out of range");
    const auto& psi = bundle.psi[group];
    const double eps = bundle.epsilon;
    // Psi = exp(s(t)) Psi~ with real s; differentiate Psi~ on the grid and
    // restore i eps s'(t) analytically.
    std::vector<Matrix> values;
    for (const auto& m : psi) {
        values.push_back(m.value);
    }
    const auto deriv = h.grid.differentiate(values);
    const auto& projectors = h.levels[static_cast<std::size_t>(bundle.q)].projectors;
    const Matrix& p0 = projectors[group].front();
    double worst = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const Complex lambda = h.eigenvalues[group][i];
        // s(t) = int (omega - Im lambda) / eps, so i eps s' = i (omega - Im lambda).
        const Complex shift = I_unit * (bundle.omega[i] - lambda.imag());
        const Matrix pinv = values[i].completeOrthogonalDecomposition().pseudoInverse();
        const Matrix generator = (I_unit * eps * deriv[i] * pinv + shift * p0) * p0;
        const Matrix d_tilde = bundle.intertwiner.w_inverse[i] * projectors[group][i] *
                               h.nilpotents[group][i] * projectors[group][i] * bundle.intertwiner.w[i] * p0;
        worst = std::max(worst, operator_norm(generator - d_tilde) / eps);
    }
    return worst;
}

} // namespace salab
