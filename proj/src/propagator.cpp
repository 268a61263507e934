#include "salab/propagator.hpp"

#include "salab/errors.hpp"
#include "salab/quadrature.hpp"
#include "salab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace salab {

OmegaProfile OmegaProfile::zero() {
    return {};
}

OmegaProfile OmegaProfile::from_samples(const TimeGrid& grid, std::span<const double> values) {
    OmegaProfile p;
    p.values_ = grid.series(values);
    p.antiderivative_ = p.values_.antiderivative();
    p.zero_ = std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
    return p;
}

OmegaProfile OmegaProfile::from_family(const GeneratorFamily& family, int points) {
    const TimeGrid grid(points);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(grid.size()));
    for (const double t : grid.nodes()) {
        double w = -std::numeric_limits<double>::infinity();
        for (const Complex z : spectrum(family.eval(t))) {
            w = std::max(w, z.imag());
        }
        // Eigensolver noise on real spectra is not a growth rate.
        if (std::abs(w) < 1e-12 * std::max(1.0, operator_norm(family.eval(t)))) {
            w = 0.0;
        }
        values.push_back(w);
    }
    return from_samples(grid, values);
}

double OmegaProfile::operator()(double t) const {
    return zero_ ? 0.0 : values_(t);
}

double OmegaProfile::integral(double s, double t) const {
    return zero_ ? 0.0 : antiderivative_(t) - antiderivative_(s);
}

namespace {

double max_abs(const Matrix& m) {
    return m.cwiseAbs().maxCoeff();
}

} // namespace

Trajectory integrate_matrix_ode(const MatrixRhs& rhs, const Matrix& y0, double t0,
                                std::span<const double> outputs, double tol) {
    require(tol > 0.0, "integrate_matrix_ode: tolerance must be positive");
    Trajectory traj;
    traj.states.reserve(outputs.size());
    if (outputs.empty()) {
        return traj;
    }
    const double t_final = outputs.back();
    const double direction = (t_final >= t0) ? 1.0 : -1.0;
    double prev_out = t0;
    for (const double o : outputs) {
        require((o - prev_out) * direction >= 0.0, "integrate_matrix_ode: output times must be monotone");
        prev_out = o;
    }
    const double span = std::abs(t_final - t0);
    const double max_step = span > 0.0 ? span / 16.0 : 0.0;
    constexpr double min_step = 1e-15;
    constexpr long max_steps = 20'000'000;

    // Dormand-Prince 5(4) tableau.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    Matrix y = y0;
    double t = t0;
    Matrix k1 = rhs(t, y);
    std::size_t next_out = 0;
    while (next_out < outputs.size() && outputs[next_out] == t0) {
        traj.states.push_back(y);
        ++next_out;
    }
    if (next_out == outputs.size()) {
        return traj;
    }

    const double f0 = max_abs(k1);
    double h = (f0 > 0.0) ? 0.01 * std::max(1.0, max_abs(y)) / f0 : max_step;
    h = std::clamp(h, 1e-6 * max_step, max_step);
    double err_prev = 1e-4;
    bool last_rejected = false;
    long steps = 0;

    while (next_out < outputs.size()) {
        const double target = outputs[next_out];
        double remaining = std::abs(target - t);
        double step = std::min(h, remaining);
        const bool hits_target = step >= remaining * (1.0 - 1e-12);
        if (hits_target) {
            step = remaining;
        }
        if (step < min_step && !hits_target) {
            fail(ErrorKind::StepUnderflow, "required step " + std::to_string(step) + " at t = " + std::to_string(t));
        }
        if (++steps > max_steps) {
            fail(ErrorKind::NoConvergence, "integrator exceeded the step budget");
        }
        const double dt = direction * step;
        const Matrix k2 = rhs(t + c2 * dt, y + dt * (a21 * k1));
        const Matrix k3 = rhs(t + c3 * dt, y + dt * (a31 * k1 + a32 * k2));
        const Matrix k4 = rhs(t + c4 * dt, y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
        const Matrix k5 = rhs(t + c5 * dt, y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Matrix k6 = rhs(t + dt, y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Matrix y_new = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double t_new = hits_target ? target : t + dt;
        const Matrix k7 = rhs(t_new, y_new);
        const Matrix err_vec = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale = tol * std::max({1.0, max_abs(y), max_abs(y_new)});
        double err = max_abs(err_vec) / scale;
        if (!std::isfinite(err) || !all_finite(y_new)) {
            if (step <= min_step) {
                fail(ErrorKind::NonFinite, "state became non-finite at t = " + std::to_string(t));
            }
            h = 0.25 * step;
            last_rejected = true;
            continue;
        }

        if (err <= 1.0) {
            traj.max_local_error = std::max(traj.max_local_error, err * tol);
            ++traj.steps;
            y = std::move(y_new);
            t = t_new;
            k1 = k7;
            double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.17) * std::pow(err_prev, 0.04);
            factor = std::clamp(factor, 0.2, 10.0);
            if (last_rejected) {
                factor = std::min(factor, 1.0);
            }
            err_prev = std::max(err, 1e-4);
            last_rejected = false;
            if (hits_target) {
                while (next_out < outputs.size() && outputs[next_out] == target) {
                    traj.states.push_back(y);
                    ++next_out;
                }
                // Don't let a short landing step shrink the controller's step.
                h = std::min(max_step, std::max(h, step * factor));
            } else {
                h = std::min(max_step, step * factor);
            }
        } else {
            h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
            last_rejected = true;
        }
    }
    return traj;
}

std::vector<EvolutionResult> propagate(const std::function<Matrix(double)>& generator, double epsilon,
                                       double s, std::span<const double> times, const OmegaProfile& omega,
                                       double tol) {
    require(epsilon > 0.0, "propagate: epsilon must be positive");
    const Matrix g0 = generator(s);
    const Eigen::Index dim = g0.rows();
    const Complex scale = -I_unit / epsilon;
    MatrixRhs rhs;
    if (omega.is_zero()) {
        rhs = [&](double t, const Matrix& y) -> Matrix { return scale * (generator(t) * y); };
    } else {
        rhs = [&](double t, const Matrix& y) -> Matrix {
            return scale * (generator(t) * y) - (omega(t) / epsilon) * y;
        };
    }
    const Trajectory traj = integrate_matrix_ode(rhs, identity(dim), s, times, tol);
    std::vector<EvolutionResult> out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        EvolutionResult r;
        r.epsilon = epsilon;
        r.s = s;
        r.t = times[i];
        r.matrix = traj.states[i];
        r.log_scale = omega.integral(s, times[i]) / epsilon;
        r.steps = traj.steps;
        r.est_error = traj.max_local_error;
        if (!all_finite(r.matrix)) {
            fail(ErrorKind::NonFinite, "propagator state is not finite");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<EvolutionResult> evolve_sampled(const GeneratorFamily& family, double epsilon, double s,
                                            std::span<const double> times, const OmegaProfile& omega,
                                            double tol) {
    require(epsilon > 0.0 && epsilon <= 1.0, "evolve: epsilon must lie in (0, 1]");
    require(s >= 0.0 && s <= 1.0, "evolve: s must lie in [0, 1]");
    for (const double t : times) {
        require(t >= s && t <= 1.0, "evolve: sample times must satisfy s <= t <= 1");
    }
    return propagate([&family](double t) { return family.eval(t); }, epsilon, s, times, omega, tol);
}

EvolutionResult evolve(const GeneratorFamily& family, double epsilon, double s, double t,
                       const OmegaProfile& omega, double tol) {
    const double times[] = {t};
    return evolve_sampled(family, epsilon, s, times, omega, tol).front();
}

Matrix dyson_expand(const GeneratorFamily& base, const GeneratorFamily& perturbation, double epsilon,
                    double s, double t, int order, double tol) {
    if (order > 6) {
        fail(ErrorKind::OrderTooHigh, "dyson_expand supports order <= 6, got " + std::to_string(order));
    }
    require(order >= 0, "dyson_expand: order must be non-negative");
    if (base.dim() != perturbation.dim()) {
        fail(ErrorKind::DimensionMismatch, "dyson_expand: base and perturbation differ in dimension");
    }
    require(epsilon > 0.0, "dyson_expand: epsilon must be positive");
    require(s <= t, "dyson_expand: need s <= t");
    const Eigen::Index dim = base.dim();
    if (t == s) {
        return identity(dim);
    }

    constexpr int p = 12;
    const GaussRule rule = gauss_legendre(p);
    const double rate = 1.0 + operator_norm(base.eval(s)) / epsilon + operator_norm(perturbation.eval(s));
    const int panels = std::max(1, static_cast<int>(std::ceil((t - s) * rate / 0.5)));
    const double width = (t - s) / panels;

    // Cumulative integration weights on the reference panel [-1, 1].
    RealMatrix cumulative(p, p);
    for (int i = 0; i < p; ++i) {
        const double xi = rule.nodes[static_cast<std::size_t>(i)];
        for (int j = 0; j < p; ++j) {
            double acc = 0.0;
            for (int m = 0; m < p; ++m) {
                const double y = -1.0 + 0.5 * (xi + 1.0) * (rule.nodes[static_cast<std::size_t>(m)] + 1.0);
                double lj = 1.0;
                for (int r = 0; r < p; ++r) {
                    if (r != j) {
                        lj *= (y - rule.nodes[static_cast<std::size_t>(r)]) /
                              (rule.nodes[static_cast<std::size_t>(j)] - rule.nodes[static_cast<std::size_t>(r)]);
                    }
                }
                acc += 0.5 * (xi + 1.0) * rule.weights[static_cast<std::size_t>(m)] * lj;
            }
            cumulative(i, j) = acc;
        }
    }

    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(panels * p + 1));
    for (int k = 0; k < panels; ++k) {
        const double lo = s + k * width;
        for (int i = 0; i < p; ++i) {
            times.push_back(lo + 0.5 * width * (rule.nodes[static_cast<std::size_t>(i)] + 1.0));
        }
    }
    times.push_back(t);
    const auto base_path =
        propagate([&base](double u) { return base.eval(u); }, epsilon, s, times, OmegaProfile::zero(), tol);

    const std::size_t count = static_cast<std::size_t>(panels * p);
    // Interaction-picture perturbation B_I(u) = T(u,s)^{-1} B(u) T(u,s).
    std::vector<Matrix> interaction(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Matrix& tu = base_path[i].matrix;
        interaction[i] = tu.partialPivLu().solve(perturbation.eval(times[i]) * tu);
    }

    std::vector<Matrix> previous(count, identity(dim));
    Matrix total_at_t = identity(dim);
    for (int n = 1; n <= order; ++n) {
        std::vector<Matrix> current(count);
        Matrix start = Matrix::Zero(dim, dim);
        for (int k = 0; k < panels; ++k) {
            std::vector<Matrix> f(static_cast<std::size_t>(p));
            for (int j = 0; j < p; ++j) {
                const std::size_t idx = static_cast<std::size_t>(k * p + j);
                f[static_cast<std::size_t>(j)] = -I_unit * (interaction[idx] * previous[idx]);
            }
            for (int i = 0; i < p; ++i) {
                Matrix acc = start;
                for (int j = 0; j < p; ++j) {
                    acc += 0.5 * width * cumulative(i, j) * f[static_cast<std::size_t>(j)];
                }
                current[static_cast<std::size_t>(k * p + i)] = std::move(acc);
            }
            for (int j = 0; j < p; ++j) {
                start += 0.5 * width * rule.weights[static_cast<std::size_t>(j)] * f[static_cast<std::size_t>(j)];
            }
        }
        total_at_t += start;
        previous = std::move(current);
    }
    return base_path.back().matrix * total_at_t;
}

double perturbation_bound_check(double m, const std::function<double(double)>& omega,
                                const std::function<double(double)>& b_norm, double s, double t) {
    require(m >= 1.0, "perturbation_bound_check: M must be >= 1");
    const double exponent = integrate([&](double u) { return omega(u) + m * b_norm(u); }, s, t);
    return m * std::exp(exponent);
}

} // namespace salab
