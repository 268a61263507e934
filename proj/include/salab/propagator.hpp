#pragma once

#include "salab/chebyshev.hpp"
#include "salab/families.hpp"
#include "salab/linalg.hpp"

#include <functional>
#include <span>
#include <vector>

namespace salab {

/// omega(t) = max Im lambda_k(t), held as a Chebyshev interpolant so that the
/// removed exponent integral(omega)/eps is exactly consistent with the
/// rescaled generator.
class OmegaProfile {
public:
    static OmegaProfile zero();
    static OmegaProfile from_family(const GeneratorFamily& family, int points = 65);
    static OmegaProfile from_samples(const TimeGrid& grid, std::span<const double> values);

    double operator()(double t) const;
    double integral(double s, double t) const;
    bool is_zero() const { return zero_; }

private:
    bool zero_ = true;
    ChebSeries values_;
    ChebSeries antiderivative_;
};

/// Rescaled propagator exp(-integral_s^t omega / eps) U(t, s), with the removed
/// exponent kept in log_scale.
struct EvolutionResult {
    double epsilon = 0.0;
    double s = 0.0;
    double t = 0.0;
    Matrix matrix;
    double log_scale = 0.0;
    int steps = 0;
    double est_error = 0.0;

    ScaledMatrix scaled() const { return {matrix, log_scale}; }
    /// Unrescaled U(t, s); PhaseOverflow when log_scale is too large.
    Matrix raw() const { return scaled().materialize(); }
};

using MatrixRhs = std::function<Matrix(double t, const Matrix& y)>;

struct Trajectory {
    std::vector<Matrix> states; ///< one per requested output time
    int steps = 0;
    double max_local_error = 0.0; ///< largest accepted local error estimate (scaled units)
};

/// Dormand-Prince 5(4) with PI step control for Y' = rhs(t, Y). Output times
/// must be monotone in one direction away from t0; either direction works.
Trajectory integrate_matrix_ode(const MatrixRhs& rhs, const Matrix& y0, double t0,
                                std::span<const double> outputs, double tol);

/// Solves i eps dU/dt = G(t) U from time s, sampling at `times` (monotone,
/// either direction), in the omega-rescaled frame.
std::vector<EvolutionResult> propagate(const std::function<Matrix(double)>& generator, double epsilon,
                                       double s, std::span<const double> times, const OmegaProfile& omega,
                                       double tol);

/// U(t, s) for i eps dU/dt = A(t) U with 0 <= s <= t <= 1.
EvolutionResult evolve(const GeneratorFamily& family, double epsilon, double s, double t,
                       const OmegaProfile& omega, double tol);

/// Same as evolve, sampled at every entry of `times` (ascending, all >= s).
std::vector<EvolutionResult> evolve_sampled(const GeneratorFamily& family, double epsilon, double s,
                                            std::span<const double> times, const OmegaProfile& omega,
                                            double tol);

/// Truncated Dyson series for S(t, s), where i eps dT/dt = A T and
/// i eps dS/dt = (A + eps B) S, i.e. i dS/dt = (A/eps + B) S.
Matrix dyson_expand(const GeneratorFamily& base, const GeneratorFamily& perturbation, double epsilon,
                    double s, double t, int order, double tol = 1e-13);

/// M exp(integral_s^t (omega(u) + M |B(u)|) du).
double perturbation_bound_check(double m, const std::function<double(double)>& omega,
                                const std::function<double(double)>& b_norm, double s, double t);

} // namespace salab
