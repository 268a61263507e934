#pragma once

#include "salab/fitting.hpp"
#include "salab/hierarchy.hpp"
#include "salab/linalg.hpp"
#include "salab/propagator.hpp"
#include "salab/spectral.hpp"

#include <span>
#include <vector>

namespace salab {

/// Kato intertwiner i W' = K^q W, W(0) = I, sampled on the hierarchy grid.
struct Intertwiner {
    int q = 0;
    double epsilon = 0.0;
    std::vector<double> times;
    std::vector<Matrix> w;
    std::vector<Matrix> w_inverse; ///< from the adjoint equation, not by inversion
    std::vector<double> residuals; ///< per group (complement last): sup |W P_k(0) - P_k(t) W|
    double inverse_residual = 0.0; ///< sup |W W^{-1} - I|
    double sup_norm = 0.0;
    double sup_inverse_norm = 0.0;
};

Intertwiner build_intertwiner(const Hierarchy& h, int q, double tol = 1e-12);

/// V^q against U in the omega-rescaled frame, with the block evolutions
/// Phi = W^{-1} V and dephased Psi_j = exp(i int lambda_j / eps) Phi P_j(0).
struct ApproximationBundle {
    double epsilon = 0.0;
    int q = 0;
    std::vector<double> times;
    std::vector<EvolutionResult> u;
    std::vector<EvolutionResult> v;
    std::vector<Matrix> phi;                    ///< rescaled, same log_scale as v
    std::vector<std::vector<ScaledMatrix>> psi; ///< [group][node]
    std::vector<double> error_vs_u;             ///< per group (complement last): sup |(U - V) P_k(0)|
    double total_error = 0.0;                   ///< sup_t |U - V|
    std::vector<double> error_profile;          ///< |U - V| at each node
    double intertwining_residual = 0.0;         ///< sup |V P_k(0) - P_k(t) V| over k, t
    double block_residual = 0.0;                ///< sup |[Phi, P_k(0)]| over k, t
    double v_scale = 0.0;                       ///< sup |V| (rescaled)
    std::vector<double> omega;                  ///< omega at each node
    Intertwiner intertwiner;

    /// sup_t |Psi_j(t)| as a scaled magnitude.
    ScaledValue psi_sup(std::size_t group) const;
};

ApproximationBundle build_approximation(const Hierarchy& h, int q, double tol);

/// |P_j(t) U(t, s) P_k(s)| with U's log_scale carried along.
ScaledValue transition_amplitude(const EvolutionResult& u, const SpectralDecomposition& at_t,
                                 const SpectralDecomposition& at_s, std::size_t j, std::size_t k);
ScaledValue transition_amplitude(const EvolutionResult& u, const Matrix& p_t, const Matrix& p_s);

/// Fits sup_t |Psi_j| over bundles built at different eps.
GrowthFit dephased_growth(std::span<const ApproximationBundle> bundles, std::size_t group);

/// Generator of Psi_j extracted numerically (i eps Psi' Psi^+ on Ran P_j(0)),
/// minus the conjugated nilpotent W^{-1} P D P W, divided by eps; sup over
/// nodes. Stays O(1) in eps when the generator identity holds.
double psi_generator_remainder(const ApproximationBundle& bundle, const Hierarchy& h, std::size_t group);

} // namespace salab
