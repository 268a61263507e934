#pragma once

#include "salab/chebyshev.hpp"
#include "salab/families.hpp"
#include "salab/fitting.hpp"
#include "salab/linalg.hpp"
#include "salab/spectral.hpp"

#include <optional>
#include <span>
#include <vector>

namespace salab {

/// One rung of the ladder, sampled on the grid nodes.
struct HierarchyLevel {
    std::vector<Matrix> generator;                ///< H^q = H - eps K^{q-1}
    std::vector<std::vector<Matrix>> projectors;  ///< [group][node]; last entry is the complement
    std::vector<Matrix> connection;               ///< K^q = i sum_k P_k' P_k
};

struct HierarchyOptions {
    bool allow_regrid = true;      ///< double the grid once on GridTooCoarse
    double self_test_tol = 1e-8;   ///< differentiate-then-integrate check on K^0, relative
    double tail_tol = 1e-6;        ///< trailing Chebyshev coefficients of K^0, relative
    double trivial_tol = 1e-12;    ///< sup |K^0| below this counts as K^0 == 0
    int stop_after_increases = 2;
};

struct Hierarchy {
    GeneratorFamily family;
    double epsilon = 0.0;
    double gap_floor = 0.0;
    TimeGrid grid;
    std::vector<HierarchyLevel> levels;
    std::vector<double> deltas; ///< deltas[0] = sup|K^0|, deltas[q] = sup|K^q - K^{q-1}|
    int q_star = 0;
    bool trivially_converged = false;
    std::optional<GrowthFit> fit; ///< factorial-geometric fit of deltas[1..], when enough levels

    // Level-0 data, tracked continuously across nodes: [group][node].
    std::vector<std::vector<Complex>> eigenvalues;
    std::vector<std::vector<Matrix>> nilpotents;
    std::vector<std::vector<Contour>> contours;
    std::vector<int> multiplicities;

    std::size_t group_count() const { return multiplicities.size(); }
    int max_level() const { return static_cast<int>(levels.size()) - 1; }

    /// K^q interpolated at t.
    Matrix connection_at(int q, double t) const;
    /// H^q(t) = H(t) - eps K^{q-1}(t), with H evaluated exactly.
    Matrix generator_at(int q, double t) const;
    /// H^q(t) + eps K^q(t), the generator of V^q.
    Matrix approximation_generator_at(int q, double t) const;
    Matrix projector_at(int q, std::size_t group, double t) const;
};

/// Builds the superadiabatic ladder K^q, H^q, P^q up to q_max, stopping early
/// once delta has increased for two consecutive levels.
Hierarchy build_hierarchy(const GeneratorFamily& family, double epsilon, double gap_floor, const TimeGrid& grid,
                          int q_max, const HierarchyOptions& options = {});

/// Max over nodes of |integrate(differentiate(K)) - (K - K(0))|.
double differentiation_self_test(const TimeGrid& grid, const std::vector<Matrix>& samples);

/// Fits log(delta at q_star) against 1/eps over hierarchies at several eps.
/// The result's params also carry the fitted slope of q_star against 1/eps
/// ("g") and its r^2 ("g_r_squared").
GrowthFit fit_delta_decay(std::span<const Hierarchy> hierarchies);

struct EffectiveGenerator {
    Complex lambda;
    Matrix projector; ///< P_j^q at the node
    Matrix d_part;    ///< P_j^q D_j P_j^q
    Matrix j_part;    ///< J_j^q (unscaled)
    double epsilon = 0.0;

    /// lambda P + D + eps J, equal to H^q P_j^q.
    Matrix reconstruct() const { return lambda * projector + d_part + epsilon * j_part; }
};

EffectiveGenerator effective_generator(const Hierarchy& h, int q, std::size_t group, int node);

} // namespace salab
