#pragma once

#include "salab/families.hpp"
#include "salab/fitting.hpp"
#include "salab/propagator.hpp"

#include <optional>
#include <span>
#include <vector>

namespace salab {

/// N(t) with N(t)^d == 0, plus an optional bounded perturbation A(t) for
/// eps Y' = (N + eps A) Y.
struct NilpotentFamily {
    GeneratorFamily family;
    int index = 0; ///< smallest d with N^d == 0; 0 when N == 0
    std::optional<GeneratorFamily> perturbation;
};

/// Detects the nilpotency index on 50 sampled times (relative threshold
/// 1e-10). Throws NotNilpotent when no power up to dim vanishes.
NilpotentFamily make_nilpotent_family(const GeneratorFamily& n,
                                      std::optional<GeneratorFamily> perturbation = std::nullopt);

/// Nilpotency index of a single matrix, or NotNilpotent.
int nilpotency_index(const Matrix& n, double rel_tol = 1e-10);

/// Y(t, s) for eps Y' = (N + eps A) Y; s > t is allowed.
EvolutionResult evolve_nilpotent(const NilpotentFamily& nf, double epsilon, double s, double t, double tol);

struct GrowthReport {
    std::vector<SeriesPoint> series; ///< sup_{s,t} |Y(t, s)| per eps
    GrowthFit fit;                   ///< c eps^{-p} exp(d / eps^beta), or bounded
    std::optional<GrowthFit> power;  ///< c eps^{-p} alternative
    std::vector<double> argmax_s;
    std::vector<double> argmax_t;
};

/// sup over a 9x9 (s, t) grid on [0,1]^2, refined once around the maximiser,
/// for each eps; then the growth-law fit.
GrowthReport growth_exponent(const NilpotentFamily& nf, std::span<const double> epsilon_grid, double tol);

enum class Verdict { Bounded, Unbounded };

struct DichotomyResult {
    Verdict verdict = Verdict::Bounded;
    std::vector<double> epsilons;
    std::vector<double> norms; ///< |Y(t, s)| per eps
    double ratio = 1.0;        ///< max / min over the grid
    double sup_n = 0.0;        ///< sup_u |N(u)| on [min(s,t), max(s,t)]
};

/// Numerical verdict (ratio < 10 means bounded) cross-checked against
/// N == 0 on the interval; disagreement throws VerdictConflict.
DichotomyResult boundedness_dichotomy(const NilpotentFamily& nf, std::span<const double> epsilon_grid, double s,
                                      double t, double tol);

/// Y(t, 0) for N(t) = [[t, -1], [t^2, -t]] in closed form (cosh / sinh of t / sqrt(eps)).
Matrix example_nilpotent_solution(double epsilon, double t);

/// sup over s in [0, 50/delta] of |exp((N - delta) s)|.
double shifted_nilpotent_bound(const Matrix& n, double delta);

std::string_view to_string(Verdict v);

} // namespace salab
