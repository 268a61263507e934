#pragma once

#include <functional>
#include <vector>

namespace salab {

struct GaussRule {
    std::vector<double> nodes;   ///< on [-1, 1], ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n).
GaussRule gauss_legendre(int n);

/// Composite Gauss-Legendre integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 16,
                 int order = 12);

} // namespace salab
