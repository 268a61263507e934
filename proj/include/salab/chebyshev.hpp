#pragma once

#include "salab/linalg.hpp"

#include <span>
#include <vector>

namespace salab {

/// Chebyshev series on [0, 1]: f(t) = sum_k c_k T_k(2t - 1).
class ChebSeries {
public:
    ChebSeries() = default;
    explicit ChebSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

    double operator()(double t) const;
    /// Antiderivative vanishing at t = 0.
    ChebSeries antiderivative() const;
    const std::vector<double>& coeffs() const { return coeffs_; }

private:
    std::vector<double> coeffs_;
};

/// Chebyshev-Gauss-Lobatto collocation grid mapped to [0, 1] (ascending),
/// with its spectral differentiation matrix.
class TimeGrid {
public:
    explicit TimeGrid(int points = 65);

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }
    double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    const RealMatrix& differentiation() const { return diff_; }

    /// Chebyshev coefficients of the interpolant of real samples.
    std::vector<double> coefficients(std::span<const double> values) const;
    ChebSeries series(std::span<const double> values) const;

    /// Entrywise spectral derivative of matrix samples.
    std::vector<Matrix> differentiate(const std::vector<Matrix>& values) const;
    /// Entrywise indefinite integral from t = 0, evaluated at the nodes.
    std::vector<Matrix> integrate(const std::vector<Matrix>& values) const;
    std::vector<Complex> integrate(const std::vector<Complex>& values) const;

    /// Barycentric interpolation of matrix samples at t.
    Matrix interpolate(const std::vector<Matrix>& values, double t) const;
    double interpolate(std::span<const double> values, double t) const;

    /// Ratio of the trailing Chebyshev coefficient magnitudes to the largest
    /// one, maximised over the matrix entries; small means resolved.
    double tail_ratio(const std::vector<Matrix>& values) const;

private:
    std::vector<double> nodes_;
    std::vector<double> bary_;
    RealMatrix diff_;
    RealMatrix integ_; ///< cumulative-integration matrix from t = 0
};

} // namespace salab
