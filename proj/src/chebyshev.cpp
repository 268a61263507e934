#include "salab/chebyshev.hpp"

#include "salab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace salab {

double ChebSeries::operator()(double t) const {
    if (coeffs_.empty()) {
        return 0.0;
    }
    // Clenshaw recurrence in x = 2t - 1.
    const double x = 2.0 * t - 1.0;
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 1;) {
        const double b0 = 2.0 * x * b1 - b2 + coeffs_[k];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + coeffs_[0];
}

ChebSeries ChebSeries::antiderivative() const {
    const std::size_t n = coeffs_.size();
    if (n == 0) {
        return {};
    }
    // d/dt = 2 d/dx, so integrating in t halves the x-antiderivative.
    std::vector<double> c(coeffs_);
    c.push_back(0.0);
    c.push_back(0.0);
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double prev = (k == 1) ? 2.0 * c[0] : c[k - 1];
        out[k] = (prev - c[k + 1]) / (2.0 * static_cast<double>(k));
    }
    for (auto& v : out) {
        v *= 0.5;
    }
    ChebSeries result(out);
    const double at_zero = result(0.0);
    result.coeffs_[0] -= at_zero;
    return result;
}

TimeGrid::TimeGrid(int points) {
    require(points >= 3, "TimeGrid: need at least 3 points");
    const int n = points - 1;
    nodes_.resize(static_cast<std::size_t>(points));
    std::vector<double> x(static_cast<std::size_t>(points));
    for (int j = 0; j <= n; ++j) {
        x[static_cast<std::size_t>(j)] = std::cos(std::numbers::pi * j / n);
        // t ascending: t = (1 - x)/2
        nodes_[static_cast<std::size_t>(j)] = 0.5 * (1.0 - x[static_cast<std::size_t>(j)]);
    }
    nodes_.front() = 0.0;
    nodes_.back() = 1.0;

    bary_.resize(static_cast<std::size_t>(points));
    for (int j = 0; j <= n; ++j) {
        double w = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == n) {
            w *= 0.5;
        }
        bary_[static_cast<std::size_t>(j)] = w;
    }

    // Differentiation matrix in x (Trefethen's cheb), diagonal by negative sums.
    RealMatrix dx = RealMatrix::Zero(points, points);
    auto c = [n](int i) { return (i == 0 || i == n) ? 2.0 : 1.0; };
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            if (i == j) {
                continue;
            }
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            dx(i, j) = c(i) / c(j) * sign / (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
        }
    }
    for (int i = 0; i <= n; ++i) {
        dx(i, i) = -dx.row(i).sum();
    }
    diff_ = -2.0 * dx; // dt = -dx/2

    // Cumulative integration: coefficients -> antiderivative -> node values.
    integ_ = RealMatrix::Zero(points, points);
    std::vector<double> unit(static_cast<std::size_t>(points), 0.0);
    for (int j = 0; j < points; ++j) {
        std::fill(unit.begin(), unit.end(), 0.0);
        unit[static_cast<std::size_t>(j)] = 1.0;
        const ChebSeries anti = series(unit).antiderivative();
        for (int i = 0; i < points; ++i) {
            integ_(i, j) = anti(nodes_[static_cast<std::size_t>(i)]);
        }
    }
}

std::vector<double> TimeGrid::coefficients(std::span<const double> values) const {
    const int points = size();
    require(static_cast<int>(values.size()) == points, "TimeGrid: sample count mismatch");
    const int n = points - 1;
    std::vector<double> coeffs(static_cast<std::size_t>(points), 0.0);
    // Node j carries x_j = cos(pi j / n) = 1 - 2 t_j, so the series in 2t - 1
    // picks up a factor (-1)^k.
    for (int k = 0; k <= n; ++k) {
        double s = 0.0;
        for (int j = 0; j <= n; ++j) {
            double w = (j == 0 || j == n) ? 0.5 : 1.0;
            s += w * values[static_cast<std::size_t>(j)] * std::cos(std::numbers::pi * j * k / n);
        }
        double scale = 2.0 / n;
        if (k == 0 || k == n) {
            scale *= 0.5;
        }
        coeffs[static_cast<std::size_t>(k)] = (k % 2 == 0 ? 1.0 : -1.0) * s * scale;
    }
    return coeffs;
}

ChebSeries TimeGrid::series(std::span<const double> values) const {
    return ChebSeries(coefficients(values));
}

namespace {

template <typename F>
std::vector<Matrix> apply_entrywise(const std::vector<Matrix>& values, const RealMatrix& op, F&&) {
    const std::size_t points = values.size();
    const Eigen::Index rows = values.front().rows();
    const Eigen::Index cols = values.front().cols();
    // Stack samples as (points x entries) and apply the real operator.
    Eigen::MatrixXcd stacked(static_cast<Eigen::Index>(points), rows * cols);
    for (std::size_t i = 0; i < points; ++i) {
        stacked.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXcd>(values[i].data(), rows * cols);
    }
    const Eigen::MatrixXcd result = op.cast<Complex>() * stacked;
    std::vector<Matrix> out(points, Matrix(rows, cols));
    for (std::size_t i = 0; i < points; ++i) {
        Eigen::Map<Eigen::RowVectorXcd>(out[i].data(), rows * cols) = result.row(static_cast<Eigen::Index>(i));
    }
    return out;
}

} // namespace

std::vector<Matrix> TimeGrid::differentiate(const std::vector<Matrix>& values) const {
    require(static_cast<int>(values.size()) == size(), "TimeGrid: sample count mismatch");
    return apply_entrywise(values, diff_, 0);
}

std::vector<Matrix> TimeGrid::integrate(const std::vector<Matrix>& values) const {
    require(static_cast<int>(values.size()) == size(), "TimeGrid: sample count mismatch");
    return apply_entrywise(values, integ_, 0);
}

std::vector<Complex> TimeGrid::integrate(const std::vector<Complex>& values) const {
    require(static_cast<int>(values.size()) == size(), "TimeGrid: sample count mismatch");
    Eigen::Map<const Eigen::VectorXcd> v(values.data(), static_cast<Eigen::Index>(values.size()));
    const Eigen::VectorXcd r = integ_.cast<Complex>() * v;
    return {r.data(), r.data() + r.size()};
}

Matrix TimeGrid::interpolate(const std::vector<Matrix>& values, double t) const {
    require(static_cast<int>(values.size()) == size(), "TimeGrid: sample count mismatch");
    Matrix num = Matrix::Zero(values.front().rows(), values.front().cols());
    double den = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        const double diff = t - nodes_[j];
        if (diff == 0.0) {
            return values[j];
        }
        const double w = bary_[j] / diff;
        num += w * values[j];
        den += w;
    }
    return num / den;
}

double TimeGrid::interpolate(std::span<const double> values, double t) const {
    require(static_cast<int>(values.size()) == size(), "TimeGrid: sample count mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        const double diff = t - nodes_[j];
        if (diff == 0.0) {
            return values[j];
        }
        const double w = bary_[j] / diff;
        num += w * values[j];
        den += w;
    }
    return num / den;
}

double TimeGrid::tail_ratio(const std::vector<Matrix>& values) const {
    require(static_cast<int>(values.size()) == size(), "TimeGrid: sample count mismatch");
    const Eigen::Index entries = values.front().size();
    std::vector<double> samples(values.size());
    double head = 0.0;
    double tail = 0.0;
    for (Eigen::Index e = 0; e < entries; ++e) {
        for (int part = 0; part < 2; ++part) {
            for (std::size_t i = 0; i < values.size(); ++i) {
                const Complex z = values[i].data()[e];
                samples[i] = part == 0 ? z.real() : z.imag();
            }
            const auto c = coefficients(samples);
            for (std::size_t k = 0; k < c.size(); ++k) {
                head = std::max(head, std::abs(c[k]));
                if (k + 4 >= c.size()) {
                    tail = std::max(tail, std::abs(c[k]));
                }
            }
        }
    }
    return head == 0.0 ? 0.0 : tail / head;
}

} // namespace salab
