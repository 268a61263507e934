#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace salab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr Complex I_unit{0.0, 1.0};

/// Largest singular value (operator 2-norm).
double operator_norm(const Matrix& m);

/// Smallest singular value.
double min_singular_value(const Matrix& m);

/// Matrix exponential by scaling-and-squaring with a Pade approximant.
Matrix expm(const Matrix& m);

bool all_finite(const Matrix& m);

Matrix identity(Eigen::Index dim);

/// Integer power by repeated squaring; p >= 0.
Matrix matrix_power(const Matrix& m, int p);

/// Magnitude carried as value * exp(log_scale) so that quantities growing
/// like exp(c/eps) never overflow in double precision.
struct ScaledValue {
    double value = 0.0;
    double log_scale = 0.0;

    /// Natural log of the represented magnitude (-inf for zero).
    double log() const;
    /// value * exp(log_scale); may overflow to inf.
    double raw() const;
};

struct ScaledMatrix {
    Matrix value;
    double log_scale = 0.0;

    /// Raw matrix; throws PhaseOverflow when log_scale exceeds the materialize limit.
    Matrix materialize() const;
    ScaledValue norm() const;
};

/// Largest log_scale for which ScaledMatrix::materialize returns a raw matrix.
inline constexpr double kMaterializeLimit = 200.0;

ScaledMatrix operator*(const ScaledMatrix& a, const ScaledMatrix& b);

} // namespace salab
