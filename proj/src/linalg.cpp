#include "salab/linalg.hpp"

#include "salab/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

namespace salab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NearSingular: return "NearSingular";
    case ErrorKind::ContourTooClose: return "ContourTooClose";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::GapViolation: return "GapViolation";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::OrderTooHigh: return "OrderTooHigh";
    case ErrorKind::GapClosed: return "GapClosed";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::PhaseOverflow: return "PhaseOverflow";
    case ErrorKind::VerdictConflict: return "VerdictConflict";
    case ErrorKind::NotNilpotent: return "NotNilpotent";
    case ErrorKind::DegenerateParams: return "DegenerateParams";
    case ErrorKind::WrongSignParams: return "WrongSignParams";
    case ErrorKind::Config: return "ConfigError";
    }
    return "Unknown";
}

double operator_norm(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double min_singular_value(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

Matrix expm(const Matrix& m) {
    return m.exp();
}

bool all_finite(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const Complex z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            return false;
        }
    }
    return true;
}

Matrix identity(Eigen::Index dim) {
    return Matrix::Identity(dim, dim);
}

Matrix matrix_power(const Matrix& m, int p) {
    require(p >= 0, "matrix_power: negative exponent");
    Matrix result = identity(m.rows());
    Matrix base = m;
    while (p > 0) {
        if (p & 1) {
            result = result * base;
        }
        p >>= 1;
        if (p > 0) {
            base = base * base;
        }
    }
    return result;
}

double ScaledValue::log() const {
    if (value <= 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return std::log(value) + log_scale;
}

double ScaledValue::raw() const {
    return value * std::exp(log_scale);
}

Matrix ScaledMatrix::materialize() const {
    if (log_scale > kMaterializeLimit) {
        fail(ErrorKind::PhaseOverflow, "log_scale " + std::to_string(log_scale) +
                                           " exceeds the materialization limit");
    }
    return value * std::exp(log_scale);
}

ScaledValue ScaledMatrix::norm() const {
    return {operator_norm(value), log_scale};
}

ScaledMatrix operator*(const ScaledMatrix& a, const ScaledMatrix& b) {
    return {a.value * b.value, a.log_scale + b.log_scale};
}

} // namespace salab
