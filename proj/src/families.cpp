#include "salab/families.hpp"

#include "salab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace salab {

std::string_view to_string(FamilyKind kind) {
    switch (kind) {
    case FamilyKind::IntroExample: return "intro_example";
    case FamilyKind::NilpotentExample: return "nilpotent_example";
    case FamilyKind::Polynomial: return "polynomial";
    case FamilyKind::RotatedConstant: return "rotated_constant";
    case FamilyKind::TwoLevel: return "two_level";
    case FamilyKind::Sampled: return "sampled";
    case FamilyKind::Derived: return "derived";
    }
    return "unknown";
}

GeneratorFamily::GeneratorFamily(Eigen::Index dim, FamilyKind kind, Fn eval, Fn deriv)
    : dim_(dim), kind_(kind), eval_(std::move(eval)), deriv_(std::move(deriv)) {
    require(dim_ > 0, "GeneratorFamily: dimension must be positive");
}

Matrix intro_generator(Complex a) {
    Matrix h = Matrix::Zero(3, 3);
    h(0, 1) = a;
    h(2, 2) = 1.0;
    return h;
}

Matrix intro_rotation(Complex k) {
    Matrix l = Matrix::Zero(3, 3);
    l(0, 2) = -k;
    l(1, 0) = -k;
    return l;
}

GeneratorFamily rotated_constant(const Matrix& h0, const Matrix& l) {
    require(h0.rows() == h0.cols() && l.rows() == l.cols(), "rotated_constant: matrices must be square");
    if (h0.rows() != l.rows()) {
        fail(ErrorKind::DimensionMismatch, "rotated_constant: H0 and L differ in dimension");
    }
    auto data = std::make_shared<const std::pair<Matrix, Matrix>>(h0, l);
    auto eval = [data](double t) -> Matrix {
        const auto& [h, gen] = *data;
        const Matrix s = expm(-I_unit * t * gen);
        const Matrix s_inv = expm(I_unit * t * gen);
        return s * h * s_inv;
    };
    auto deriv = [data, eval](double t) -> Matrix {
        const Matrix& gen = data->second;
        const Matrix ht = eval(t);
        return -I_unit * (gen * ht - ht * gen);
    };
    return GeneratorFamily(h0.rows(), FamilyKind::RotatedConstant, eval, deriv);
}

GeneratorFamily intro_example(Complex a, Complex k) {
    require(a != 0.0 && k != 0.0, "intro_example: a and k must be non-zero");
    GeneratorFamily base = rotated_constant(intro_generator(a), intro_rotation(k));
    return GeneratorFamily(3, FamilyKind::IntroExample, [base](double t) { return base.eval(t); },
                           [base](double t) { return base.deriv(t); });
}

GeneratorFamily nilpotent_example() {
    auto eval = [](double t) -> Matrix {
        Matrix n(2, 2);
        n << t, -1.0, t * t, -t;
        return n;
    };
    auto deriv = [](double t) -> Matrix {
        Matrix d(2, 2);
        d << 1.0, 0.0, 2.0 * t, -1.0;
        return d;
    };
    return GeneratorFamily(2, FamilyKind::NilpotentExample, eval, deriv);
}

GeneratorFamily polynomial_family(std::vector<Matrix> coeffs) {
    require(!coeffs.empty(), "polynomial_family: at least one coefficient required");
    const Eigen::Index dim = coeffs.front().rows();
    for (const auto& c : coeffs) {
        if (c.rows() != dim || c.cols() != dim) {
            fail(ErrorKind::DimensionMismatch, "polynomial_family: coefficients differ in shape");
        }
    }
    auto data = std::make_shared<const std::vector<Matrix>>(std::move(coeffs));
    auto eval = [data, dim](double t) -> Matrix {
        Matrix acc = Matrix::Zero(dim, dim);
        for (auto it = data->rbegin(); it != data->rend(); ++it) {
            acc = acc * t + *it;
        }
        return acc;
    };
    auto deriv = [data, dim](double t) -> Matrix {
        Matrix acc = Matrix::Zero(dim, dim);
        for (std::size_t p = data->size(); p-- > 1;) {
            acc = acc * t + static_cast<double>(p) * (*data)[p];
        }
        return acc;
    };
    return GeneratorFamily(dim, FamilyKind::Polynomial, eval, deriv);
}

GeneratorFamily two_level(double delta, double coupling) {
    require(delta > 0.0, "two_level: delta must be positive");
    auto eval = [delta, coupling](double t) -> Matrix {
        const double z = std::tanh((t - 0.5) / delta);
        Matrix h(2, 2);
        h << 0.5 * z, 0.5 * coupling, 0.5 * coupling, -0.5 * z;
        return h;
    };
    auto deriv = [delta](double t) -> Matrix {
        const double c = std::cosh((t - 0.5) / delta);
        const double dz = 1.0 / (delta * c * c);
        Matrix d = Matrix::Zero(2, 2);
        d(0, 0) = 0.5 * dz;
        d(1, 1) = -0.5 * dz;
        return d;
    };
    return GeneratorFamily(2, FamilyKind::TwoLevel, eval, deriv);
}

GeneratorFamily constant_family(const Matrix& a) {
    return polynomial_family({a});
}

GeneratorFamily zero_family(Eigen::Index dim) {
    return constant_family(Matrix::Zero(dim, dim));
}

GeneratorFamily linear_combination(Complex alpha, const GeneratorFamily& f, Complex beta,
                                   const GeneratorFamily& g) {
    if (f.dim() != g.dim()) {
        fail(ErrorKind::DimensionMismatch, "linear_combination: dimensions differ");
    }
    return GeneratorFamily(
        f.dim(), FamilyKind::Derived, [=](double t) -> Matrix { return alpha * f.eval(t) + beta * g.eval(t); },
        [=](double t) -> Matrix { return alpha * f.deriv(t) + beta * g.deriv(t); });
}

double derivative_consistency(const GeneratorFamily& family, int samples, std::uint64_t seed) {
    constexpr double h = 1e-6;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(h, 1.0 - h);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = dist(rng);
        const Matrix fd = (family.eval(t + h) - family.eval(t - h)) / (2.0 * h);
        const Matrix d = family.deriv(t);
        const double scale = 1e-7 * (1.0 + operator_norm(d));
        worst = std::max(worst, operator_norm(fd - d) / scale);
    }
    return worst;
}

} // namespace salab
