#pragma once

#include "salab/linalg.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace salab {

enum class FamilyKind {
    IntroExample,
    NilpotentExample,
    Polynomial,
    RotatedConstant,
    TwoLevel,
    Sampled, ///< built internally from grid samples, not serializable
    Derived, ///< algebraic combination of other families
};

std::string_view to_string(FamilyKind kind);

/// A time-dependent matrix family t -> H(t) on [0, 1] together with its exact
/// derivative. Immutable; copies share the underlying callables.
class GeneratorFamily {
public:
    using Fn = std::function<Matrix(double)>;

    GeneratorFamily(Eigen::Index dim, FamilyKind kind, Fn eval, Fn deriv);

    Eigen::Index dim() const { return dim_; }
    FamilyKind kind() const { return kind_; }
    Matrix eval(double t) const { return eval_(t); }
    Matrix deriv(double t) const { return deriv_(t); }

private:
    Eigen::Index dim_;
    FamilyKind kind_;
    Fn eval_;
    Fn deriv_;
};

/// The 3x3 constant generator with a nilpotent in its spectral decomposition.
Matrix intro_generator(Complex a);
/// The 3x3 rotation generator used to conjugate it.
Matrix intro_rotation(Complex k);

/// H(t) = exp(-itL) H0 exp(itL); derivative -i[L, H(t)].
GeneratorFamily rotated_constant(const Matrix& h0, const Matrix& l);

/// rotated_constant(intro_generator(a), intro_rotation(k)); spectrum {0, 0, 1}.
GeneratorFamily intro_example(Complex a, Complex k);

/// N(t) = [[t, -1], [t^2, -t]], nilpotent of index 2 for every t.
GeneratorFamily nilpotent_example();

/// H(t) = sum_p coeffs[p] t^p.
GeneratorFamily polynomial_family(std::vector<Matrix> coeffs);

/// Avoided crossing: (1/2) [[tanh((t - 1/2)/delta), c], [c, -tanh((t - 1/2)/delta)]].
GeneratorFamily two_level(double delta, double coupling);

GeneratorFamily constant_family(const Matrix& a);
GeneratorFamily zero_family(Eigen::Index dim);

/// alpha * F(t) + beta * G(t).
GeneratorFamily linear_combination(Complex alpha, const GeneratorFamily& f, Complex beta,
                                   const GeneratorFamily& g);

/// Largest violation of |central difference - deriv| / (1e-7 (1 + |deriv|)) over
/// `samples` random times; values <= 1 mean the derivative is consistent.
double derivative_consistency(const GeneratorFamily& family, int samples = 20, std::uint64_t seed = 7);

} // namespace salab
