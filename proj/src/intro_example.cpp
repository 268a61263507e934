#include "salab/intro_example.hpp"

#include "salab/errors.hpp"
#include "salab/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace salab {

Matrix intro_similarity(const IntroParams& params, double t) {
    return expm(-I_unit * t * intro_rotation(params.k));
}

IntroClosedForm intro_closed_form(const IntroParams& params, double epsilon) {
    require(epsilon > 0.0, "intro_closed_form: epsilon must be positive");
    require(params.a != 0.0 && params.k != 0.0, "intro_closed_form: a and k must be nonzero");
    const Complex a = params.a;
    const Complex k = params.k;
    const Complex eak = epsilon * a * k;
    if (std::abs(1.0 - eak) < 1e-10) {
        fail(ErrorKind::DegenerateParams, "1 - eps a k vanishes");
    }
    IntroClosedForm c;
    c.params = params;
    c.epsilon = epsilon;
    // Principal branch; a +0 imaginary part puts negative reals on the upper side.
    Complex arg = eak;
    if (arg.imag() == 0.0) {
        arg = Complex(arg.real(), 0.0);
    }
    c.lambda_plus = std::sqrt(arg);

    const Complex den1 = 1.0 - eak;
    c.p_one = Matrix::Zero(3, 3);
    c.p_one(0, 2) = epsilon * k / den1;
    c.p_one(1, 2) = epsilon * epsilon * k * k / den1;
    c.p_one(2, 2) = 1.0;

    auto pm = [&](Complex lp, Complex lm) {
        const Complex diff = lp - lm;
        Matrix p = Matrix::Zero(3, 3);
        p(0, 0) = lp / diff;
        p(0, 1) = a / diff;
        p(0, 2) = lp * epsilon * k / (diff * (lp - 1.0));
        p(1, 0) = epsilon * k / diff;
        p(1, 1) = lp / diff;
        p(1, 2) = epsilon * epsilon * k * k / (diff * (lp - 1.0));
        return p;
    };
    c.p_plus = pm(c.lambda_plus, -c.lambda_plus);
    c.p_minus = pm(-c.lambda_plus, c.lambda_plus);
    return c;
}

Matrix IntroClosedForm::starred(int j, double t) const {
    require(j == 0 || j == 1, "starred: j must be 0 or 1");
    const Matrix s = intro_similarity(params, t);
    const Matrix sinv = intro_similarity(params, -t);
    const Matrix p = (j == 1) ? p_one : Matrix(p_plus + p_minus);
    return s * p * sinv;
}

ScaledMatrix closed_form_omega(const IntroParams& params, double epsilon, double t) {
    const IntroClosedForm c = intro_closed_form(params, epsilon);
    // exp(-i t mu / eps) = exp(t Im(mu) / eps) * exp(-i t Re(mu) / eps)
    const Complex mus[] = {1.0, c.lambda_plus, c.lambda_minus()};
    const Matrix* ps[] = {&c.p_one, &c.p_plus, &c.p_minus};
    double top = -std::numeric_limits<double>::infinity();
    for (const Complex mu : mus) {
        top = std::max(top, t * mu.imag() / epsilon);
    }
    ScaledMatrix out{Matrix::Zero(3, 3), top};
    for (int m = 0; m < 3; ++m) {
        const double growth = t * mus[m].imag() / epsilon - top;
        const Complex phase = std::exp(Complex(growth, -t * mus[m].real() / epsilon));
        out.value += phase * (*ps[m]);
    }
    return out;
}

double transition_prefactor(const IntroParams& params, double epsilon) {
    const Complex k = params.k;
    const double ak = std::abs(params.a * params.k);
    const Complex v0 = -epsilon * k / 2.0;
    const Complex v1 = I_unit * std::pow(epsilon, 1.5) * k * k / (2.0 * std::sqrt(ak));
    return std::sqrt(std::norm(v0) + std::norm(v1));
}

ScaledValue closed_form_transition(const IntroParams& params, double epsilon, double t) {
    require(epsilon > 0.0, "closed_form_transition: epsilon must be positive");
    const Complex ak = params.a * params.k;
    if (!(ak.real() < 0.0) || std::abs(ak.imag()) > 1e-14 * std::abs(ak)) {
        fail(ErrorKind::WrongSignParams, "the leading-order transition formula needs ak < 0");
    }
    return {transition_prefactor(params, epsilon), t * std::sqrt(std::abs(ak) / epsilon)};
}

ScaledValue numerical_transition(const IntroParams& params, double epsilon, double t, double tol) {
    const GeneratorFamily family = intro_example(params.a, params.k);
    const EvolutionResult u = evolve(family, epsilon, 0.0, t, OmegaProfile::zero(), tol);
    Matrix p0 = Matrix::Zero(3, 3);
    p0(0, 0) = 1.0;
    p0(1, 1) = 1.0;
    Matrix p1 = Matrix::Zero(3, 3);
    p1(2, 2) = 1.0;
    // S^{-1} P_0(t) = P_0 S^{-1}.
    const Matrix m = p0 * intro_similarity(params, -t) * u.matrix * p1;
    return {operator_norm(m), u.log_scale};
}

IntertwiningCheck starred_projector_intertwining(const IntroParams& params, double epsilon, double t, int j,
                                                 double tol) {
    require(j == 0 || j == 1, "starred_projector_intertwining: j must be 0 or 1");
    const IntroClosedForm c = intro_closed_form(params, epsilon);
    const GeneratorFamily family = intro_example(params.a, params.k);
    // Spectrum of H(t) is {0, 1}: omega vanishes and U is already rescaled.
    const EvolutionResult u = evolve(family, epsilon, 0.0, t, OmegaProfile::zero(), tol);
    const Matrix& m = u.matrix;
    IntertwiningCheck r;
    r.u_norm = operator_norm(m);
    r.starred = operator_norm(m * c.starred(j, 0.0) - c.starred(j, t) * m);
    const Matrix s = intro_similarity(params, t);
    const Matrix sinv = intro_similarity(params, -t);
    Matrix p0 = Matrix::Zero(3, 3);
    if (j == 1) {
        p0(2, 2) = 1.0;
    } else {
        p0(0, 0) = 1.0;
        p0(1, 1) = 1.0;
    }
    r.instantaneous = operator_norm(m * p0 - s * p0 * sinv * m);
    return r;
}

} // namespace salab
