#include "salab/errors.hpp"
#include "salab/families.hpp"
#include "salab/propagator.hpp"

#include "doctest.h"

#include <cmath>

using namespace salab;

namespace {

Matrix hermitian2() {
    Matrix h(2, 2);
    h << 0.7, Complex(0.2, -0.4), Complex(0.2, 0.4), -0.3;
    return h;
}

} // namespace

TEST_CASE("linear constant ODE against the matrix exponential, both directions") {
    Matrix a(2, 2);
    a << -0.5, 2.0, -1.0, 0.1;
    const MatrixRhs rhs = [&](double, const Matrix& y) { return Matrix(a * y); };
    const double outs[] = {0.5, 1.0, 2.0};
    const Trajectory fw = integrate_matrix_ode(rhs, Matrix::Identity(2, 2), 0.0, outs, 1e-12);
    for (std::size_t i = 0; i < 3; ++i) {
        const Matrix ref = expm(outs[i] * a);
        CHECK(operator_norm(fw.states[i] - ref) <= 1e-9 * operator_norm(ref));
    }
    const double back[] = {-1.0};
    const Trajectory bw = integrate_matrix_ode(rhs, Matrix::Identity(2, 2), 0.0, back, 1e-12);
    CHECK(operator_norm(bw.states[0] - expm(-a)) <= 1e-9 * operator_norm(expm(-a)));
    CHECK(fw.steps > 0);
}

TEST_CASE("time-dependent scalar ODE with a known solution") {
    // y' = 2 t y, y(0) = 1 -> exp(t^2).
    const MatrixRhs rhs = [](double t, const Matrix& y) { return Matrix(2.0 * t * y); };
    const double outs[] = {1.5};
    const Trajectory tr = integrate_matrix_ode(rhs, Matrix::Identity(1, 1), 0.0, outs, 1e-12);
    CHECK(std::abs(tr.states[0](0, 0) - std::exp(2.25)) <= 1e-9 * std::exp(2.25));
}

TEST_CASE("constant Hermitian generator gives the unitary exp(-iHt/eps)") {
    const Matrix h = hermitian2();
    const GeneratorFamily f = constant_family(h);
    const double eps = 0.05;
    const EvolutionResult u = evolve(f, eps, 0.2, 0.9, OmegaProfile::zero(), 1e-11);
    const Matrix ref = expm(-I_unit * 0.7 * h / eps);
    CHECK(operator_norm(u.matrix - ref) <= 1e-8);
    CHECK(u.log_scale == 0.0);
    CHECK(operator_norm(u.matrix.adjoint() * u.matrix - Matrix::Identity(2, 2)) <= 1e-8);
}

TEST_CASE("omega rescaling keeps growing modes in the log scale") {
    Matrix h = Matrix::Zero(2, 2);
    const double gamma = 0.4;
    h(0, 0) = Complex(0.0, gamma);
    h(1, 1) = 1.0;
    const GeneratorFamily f = constant_family(h);
    const OmegaProfile omega = OmegaProfile::from_family(f);
    CHECK_FALSE(omega.is_zero());
    CHECK(omega(0.3) == doctest::Approx(gamma));
    CHECK(omega.integral(0.25, 0.75) == doctest::Approx(0.5 * gamma));
    const double eps = 0.01;
    const EvolutionResult u = evolve(f, eps, 0.0, 1.0, omega, 1e-11);
    CHECK(u.log_scale == doctest::Approx(gamma / eps));
    CHECK(std::abs(u.matrix(0, 0) - 1.0) <= 1e-8);
    CHECK(std::abs(u.matrix(1, 1)) <= 1e-9);
    CHECK(std::abs(u.raw()(0, 0) - std::exp(40.0)) <= 1e-8 * std::exp(40.0));
}

TEST_CASE("real spectrum gives a zero omega profile") {
    const OmegaProfile omega = OmegaProfile::from_family(two_level(0.2, 1.0));
    CHECK(omega.is_zero());
    CHECK(omega.integral(0.0, 1.0) == 0.0);
}

TEST_CASE("sampled evolution agrees with single evolutions") {
    const GeneratorFamily f = two_level(0.3, 0.8);
    const double times[] = {0.25, 0.5, 1.0};
    const auto many = evolve_sampled(f, 0.1, 0.0, times, OmegaProfile::zero(), 1e-11);
    for (std::size_t i = 0; i < 3; ++i) {
        const EvolutionResult one = evolve(f, 0.1, 0.0, times[i], OmegaProfile::zero(), 1e-11);
        CHECK(operator_norm(many[i].matrix - one.matrix) <= 1e-8);
    }
}

TEST_CASE("reverse propagation inverts forward propagation") {
    const GeneratorFamily f = intro_example(1.0, -1.0);
    const auto gen = [&](double t) { return f.eval(t); };
    const double eps = 0.05;
    const double fw_t[] = {0.8};
    const double bw_t[] = {0.1};
    const Matrix y_fw = propagate(gen, eps, 0.1, fw_t, OmegaProfile::zero(), 1e-11).front().matrix;
    const Matrix y_bw = propagate(gen, eps, 0.8, bw_t, OmegaProfile::zero(), 1e-11).front().matrix;
    CHECK(operator_norm(y_bw * y_fw - Matrix::Identity(3, 3)) <= 1e-7);
}

TEST_CASE("evolve rejects bad arguments") {
    const GeneratorFamily f = zero_family(2);
    CHECK_THROWS_AS(evolve(f, 0.0, 0.0, 1.0, OmegaProfile::zero(), 1e-10), Error);
    CHECK_THROWS_AS(evolve(f, 1.5, 0.0, 1.0, OmegaProfile::zero(), 1e-10), Error);
    CHECK_THROWS_AS(evolve(f, 0.1, 0.6, 0.5, OmegaProfile::zero(), 1e-10), Error);
    CHECK(operator_norm(evolve(f, 0.1, 0.0, 1.0, OmegaProfile::zero(), 1e-10).matrix - Matrix::Identity(2, 2)) ==
          0.0);
}

TEST_CASE("Dyson series converges to the exact propagator") {
    const Matrix a = hermitian2();
    Matrix b(2, 2);
    b << 0.0, 1.0, 1.0, 0.0;
    const double eps = 0.5;
    const double h = 0.3;
    const Matrix exact = expm(-I_unit * h * (a / eps + b));
    const GeneratorFamily fa = constant_family(a);
    const GeneratorFamily fb = constant_family(b);
    CHECK(operator_norm(dyson_expand(fa, fb, eps, 0.0, h, 0) - expm(-I_unit * h * a / eps)) <= 1e-12);
    double prev = 1.0;
    for (int n = 1; n <= 6; ++n) {
        const double err = operator_norm(dyson_expand(fa, fb, eps, 0.0, h, n) - exact);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev <= 1e-7);
    try {
        (void)dyson_expand(fa, fb, eps, 0.0, h, 7);
        FAIL("expected OrderTooHigh");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OrderTooHigh);
    }
}

TEST_CASE("perturbation bound") {
    const double v = perturbation_bound_check(2.0, [](double) { return 0.5; }, [](double) { return 1.0; }, 0.0, 1.0);
    CHECK(v == doctest::Approx(2.0 * std::exp(2.5)));
    CHECK_THROWS_AS(perturbation_bound_check(0.5, [](double) { return 0.0; }, [](double) { return 0.0; }, 0, 1),
                    Error);
}
