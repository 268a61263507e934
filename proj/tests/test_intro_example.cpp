#include "salab/errors.hpp"
#include "salab/families.hpp"
#include "salab/intro_example.hpp"

#include "doctest.h"

#include <cmath>

using namespace salab;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

Matrix frame_generator(const IntroParams& p, double eps) {
    return intro_generator(p.a) - eps * intro_rotation(p.k);
}

} // namespace

TEST_CASE("eps-dependent projectors") {
    const IntroParams p;
    for (double eps : {0.1, 0.03, 0.01}) {
        const IntroClosedForm c = intro_closed_form(p, eps);
        const Matrix id = Matrix::Identity(3, 3);
        CHECK(operator_norm(c.p_one + c.p_plus + c.p_minus - id) <= 1e-12);
        CHECK(c.lambda_plus == -c.lambda_minus());
        CHECK(c.lambda_plus.imag() == doctest::Approx(std::sqrt(eps)));
        const Matrix g = frame_generator(p, eps);
        CHECK(operator_norm(g * c.p_plus - c.lambda_plus * c.p_plus) <= 1e-12 * operator_norm(c.p_plus));
        CHECK(operator_norm(g * c.p_one - c.p_one) <= 1e-12);
        for (int j : {0, 1}) {
            const Matrix s = c.starred(j, 0.6);
            CHECK(operator_norm(s * s - s) <= 1e-12 * std::max(1.0, operator_norm(s) * operator_norm(s)));
        }
    }
}

TEST_CASE("P_1(eps) approaches P_1 linearly and P_plus blows up like eps^-1/2") {
    const IntroParams p;
    Matrix p1 = Matrix::Zero(3, 3);
    p1(2, 2) = 1.0;
    std::vector<double> ratios;
    std::vector<double> scaled;
    for (double eps : {0.1, 0.03, 0.01}) {
        const IntroClosedForm c = intro_closed_form(p, eps);
        ratios.push_back(operator_norm(c.p_one - p1) / eps);
        scaled.push_back(operator_norm(c.p_plus) * std::sqrt(eps));
        CHECK(std::abs(c.p_one(2, 2) - 1.0) <= 2.0 * eps);
        CHECK(std::abs(c.p_one(2, 0)) <= 2.0 * eps);
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(*hi <= 2.0 * *lo);
    const auto [slo, shi] = std::minmax_element(scaled.begin(), scaled.end());
    CHECK(*shi <= 1.15 * *slo);
}

TEST_CASE("closed-form Omega against the matrix exponential") {
    const IntroParams p;
    const ScaledMatrix at0 = closed_form_omega(p, 0.05, 0.0);
    CHECK(operator_norm(at0.materialize() - Matrix::Identity(3, 3)) <= 1e-12);
    const double eps = 0.01;
    const Matrix ref = expm(-I_unit * 1.0 * frame_generator(p, eps) / eps);
    const Matrix om = closed_form_omega(p, eps, 1.0).materialize();
    CHECK(operator_norm(om - ref) <= 1e-9 * operator_norm(ref));
}

TEST_CASE("closed-form Omega solves its ODE") {
    const IntroParams p;
    const double eps = 0.04;
    const double h = 1e-4;
    const Matrix g = frame_generator(p, eps);
    for (double t : {0.2, 0.7}) {
        const Matrix om = closed_form_omega(p, eps, t).materialize();
        const Matrix d = (closed_form_omega(p, eps, t + h).materialize() - closed_form_omega(p, eps, t - h).materialize()) /
                         (2.0 * h);
        CHECK(operator_norm(I_unit * eps * d - g * om) <= 1e-6 * operator_norm(om));
    }
}

TEST_CASE("leading-order transition") {
    const IntroParams p;
    const ScaledValue v = closed_form_transition(p, 0.01, 1.0);
    CHECK(v.value == doctest::Approx(0.0050249).epsilon(1e-4));
    CHECK(v.log_scale == doctest::Approx(10.0));
    CHECK(v.raw() == doctest::Approx(110.68).epsilon(1e-3));
    const ScaledValue t0 = closed_form_transition(p, 0.01, 0.0);
    CHECK(t0.log_scale == 0.0);
    CHECK(t0.value == doctest::Approx(transition_prefactor(p, 0.01)));
    const ScaledValue num = numerical_transition(p, 0.01, 1.0, 1e-11);
    CHECK(num.raw() == doctest::Approx(v.raw()).epsilon(0.05));
}

TEST_CASE("parameter regimes") {
    CHECK(kind_of([] { closed_form_transition(IntroParams{1.0, 1.0}, 0.01, 1.0); }) == ErrorKind::WrongSignParams);
    CHECK(kind_of([] { intro_closed_form(IntroParams{1.0, 10.0}, 0.1); }) == ErrorKind::DegenerateParams);
    CHECK(kind_of([] { closed_form_omega(IntroParams{1.0, 10.0}, 0.1, 0.5); }) == ErrorKind::DegenerateParams);
    // ak > 0: the small eigenvalues are real and the closed form still holds.
    const IntroParams pos{1.0, 1.0};
    const Matrix ref = expm(-I_unit * 0.5 * frame_generator(pos, 0.05) / 0.05);
    CHECK(operator_norm(closed_form_omega(pos, 0.05, 0.5).materialize() - ref) <= 1e-9 * operator_norm(ref));
}

TEST_CASE("starred projectors intertwine exactly, instantaneous ones do not") {
    const IntroParams p;
    for (int j : {0, 1}) {
        const IntertwiningCheck c = starred_projector_intertwining(p, 0.01, 0.7, j, 1e-9);
        CHECK(c.starred <= 1e-7 * std::max(1.0, c.u_norm));
        CHECK(c.instantaneous > 1.0);
    }
    CHECK(kind_of([&] { starred_projector_intertwining(p, 0.01, 0.7, 2, 1e-9); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("similarity is exp(-itL)") {
    const IntroParams p;
    const Matrix s = intro_similarity(p, 0.4);
    CHECK(operator_norm(s * intro_similarity(p, -0.4) - Matrix::Identity(3, 3)) <= 1e-13);
    const Matrix l = intro_rotation(p.k);
    CHECK(operator_norm(s - (Matrix::Identity(3, 3) - I_unit * 0.4 * l - 0.08 * l * l)) <= 1e-13);
}
