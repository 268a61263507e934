#include "salab/errors.hpp"
#include "salab/spectral.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

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

Matrix similarity(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    Matrix t = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            t(i, j) += Complex(u(rng), u(rng));
        }
    }
    return t;
}

} // namespace

TEST_CASE("diagonal matrix splits into coordinate projectors") {
    Matrix h = Matrix::Zero(3, 3);
    h(0, 0) = 2.0;
    h(1, 1) = -1.0;
    h(2, 2) = 2.0;
    const auto d = decompose(h, 0.5);
    REQUIRE(d.size() == 2);
    CHECK(d.groups[0].eigenvalue.real() == doctest::Approx(-1.0));
    CHECK(d.groups[0].multiplicity == 1);
    CHECK(d.groups[1].multiplicity == 2);
    Matrix e = Matrix::Zero(3, 3);
    e(1, 1) = 1.0;
    CHECK(operator_norm(d.groups[0].projector - e) <= 1e-13);
    CHECK(d.min_gap == doctest::Approx(3.0));
    CHECK(operator_norm(d.complement_projector) <= 1e-13);
    CHECK(d.omega == doctest::Approx(0.0));
}

TEST_CASE("Jordan block gives a nonzero eigennilpotent") {
    Matrix j = Matrix::Zero(3, 3);
    j(0, 0) = 1.0;
    j(1, 1) = 1.0;
    j(0, 1) = 1.0;
    j(2, 2) = -2.0;
    const Matrix t = similarity(3, 4);
    const Matrix h = t * j * t.inverse();
    const auto d = decompose(h, 0.5);
    REQUIRE(d.size() == 2);
    const auto& g = d.groups[1];
    CHECK(g.multiplicity == 2);
    Matrix n = Matrix::Zero(3, 3);
    n(0, 1) = 1.0;
    CHECK(operator_norm(g.nilpotent - t * n * t.inverse()) <= 1e-7);
    CHECK(operator_norm(g.nilpotent * g.nilpotent) <= 1e-7);
    CHECK(operator_norm(d.groups[0].nilpotent) <= 1e-9);
}

TEST_CASE("zero matrix is a single group with vanishing nilpotent") {
    const auto d = decompose(Matrix::Zero(2, 2), 0.5);
    REQUIRE(d.size() == 1);
    CHECK(d.groups[0].multiplicity == 2);
    CHECK(std::abs(d.groups[0].eigenvalue) == 0.0);
    CHECK(operator_norm(d.groups[0].nilpotent) == 0.0);
    CHECK(std::isinf(d.min_gap));
}

TEST_CASE("complex spectrum sets omega") {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = Complex(0.0, 0.7);
    h(1, 1) = Complex(1.0, -0.2);
    CHECK(decompose(h, 0.5).omega == doctest::Approx(0.7));
}

TEST_CASE("clusters closer than the gap floor raise GapViolation") {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 0.3;
    CHECK(kind_of([&] { decompose(h, 0.5); }) == ErrorKind::GapViolation);
    CHECK(decompose(h, 0.25).size() == 2);
}

TEST_CASE("contour projector matches the similarity oracle") {
    Matrix j = Matrix::Zero(4, 4);
    j(0, 0) = Complex(0.0, 1.0);
    j(1, 1) = 2.0;
    j(2, 2) = 2.0;
    j(1, 2) = 1.0;
    j(3, 3) = -3.0;
    const Matrix t = similarity(4, 9);
    const Matrix tinv = t.inverse();
    const Matrix h = t * j * tinv;
    Matrix e = Matrix::Zero(4, 4);
    e(1, 1) = 1.0;
    e(2, 2) = 1.0;
    const Matrix p = contour_projector(h, Contour{2.0, 1.0, 16});
    CHECK(operator_norm(p - t * e * tinv) <= 1e-9);
    CHECK(operator_norm(p * p - p) <= 1e-9);
}

TEST_CASE("contour through an eigenvalue is rejected") {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.0;
    CHECK(kind_of([&] { contour_projector(h, Contour{0.0, 1.0, 16}); }) == ErrorKind::ContourTooClose);
    CHECK(kind_of([&] { resolvent(h, 1.0); }) == ErrorKind::NearSingular);
    CHECK(kind_of([&] { contour_projector(h, Contour{0.0, 0.5, 7}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("resolvent inverts the shifted matrix") {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 1) = 1.0;
    const Complex z(0.5, 0.5);
    const Matrix r = resolvent(h, z);
    CHECK(operator_norm(r * (h - z * Matrix::Identity(2, 2)) - Matrix::Identity(2, 2)) <= 1e-14);
}

TEST_CASE("non-finite input is rejected") {
    Matrix h = Matrix::Identity(2, 2);
    h(0, 0) = std::numeric_limits<double>::infinity();
    CHECK(kind_of([&] { decompose(h, 0.5); }) == ErrorKind::NonFinite);
}

TEST_CASE("default contour encloses only its own group") {
    Matrix h = Matrix::Zero(3, 3);
    h(0, 0) = 0.0;
    h(1, 1) = 1.0;
    h(2, 2) = 4.0;
    const auto d = decompose(h, 0.5);
    for (std::size_t j = 0; j < d.size(); ++j) {
        const Contour c = default_contour(d, j, operator_norm(h));
        CHECK(operator_norm(contour_projector(h, c) - d.groups[j].projector) <= 1e-10);
    }
}
