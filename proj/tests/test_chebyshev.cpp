#include "salab/chebyshev.hpp"
#include "salab/errors.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace salab;

namespace {

std::vector<Matrix> sample(const TimeGrid& g, auto f) {
    std::vector<Matrix> out;
    for (double t : g.nodes()) {
        Matrix m(1, 1);
        m(0, 0) = f(t);
        out.push_back(m);
    }
    return out;
}

} // namespace

TEST_CASE("grid is ascending on [0, 1] with clustered endpoints") {
    const TimeGrid g(33);
    CHECK(g.size() == 33);
    CHECK(g.node(0) == doctest::Approx(0.0));
    CHECK(g.node(32) == doctest::Approx(1.0));
    CHECK(g.node(16) == doctest::Approx(0.5));
    for (int i = 1; i < g.size(); ++i) {
        CHECK(g.node(i) > g.node(i - 1));
    }
    CHECK(g.node(1) - g.node(0) < g.node(17) - g.node(16));
    CHECK_THROWS_AS(TimeGrid(2), Error);
}

TEST_CASE("coefficients of Chebyshev polynomials in 2t - 1") {
    const TimeGrid g(17);
    std::vector<double> v;
    for (double t : g.nodes()) {
        const double x = 2.0 * t - 1.0;
        v.push_back(4.0 * x * x * x - 3.0 * x + 0.5); // T_3 + T_0 / 2
    }
    const auto c = g.coefficients(v);
    CHECK(c[0] == doctest::Approx(0.5));
    CHECK(c[3] == doctest::Approx(1.0));
    CHECK(std::abs(c[1]) <= 1e-14);
    CHECK(std::abs(c[2]) <= 1e-14);
    const ChebSeries s = g.series(v);
    CHECK(s(0.3) == doctest::Approx(4 * std::pow(-0.4, 3) + 1.2 + 0.5));
}

TEST_CASE("spectral derivative and integral of smooth functions") {
    const TimeGrid g(33);
    const auto f = sample(g, [](double t) { return Complex(std::sin(3 * t), std::exp(-t)); });
    const auto df = g.differentiate(f);
    const auto intf = g.integrate(f);
    for (int i = 0; i < g.size(); ++i) {
        const double t = g.node(i);
        CHECK(std::abs(df[i](0, 0) - Complex(3 * std::cos(3 * t), -std::exp(-t))) <= 1e-10);
        CHECK(std::abs(intf[i](0, 0) - Complex((1 - std::cos(3 * t)) / 3, 1 - std::exp(-t))) <= 1e-13);
    }
}

TEST_CASE("antiderivative of a series vanishes at zero") {
    const TimeGrid g(33);
    std::vector<double> v;
    for (double t : g.nodes()) {
        v.push_back(std::cos(2 * t));
    }
    const ChebSeries a = g.series(v).antiderivative();
    CHECK(std::abs(a(0.0)) <= 1e-15);
    CHECK(a(0.8) == doctest::Approx(std::sin(1.6) / 2).epsilon(1e-13));
}

TEST_CASE("barycentric interpolation off the nodes") {
    const TimeGrid g(33);
    const auto f = sample(g, [](double t) { return Complex(1.0 / (1.0 + t * t), 0.0); });
    for (double t : {0.013, 0.5, 0.77, 0.999}) {
        CHECK(std::abs(g.interpolate(f, t)(0, 0) - 1.0 / (1.0 + t * t)) <= 1e-13);
    }
    CHECK(std::abs(g.interpolate(f, g.node(5))(0, 0) - f[5](0, 0)) == 0.0);
}

TEST_CASE("tail ratio separates resolved from unresolved data") {
    const TimeGrid g(33);
    const auto smooth = sample(g, [](double t) { return Complex(std::exp(t), 0.0); });
    const auto steep = sample(g, [](double t) { return Complex(std::tanh((t - 0.5) / 0.01), 0.0); });
    CHECK(g.tail_ratio(smooth) <= 1e-14);
    CHECK(g.tail_ratio(steep) >= 1e-3);
}
