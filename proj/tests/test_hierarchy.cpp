#include "salab/errors.hpp"
#include "salab/families.hpp"
#include "salab/hierarchy.hpp"

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

// Traceless real 2x2: P_pm = (I pm H / e) / 2 with e = |eigenvalue|.
Matrix upper_projector(const GeneratorFamily& f, double t) {
    const Matrix h = f.eval(t);
    const double e = std::sqrt(std::norm(h(0, 0)) + std::norm(h(0, 1)));
    return 0.5 * (Matrix::Identity(2, 2) + h / e);
}

Matrix kato_oracle(const GeneratorFamily& f, double t) {
    const double s = 1e-3;
    auto proj = [&](double u, int sign) {
        const Matrix p = upper_projector(f, u);
        return sign > 0 ? p : Matrix(Matrix::Identity(2, 2) - p);
    };
    Matrix k = Matrix::Zero(2, 2);
    for (int sign : {-1, 1}) {
        const Matrix d = (8.0 * (proj(t + s, sign) - proj(t - s, sign)) - (proj(t + 2 * s, sign) - proj(t - 2 * s, sign))) /
                         (12.0 * s);
        k += I_unit * d * proj(t, sign);
    }
    return k;
}

} // namespace

TEST_CASE("constant family converges trivially at q = 0") {
    Matrix a = Matrix::Zero(2, 2);
    a(1, 1) = 1.0;
    const Hierarchy h = build_hierarchy(constant_family(a), 0.1, 0.5, TimeGrid(33), 8);
    CHECK(h.trivially_converged);
    CHECK(h.q_star == 0);
    REQUIRE(h.deltas.size() == 1);
    CHECK(h.deltas[0] == 0.0);
    CHECK(h.group_count() == 2);
}

TEST_CASE("level-zero connection matches the closed-form Kato generator") {
    const GeneratorFamily f = two_level(0.3, 1.0);
    const Hierarchy h = build_hierarchy(f, 0.1, 0.5, TimeGrid(65), 0);
    for (int i = 2; i < h.grid.size() - 2; i += 5) {
        const double t = h.grid.node(i);
        CHECK(operator_norm(h.levels[0].connection[static_cast<std::size_t>(i)] - kato_oracle(f, t)) <= 1e-8);
    }
    CHECK(operator_norm(h.connection_at(0, 0.4321) - kato_oracle(f, 0.4321)) <= 1e-8);
}

TEST_CASE("ladder levels are consistent") {
    const double eps = 0.05;
    const GeneratorFamily f = two_level(0.2, 1.0);
    const Hierarchy h = build_hierarchy(f, eps, 0.5, TimeGrid(129), 12);
    REQUIRE(h.max_level() >= 3);
    CHECK(h.deltas[0] == doctest::Approx(h.deltas[0]));
    for (int q = 1; q <= h.max_level(); ++q) {
        const auto& lvl = h.levels[static_cast<std::size_t>(q)];
        for (int i = 0; i < h.grid.size(); i += 16) {
            const auto n = static_cast<std::size_t>(i);
            const Matrix expected = f.eval(h.grid.node(i)) - eps * h.levels[static_cast<std::size_t>(q - 1)].connection[n];
            CHECK(operator_norm(lvl.generator[n] - expected) <= 1e-12);
            for (std::size_t g = 0; g < h.group_count(); ++g) {
                const Matrix& p = lvl.projectors[g][n];
                CHECK(operator_norm(p * p - p) <= 1e-9);
                CHECK(operator_norm(p * lvl.generator[n] - lvl.generator[n] * p) <= 1e-9);
                CHECK(std::abs(p.trace() - Complex(h.multiplicities[g], 0.0)) <= 1e-6);
            }
        }
    }
    // q_star is the argmin of the recorded deltas.
    const auto it = std::min_element(h.deltas.begin(), h.deltas.end());
    CHECK(h.q_star == static_cast<int>(it - h.deltas.begin()));
    CHECK(h.q_star >= 1);
    CHECK(h.deltas[0] == doctest::Approx(2.5).epsilon(0.01));
}

TEST_CASE("smaller epsilon pushes q_star up and delta down") {
    const GeneratorFamily f = two_level(0.2, 1.0);
    const Hierarchy a = build_hierarchy(f, 0.07, 0.5, TimeGrid(129), 12);
    const Hierarchy b = build_hierarchy(f, 0.035, 0.5, TimeGrid(129), 12);
    CHECK(b.q_star >= a.q_star);
    CHECK(b.deltas[static_cast<std::size_t>(b.q_star)] < a.deltas[static_cast<std::size_t>(a.q_star)]);
}

TEST_CASE("effective generator reassembles H^q P^q") {
    const Hierarchy h = build_hierarchy(intro_example(1.0, -1.0), 0.02, 0.5, TimeGrid(33), 2);
    for (int q = 0; q <= h.max_level(); ++q) {
        for (std::size_t g = 0; g < h.group_count(); ++g) {
            const EffectiveGenerator e = effective_generator(h, q, g, 7);
            const auto& lvl = h.levels[static_cast<std::size_t>(q)];
            CHECK(operator_norm(e.reconstruct() - lvl.generator[7] * lvl.projectors[g][7]) <= 1e-10);
        }
    }
    // The eigenvalue 0 carries the nilpotent of the intro model.
    CHECK(operator_norm(effective_generator(h, 0, 0, 7).d_part) > 0.1);
    CHECK(operator_norm(effective_generator(h, 0, 1, 7).d_part) <= 1e-9);
    CHECK(operator_norm(effective_generator(h, 0, 0, 7).j_part) <= 1e-9);
}

TEST_CASE("unresolved connection raises GridTooCoarse") {
    const GeneratorFamily steep = two_level(0.01, 1.0);
    HierarchyOptions strict;
    strict.allow_regrid = false;
    CHECK(kind_of([&] { build_hierarchy(steep, 0.1, 0.5, TimeGrid(33), 2, strict); }) == ErrorKind::GridTooCoarse);
    CHECK(kind_of([&] { build_hierarchy(steep, 0.1, 0.5, TimeGrid(33), 2); }) == ErrorKind::GridTooCoarse);
}

TEST_CASE("regridding recovers a marginally resolved family") {
    const GeneratorFamily f = two_level(0.2, 1.0);
    HierarchyOptions strict;
    strict.allow_regrid = false;
    CHECK(kind_of([&] { build_hierarchy(f, 0.1, 0.5, TimeGrid(33), 1, strict); }) == ErrorKind::GridTooCoarse);
    const Hierarchy h = build_hierarchy(f, 0.1, 0.5, TimeGrid(33), 1);
    CHECK(h.grid.size() == 65);
}

TEST_CASE("large epsilon closes the gap of the corrected generator") {
    const Hierarchy ok = build_hierarchy(two_level(0.2, 0.6), 0.02, 0.5, TimeGrid(129), 2);
    CHECK(ok.max_level() == 2);
    CHECK(kind_of([] { build_hierarchy(two_level(0.2, 0.6), 1.0, 0.5, TimeGrid(129), 3); }) == ErrorKind::GapClosed);
}

TEST_CASE("invalid arguments and small fits") {
    const GeneratorFamily f = two_level(0.2, 1.0);
    CHECK(kind_of([&] { build_hierarchy(f, 0.0, 0.5, TimeGrid(33), 2); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { build_hierarchy(f, 0.1, 0.5, TimeGrid(33), -1); }) == ErrorKind::InvalidArgument);
    std::vector<Hierarchy> few{build_hierarchy(f, 0.1, 0.5, TimeGrid(129), 4)};
    CHECK(kind_of([&] { fit_delta_decay(few); }) == ErrorKind::InsufficientData);
}

TEST_CASE("self-test is tiny on smooth samples") {
    const TimeGrid g(33);
    std::vector<Matrix> s;
    for (double t : g.nodes()) {
        Matrix m(1, 1);
        m(0, 0) = std::exp(Complex(0.0, 2.0 * t));
        s.push_back(m);
    }
    CHECK(differentiation_self_test(g, s) <= 1e-12);
}
