#include "salab/spectral.hpp"

#include "salab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace salab {
namespace {

using Index = Eigen::Index;

// Unitary swap of the adjacent diagonal entries k, k+1 of the upper
// triangular T, keeping H = Q T Q^*.
void swap_adjacent(Matrix& t, Matrix& q, Index k) {
    const Complex a = t(k, k);
    const Complex b = t(k + 1, k + 1);
    Complex g1 = t(k, k + 1);
    Complex g2 = b - a;
    const double nrm = std::hypot(std::abs(g1), std::abs(g2));
    if (nrm == 0.0) {
        return;
    }
    g1 /= nrm;
    g2 /= nrm;
    Eigen::Matrix2cd g;
    g << g1, -std::conj(g2), g2, std::conj(g1);
    t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
    t.middleCols(k, 2) = t.middleCols(k, 2) * g;
    q.middleCols(k, 2) = q.middleCols(k, 2) * g;
    t(k + 1, k) = 0.0;
    t(k, k) = b;
    t(k + 1, k + 1) = a;
}

// Riesz projector for the eigenvalues flagged in `selected` (indexed by the
// Schur diagonal position).
Matrix schur_projector(Matrix t, Matrix q, std::vector<bool> selected) {
    const Index n = t.rows();
    Index front = 0;
    for (Index i = 0; i < n; ++i) {
        if (!selected[static_cast<std::size_t>(i)]) {
            continue;
        }
        for (Index k = i; k > front; --k) {
            swap_adjacent(t, q, k - 1);
            std::swap(selected[static_cast<std::size_t>(k - 1)], selected[static_cast<std::size_t>(k)]);
        }
        ++front;
    }
    const Index m = front;
    if (m == n) {
        return identity(n);
    }
    const Index r = n - m;
    const Matrix t11 = t.topLeftCorner(m, m);
    const Matrix t12 = t.topRightCorner(m, r);
    const Matrix t22 = t.bottomRightCorner(r, r);

    // T11 X - X T22 = -T12, column by column (T22 upper triangular).
    Matrix x(m, r);
    for (Index l = 0; l < r; ++l) {
        Vector rhs = -t12.col(l);
        for (Index i = 0; i < l; ++i) {
            rhs += x.col(i) * t22(i, l);
        }
        Matrix shifted = t11 - t22(l, l) * identity(m);
        x.col(l) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    Matrix block = Matrix::Zero(n, n);
    block.topLeftCorner(m, m) = identity(m);
    block.topRightCorner(m, r) = -x;
    return q * block * q.adjoint();
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

} // namespace

Matrix resolvent(const Matrix& h, Complex lambda) {
    require(h.rows() == h.cols(), "resolvent: matrix must be square");
    const Matrix shifted = h - lambda * identity(h.rows());
    const double smin = min_singular_value(shifted);
    const double threshold = 1e-12 * std::max(1.0, operator_norm(shifted));
    if (smin < threshold) {
        fail(ErrorKind::NearSingular, "smallest singular value of H - lambda is " + std::to_string(smin));
    }
    return shifted.partialPivLu().inverse();
}

std::vector<Complex> spectrum(const Matrix& h) {
    require(h.rows() == h.cols(), "spectrum: matrix must be square");
    if (!all_finite(h)) {
        fail(ErrorKind::NonFinite, "spectrum: matrix has non-finite entries");
    }
    Eigen::ComplexEigenSolver<Matrix> solver(h, false);
    const Vector values = solver.eigenvalues();
    return {values.data(), values.data() + values.size()};
}

Matrix contour_projector(const Matrix& h, const Contour& contour, const QuadratureSettings& settings) {
    require(h.rows() == h.cols(), "contour_projector: matrix must be square");
    require(contour.radius > 0.0, "contour_projector: radius must be positive");
    require(contour.nodes >= 8 && contour.nodes % 2 == 0, "contour_projector: nodes must be even and >= 8");

    const double band = settings.exclusion_band * contour.radius;
    for (const Complex mu : spectrum(h)) {
        if (std::abs(std::abs(mu - contour.center) - contour.radius) < band) {
            fail(ErrorKind::ContourTooClose, "eigenvalue (" + std::to_string(mu.real()) + ", " +
                                                 std::to_string(mu.imag()) + ") lies on the contour band");
        }
    }

    const Index n = h.rows();
    const Matrix id = identity(n);
    auto term = [&](double theta) -> Matrix {
        const Complex phase = std::polar(1.0, theta);
        const Complex lambda = contour.center + contour.radius * phase;
        return (h - lambda * id).partialPivLu().inverse() * phase;
    };

    int nodes = contour.nodes;
    Matrix sum = Matrix::Zero(n, n);
    for (int m = 0; m < nodes; ++m) {
        sum += term(2.0 * std::numbers::pi * m / nodes);
    }
    Matrix current = -(contour.radius / nodes) * sum;
    while (true) {
        if (2 * nodes > settings.max_nodes) {
            fail(ErrorKind::NoConvergence, "contour quadrature did not converge with " +
                                               std::to_string(settings.max_nodes) + " nodes");
        }
        for (int m = 0; m < nodes; ++m) {
            sum += term(2.0 * std::numbers::pi * (2 * m + 1) / (2.0 * nodes));
        }
        nodes *= 2;
        Matrix refined = -(contour.radius / nodes) * sum;
        const double change = max_abs(refined - current);
        current = std::move(refined);
        if (change <= settings.tolerance * std::max(1.0, max_abs(current))) {
            return current;
        }
    }
}

SpectralDecomposition decompose(const Matrix& h, double gap_floor) {
    require(h.rows() == h.cols() && h.rows() > 0, "decompose: matrix must be square and non-empty");
    require(gap_floor > 0.0, "decompose: gap_floor must be positive");
    if (!all_finite(h)) {
        fail(ErrorKind::NonFinite, "decompose: matrix has non-finite entries");
    }
    const Index n = h.rows();
    Eigen::ComplexSchur<Matrix> schur(h);
    const Matrix& t = schur.matrixT();
    const Matrix& q = schur.matrixU();

    std::vector<Complex> eig(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        eig[static_cast<std::size_t>(i)] = t(i, i);
    }

    const double join = gap_floor / 4.0;
    UnionFind uf(eig.size());
    for (std::size_t i = 0; i < eig.size(); ++i) {
        for (std::size_t j = i + 1; j < eig.size(); ++j) {
            if (std::abs(eig[i] - eig[j]) < join) {
                uf.unite(i, j);
            }
        }
    }

    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::size_t> root_to_cluster(eig.size(), eig.size());
    for (std::size_t i = 0; i < eig.size(); ++i) {
        const std::size_t r = uf.find(i);
        if (root_to_cluster[r] == eig.size()) {
            root_to_cluster[r] = clusters.size();
            clusters.emplace_back();
        }
        clusters[root_to_cluster[r]].push_back(i);
    }

    std::vector<Complex> means;
    for (const auto& c : clusters) {
        Complex s = 0.0;
        for (auto i : c) {
            s += eig[i];
        }
        means.push_back(s / static_cast<double>(c.size()));
    }

    std::vector<std::size_t> order(clusters.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (means[a].real() != means[b].real()) {
            return means[a].real() < means[b].real();
        }
        return means[a].imag() < means[b].imag();
    });

    SpectralDecomposition out;
    out.eigenvalues = eig;
    out.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < means.size(); ++a) {
        for (std::size_t b = a + 1; b < means.size(); ++b) {
            out.min_gap = std::min(out.min_gap, std::abs(means[a] - means[b]));
        }
    }
    if (out.min_gap < gap_floor) {
        fail(ErrorKind::GapViolation, "eigenvalue clusters are " + std::to_string(out.min_gap) +
                                          " apart, below the gap floor " + std::to_string(gap_floor));
    }

    out.omega = -std::numeric_limits<double>::infinity();
    for (const Complex z : eig) {
        out.omega = std::max(out.omega, z.imag());
    }

    const double hnorm = operator_norm(h);
    const Matrix id = identity(n);
    Matrix total = Matrix::Zero(n, n);
    for (const std::size_t ci : order) {
        EigenGroup g;
        g.eigenvalue = means[ci];
        g.multiplicity = static_cast<int>(clusters[ci].size());
        std::vector<bool> selected(eig.size(), false);
        for (auto i : clusters[ci]) {
            selected[i] = true;
            g.members.push_back(eig[i]);
        }
        for (const Complex a : g.members) {
            for (const Complex b : g.members) {
                g.diameter = std::max(g.diameter, std::abs(a - b));
            }
        }
        g.projector = schur_projector(t, q, selected);
        g.nilpotent = (h - g.eigenvalue * id) * g.projector;
        const double flush = 1e-12 * hnorm;
        for (Index k = 0; k < g.nilpotent.size(); ++k) {
            if (std::abs(g.nilpotent.data()[k]) < flush) {
                g.nilpotent.data()[k] = 0.0;
            }
        }
        total += g.projector;
        out.groups.push_back(std::move(g));
    }
    out.complement_projector = id - total;
    return out;
}

Contour default_contour(const SpectralDecomposition& decomposition, std::size_t j, double matrix_norm) {
    require(j < decomposition.groups.size(), "default_contour: group index out of range");
    const EigenGroup& g = decomposition.groups[j];
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < decomposition.groups.size(); ++k) {
        if (k == j) {
            continue;
        }
        for (const Complex mu : decomposition.groups[k].members) {
            nearest = std::min(nearest, std::abs(mu - g.eigenvalue));
        }
    }
    Contour c;
    c.center = g.eigenvalue;
    if (std::isfinite(nearest)) {
        c.radius = std::max(0.5 * nearest, 2.0 * g.diameter);
    } else {
        c.radius = std::max(2.0 * g.diameter, 0.5 * std::max(1.0, matrix_norm));
    }
    return c;
}

} // namespace salab
