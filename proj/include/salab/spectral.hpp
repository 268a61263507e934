#pragma once

#include "salab/linalg.hpp"

#include <cstddef>
#include <vector>

namespace salab {

/// Circle in the spectral plane used for Riesz-projector quadrature.
struct Contour {
    Complex center{0.0, 0.0};
    double radius = 1.0;
    int nodes = 16; ///< starting trapezoidal node count, even, >= 8
};

/// One distinguished eigenvalue cluster: eigenvalue, algebraic multiplicity,
/// Riesz projector and eigennilpotent D = (H - lambda) P.
struct EigenGroup {
    Complex eigenvalue;
    int multiplicity = 0;
    Matrix projector;
    Matrix nilpotent;
    std::vector<Complex> members; ///< raw eigenvalues forming the cluster
    double diameter = 0.0;
};

struct SpectralDecomposition {
    std::vector<EigenGroup> groups;
    Matrix complement_projector;
    double min_gap = 0.0; ///< +inf when there is a single group
    double omega = 0.0;   ///< max imaginary part over the whole spectrum
    std::vector<Complex> eigenvalues;

    std::size_t size() const { return groups.size(); }
};

struct QuadratureSettings {
    int max_nodes = 4096;
    double tolerance = 1e-12;
    double exclusion_band = 0.05; ///< relative to the radius
};

/// (H - lambda)^{-1}; throws NearSingular when lambda sits on the spectrum.
Matrix resolvent(const Matrix& h, Complex lambda);

/// -(1/2 pi i) times the contour integral of the resolvent, trapezoidal rule
/// with node doubling until successive results agree.
Matrix contour_projector(const Matrix& h, const Contour& contour,
                         const QuadratureSettings& settings = {});

/// Eigenvalues of H (unordered, with repetition).
std::vector<Complex> spectrum(const Matrix& h);

/// Clusters the spectrum at gap_floor / 4 and builds one EigenGroup per
/// cluster. Groups are ordered by (Re, Im) of the cluster mean.
SpectralDecomposition decompose(const Matrix& h, double gap_floor);

/// Default circle for group j: half the distance to the nearest foreign
/// eigenvalue, but never below twice the cluster diameter.
Contour default_contour(const SpectralDecomposition& decomposition, std::size_t j,
                        double matrix_norm);

} // namespace salab
