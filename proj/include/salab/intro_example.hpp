#pragma once

#include "salab/families.hpp"
#include "salab/linalg.hpp"

namespace salab {

struct IntroParams {
    Complex a{1.0, 0.0};
    Complex k{-1.0, 0.0};
};

/// Spectral data of H - eps L for the 3x3 introductory model.
struct IntroClosedForm {
    IntroParams params;
    double epsilon = 0.0;
    Complex lambda_plus; ///< principal sqrt(eps a k)
    Matrix p_one;        ///< eigenvalue 1
    Matrix p_plus;       ///< eigenvalue +sqrt(eps a k)
    Matrix p_minus;      ///< eigenvalue -sqrt(eps a k)

    Complex lambda_minus() const { return -lambda_plus; }
    /// S(t) P_j(eps) S^{-1}(t); j = 1 is p_one, j = 0 is p_plus + p_minus.
    Matrix starred(int j, double t) const;
};

/// Throws DegenerateParams when |1 - eps a k| < 1e-10.
IntroClosedForm intro_closed_form(const IntroParams& params, double epsilon);

/// Omega(t) = exp(-it(H - eps L)/eps) from the spectral sum, as value and
/// log_scale so growing terms never overflow.
ScaledMatrix closed_form_omega(const IntroParams& params, double epsilon, double t);

/// Leading-order |P_0 Omega(t) P_1| for ak < 0: the prefactor vector norm
/// with log_scale t sqrt(|ak| / eps). WrongSignParams otherwise.
ScaledValue closed_form_transition(const IntroParams& params, double epsilon, double t);

/// Norm of (-eps k / 2, i eps^{3/2} k^2 / (2 sqrt|ak|), 0).
double transition_prefactor(const IntroParams& params, double epsilon);

/// Numerically propagated |S(t)^{-1} P_0(t) U(t, 0) P_1(0)|, which equals
/// |P_0 Omega(t) P_1| and is the quantity the leading-order formula describes.
ScaledValue numerical_transition(const IntroParams& params, double epsilon, double t, double tol);

/// S(t) = exp(-itL).
Matrix intro_similarity(const IntroParams& params, double t);

struct IntertwiningCheck {
    double starred = 0.0;       ///< |U P_j*(0) - P_j*(t) U|, rescaled
    double instantaneous = 0.0; ///< same with the instantaneous P_j(t)
    double u_norm = 0.0;
};

/// Propagates U numerically and measures the intertwining defect of the
/// starred projectors (exact in theory) against the instantaneous ones.
IntertwiningCheck starred_projector_intertwining(const IntroParams& params, double epsilon, double t, int j,
                                                 double tol);

} // namespace salab
