#ifndef ISOMONO_LEVELT_HPP
#define ISOMONO_LEVELT_HPP

#include "isomono/pfaffian.hpp"
#include <map>

namespace isomono {

// Point on the universal cover of C\{0}: radius and a real (unwrapped) angle.
// Powers z^M are exp(M log z) with log z = ln r + i theta, so solutions on
// different sheets are told apart by theta.
struct CoverPoint {
    double r = 1.0;
    double theta = 0.0;
    Complex z() const { return std::polar(r, theta); }
    Complex log() const { return Complex(std::log(r), theta); }
};

Matrix matrix_exp(const Matrix& M);
// z^M = exp(M log z) on the covering sheet of zp
Matrix matrix_power(const Matrix& M, const CoverPoint& zp);

// mu = d + rho with d integer and 0 <= Re rho < 1, unique
std::pair<std::vector<long>, std::vector<Complex>> levelt_exponents(const std::vector<Complex>& eigs);

// Fundamental-solution data at the Fuchsian point z = 0:
//   Y(z) = G0 (I + sum_k F_k z^k) z^D z^L,  L = S + R, J = D + S.
struct LeveltData {
    Matrix G0;                    // Jordan basis of A
    Matrix J0;                    // Jordan form of A
    std::vector<Matrix> F;        // F[0] = I, F[1..K]; frame between G0 and z^D
    std::vector<long> D;          // integer parts
    Matrix S0;                    // J0 - diag(D)
    Matrix R0;                    // sum of resonant pieces
    std::map<int, Matrix> R_by_gap;
    Matrix L0;                    // S0 + R0
    int K = 0;

    int n() const { return static_cast<int>(J0.rows()); }
    Matrix D_matrix() const;
    // Phi(z) := D + z^D L z^-D = J0 + sum_l R_l z^l
    Matrix phi(Complex z) const;
    Matrix monodromy_factor() const;   // e^{2 pi i L0}
};

struct LeveltOptions {
    int K = 12;
    double int_tol = 1e-7;
    // prescribed Jordan pair (audit escape hatch); bypasses normalization
    std::optional<std::pair<Matrix, Matrix>> prescribed_GJ;
};

// Coefficients of the Levelt form by the Frobenius-type recursion in the
// G0-frame. Non-resonant systems take the Sylvester route for any Jordan J0;
// resonant ones are supported for diagonalizable A with integer gaps <= K
// (R entries populated at resonant positions). Anything deeper throws.
LeveltData levelt_series(const CoalescedSystem& sys, int K);
LeveltData levelt_series(const CoalescedSystem& sys, const LeveltOptions& opt);

// Y(z) and its z-derivative from the truncated data (analytic, no finite
// differences).
Matrix levelt_eval(const LeveltData& lev, const CoverPoint& zp);
std::pair<Matrix, Matrix> levelt_eval_with_deriv(const LeveltData& lev, const CoverPoint& zp);

// Residual certificate ||z Y' - (z Lambda + A) Y|| / ||Y|| on a geometric
// radius ladder, with the fitted log-log decay slope.
struct LeveltCertificate {
    std::vector<double> radii;
    std::vector<double> residuals;
    double slope = 0.0;
};

LeveltCertificate levelt_certify(const LeveltData& lev, const CoalescedSystem& sys,
                                 double r_max = 0.5, int points = 5, double decade = 10.0);

// Proper Levelt form: permutation grouping equal-rho eigenvalues with integer
// parts non-increasing; Delta = D + Sigma diagonal, N nilpotent, [Sigma, N] = 0.
struct ProperLevelt {
    std::vector<int> permutation;    // column permutation: proper index -> original index
    std::vector<Complex> Delta;      // diagonal of Delta
    Matrix Sigma;                    // diagonal, constant on rho-groups
    Matrix N;                        // nilpotent, strictly upper block-triangular
};

ProperLevelt proper_levelt(const std::vector<long>& D, const Matrix& L, double int_tol = 1e-7);

// z^Delta z^N evaluated on the cover (finite log sum)
Matrix proper_eval(const ProperLevelt& pl, const CoverPoint& zp);

} // namespace isomono

#endif
