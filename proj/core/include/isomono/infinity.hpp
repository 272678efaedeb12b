#ifndef ISOMONO_INFINITY_HPP
#define ISOMONO_INFINITY_HPP

#include "isomono/levelt.hpp"
#include "isomono/ode.hpp"

namespace isomono {

// ---- Stokes-ray geometry ---------------------------------------------------

struct StokesRay {
    double theta;   // direction in [0, 2 pi)
    int i, j;       // ordered block pair with Re((lambda_i - lambda_j) z) = 0,
                    // Im((lambda_i - lambda_j) z) < 0 along the ray
};

std::vector<StokesRay> stokes_rays(const Lambda& lambda);

struct StokesGeometry {
    std::vector<StokesRay> rays;   // sorted by theta
    double tau = 0.0;              // admissible direction
    double margin = 0.0;           // min angular distance from {tau + k pi} to any ray
};

// tau maximizing the minimal distance from {tau + k pi} to every ray over all
// lambda samples; deterministic tie-break toward `preferred`. Throws when the
// margin falls below min_margin (polydisc too large).
StokesGeometry choose_admissible_tau(const std::vector<std::vector<StokesRay>>& ray_sets,
                                     double preferred = 0.0, double min_margin = 1e-3);

StokesGeometry stokes_geometry(const Lambda& lambda, double preferred = 0.0,
                               double min_margin = 1e-3);

// sector S_nu: tau + (nu-1) pi < arg z < tau + nu pi (open, delta-fattening
// left implicit); angles are real numbers on the cover
std::pair<double, double> sector_bounds(const StokesGeometry& geom, int nu);

// directions of rays (shifted by 2 pi k) falling inside (lo, hi)
std::vector<double> rays_in_interval(const std::vector<StokesRay>& rays, double lo, double hi);

// bisector of the widest ray-free arc of S_nu; when `containing` is given,
// the bisector of the arc containing that direction instead
double sector_init_angle(const StokesGeometry& geom, int nu,
                         std::optional<double> containing = std::nullopt);

// ---- formal solution at z = infinity ----------------------------------------

// Y_F = T (I + sum F_k z^-k) z^D z^L e^{Lambda z}; F_k live in the T-frame.
struct FormalInfinityData {
    Matrix T;                 // block-diagonal reducer
    Matrix J;                 // T^-1 A_D T (Jordan blocks on the diagonal)
    std::vector<Matrix> F;    // F[0] = I
    std::vector<long> D;
    Matrix S, R, L;           // J = D + S, L = S + R (all block-diagonal)
    std::map<int, Matrix> R_by_gap;
    int K = 0;

    int n() const { return static_cast<int>(J.rows()); }
    Matrix D_matrix() const;
    // Phi(z) = D + z^D L z^-D = J + sum_l R_l z^-l
    Matrix phi(Complex z) const;
};

struct FormalOptions {
    int K = 8;
    double int_tol = 1e-7;
};

// Coefficients by the recursion in the T-conjugated frame: off-diagonal
// blocks from [Lambda, F_{k+1}] = W_k, diagonal blocks from the integer-shift
// equations. Partial resonances are supported for diagonalizable blocks
// (R_k populated); Jordan-resonant combinations throw.
FormalInfinityData formal_series(const CoalescedSystem& sys, const FormalOptions& opt = {});

// e^{Lambda z}-free factor H(z) = T (I + sum F_k z^-k) z^D z^L and its
// certificate residual: the full Y_F = H e^{Lambda z}.
Matrix formal_eval_core(const FormalInfinityData& fd, const CoverPoint& zp);

struct InfinityCertificate {
    std::vector<double> radii;
    std::vector<double> residuals;
    double slope = 0.0;   // in log(1/|z|)
};

InfinityCertificate infinity_certify(const FormalInfinityData& fd, const CoalescedSystem& sys,
                                     double r_min = 10.0, int points = 5, double decade = 10.0);

// ---- sector solutions --------------------------------------------------------

struct SectorOptions {
    double R_match = 0.0;        // 0 -> automatic from |Delta lambda| scale
    double rtol = 1e-12;
    double atol = 1e-16;
    int arc_segments = 12;
};

// Canonical solution Y_nu of the sector containing theta_init, evaluated at
// one cover point. Init value is the truncated formal solution at
// (R_match, theta_init); propagation is per column with the exponential
// factored out.
Matrix sector_eval(const CoalescedSystem& sys, const FormalInfinityData& fd, double theta_init,
                   const CoverPoint& target, const SectorOptions& opt = {}, OdeStats* stats = nullptr);

struct SectorSolution {
    int nu = 0;
    double theta_init = 0.0;
    double R_match = 0.0;
    std::vector<CoverPoint> grid;
    std::vector<Matrix> samples;
    double eps_init_estimate = 0.0;   // ~ |F_K| R^{-(K+1)} at matching
    OdeStats stats;
};

SectorSolution sector_solution(const CoalescedSystem& sys, const StokesGeometry& geom,
                               const FormalInfinityData& fd, int nu,
                               const std::vector<CoverPoint>& grid, const SectorOptions& opt = {});

double default_R_match(const CoalescedSystem& sys, const FormalInfinityData& fd, double eps_target = 1e-11);

} // namespace isomono

#endif
